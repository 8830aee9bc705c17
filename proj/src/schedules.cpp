#include "mlkol/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlkol {

namespace {

constexpr int kMaxLevels = 100000;
constexpr double kMaxLambda = 1e300;

void require_sample_count(double n, const char* who) {
    if (!(n >= 2.0) || !std::isfinite(n)) {
        throw std::invalid_argument(std::string(who) + ": sample count must be >= 2");
    }
}

double contour_lambda(double row, double row_exponent, double level_log, double lambda_exponent,
                      double floor) {
    // (row^{-row_exponent} * 2^{level_log})^{-1 / lambda_exponent}
    const double log_base = -row_exponent * std::log2(row) + level_log;
    return std::max(std::exp2(-log_base / lambda_exponent), floor);
}

}  // namespace

double lambda_floor(const ProblemConfig& cfg, double n) {
    return cfg.c0 * std::pow(n / std::log(n), -1.0 / cfg.alpha);
}

int ceil_tolerant(double y) {
    const double shrunk = y - 1e-9 * std::max(1.0, std::abs(y));
    if (shrunk >= static_cast<double>(std::numeric_limits<int>::max())) {
        return std::numeric_limits<int>::max();
    }
    return static_cast<int>(std::ceil(shrunk));
}

bool is_special_case(double u) { return std::abs(u - 1.0) <= 1e-9; }

ContourExponents contour_exponents(ContourKind kind, const ProblemConfig& cfg) {
    if (kind == ContourKind::variance) {
        return {variance_exponent(cfg) / cfg.p, (1.0 - cfg.gamma_prime) / cfg.q};
    }
    return {(cfg.beta - cfg.beta_prime) / cfg.p, (cfg.gamma_prime - cfg.gamma) / cfg.q};
}

double contour_y(ContourKind kind, const ProblemConfig& cfg, double level, double x) {
    if (!(level > 0.0)) throw std::invalid_argument("contour level must be positive");
    const auto e = contour_exponents(kind, cfg);
    return std::exp2((std::log2(level) - e.ex * std::log2(x)) / e.ey);
}

double contour_x(ContourKind kind, const ProblemConfig& cfg, double level, double y) {
    if (!(level > 0.0)) throw std::invalid_argument("contour level must be positive");
    const auto e = contour_exponents(kind, cfg);
    return std::exp2((std::log2(level) - e.ey * std::log2(y)) / e.ex);
}

int learned_rows(const ProblemConfig& cfg, double n, bool* clamped) {
    const auto rate = theoretical_rate(cfg);
    const double y = std::exp2(cfg.q / (1.0 - cfg.gamma_prime) * rate.eta2 * std::log2(n));
    int rows = std::max(1, ceil_tolerant(y));
    const bool clamp = rows > cfg.d_out;
    if (clamp) rows = cfg.d_out;
    if (clamped != nullptr) *clamped = clamp;
    return rows;
}

LambdaSchedule variance_lambdas(const ProblemConfig& cfg, double n) {
    cfg.validate();
    require_sample_count(n, "variance_lambdas");
    const auto rate = theoretical_rate(cfg);
    const double floor = lambda_floor(cfg, n);
    LambdaSchedule s;
    s.y_max = learned_rows(cfg, n, &s.clamped);
    s.lambdas.resize(s.y_max);
    for (int j = 1; j <= s.y_max; ++j) {
        s.lambdas[j - 1] = contour_lambda(j, (1.0 - cfg.gamma_prime) / cfg.q,
                                          rate.eta2 * std::log2(n), variance_exponent(cfg), floor);
    }
    return s;
}

LambdaSchedule bias_lambdas(const ProblemConfig& cfg, double n) {
    cfg.validate();
    require_sample_count(n, "bias_lambdas");
    const auto rate = theoretical_rate(cfg);
    const double floor = lambda_floor(cfg, n);
    LambdaSchedule s;
    s.y_max = learned_rows(cfg, n, &s.clamped);
    s.lambdas.resize(s.y_max);
    for (int j = 1; j <= s.y_max; ++j) {
        s.lambdas[j - 1] = contour_lambda(j, (cfg.gamma_prime - cfg.gamma) / cfg.q,
                                          rate.eta1 * std::log2(n), cfg.beta - cfg.beta_prime, floor);
    }
    return s;
}

std::vector<ContourPoint> contour_points(ContourKind kind, double level, const ProblemConfig& cfg,
                                         double x_min, double x_max, int samples) {
    if (!(level > 0.0)) throw std::invalid_argument("contour_points: level must be positive");
    if (!(x_min > 0.0) || !(x_max >= x_min)) {
        throw std::invalid_argument("contour_points: need 0 < x_min <= x_max");
    }
    if (samples < 1) throw std::invalid_argument("contour_points: samples must be >= 1");
    std::vector<ContourPoint> pts;
    pts.reserve(samples);
    const double lo = std::log2(x_min);
    const double hi = std::log2(x_max);
    for (int k = 0; k < samples; ++k) {
        const double t = samples == 1 ? 0.0 : static_cast<double>(k) / (samples - 1);
        const double x = k == samples - 1 && samples > 1 ? x_max : std::exp2(lo + t * (hi - lo));
        pts.push_back({x, contour_y(kind, cfg, level, x)});
    }
    return pts;
}

LevelSchedule multilevel_schedule(const ProblemConfig& cfg, double n) {
    cfg.validate();
    require_sample_count(n, "multilevel_schedule");
    const auto rate = theoretical_rate(cfg);
    LevelSchedule sched;
    sched.eta1 = rate.eta1;
    sched.eta2 = rate.eta2;
    sched.u = rate.u;
    sched.special_case = is_special_case(rate.u);
    sched.lambda_floor = lambda_floor(cfg, n);

    const double bias_level = std::exp2(rate.eta1 * std::log2(n));
    const double var_level = std::exp2(rate.eta2 * std::log2(n));

    // Starting abscissa; uncapped, the floor is applied to lambda below.
    double x = 0.5 * std::exp2(cfg.p / variance_exponent(cfg) * rate.eta2 * std::log2(n));

    std::vector<std::pair<double, double>> xy;
    if (sched.special_case) {
        while (true) {
            xy.emplace_back(x, contour_y(ContourKind::bias, cfg, bias_level, x));
            if (x < 1.0) break;
            x *= 0.5;
            if (static_cast<int>(xy.size()) > kMaxLevels) {
                throw std::runtime_error("multilevel_schedule: level limit exceeded");
            }
        }
    } else {
        while (true) {
            const double y = contour_y(ContourKind::variance, cfg, var_level, x);
            xy.emplace_back(x, y);
            if (x <= 2.0) break;
            x = contour_x(ContourKind::bias, cfg, bias_level, y);
            if (static_cast<int>(xy.size()) > kMaxLevels) {
                throw std::runtime_error("multilevel_schedule: level limit exceeded (u = " +
                                         std::to_string(rate.u) + ")");
            }
        }
    }

    int row = 1;
    for (const auto& [xi, yi] : xy) {
        Level lvl;
        lvl.x = xi;
        lvl.y = yi;
        lvl.lambda = std::min(std::max(std::exp2(-std::log2(xi) / cfg.p), sched.lambda_floor), kMaxLambda);
        lvl.row_begin = row;
        int end = ceil_tolerant(yi);
        if (end > cfg.d_out + 1) {
            end = cfg.d_out + 1;
            sched.clamped = true;
        }
        lvl.row_end = std::max(row, end);
        row = lvl.row_end;
        sched.levels.push_back(lvl);
    }
    return sched;
}

LevelCountBound level_count_bound(const ProblemConfig& cfg, double n) {
    const auto sched = multilevel_schedule(cfg, n);
    LevelCountBound out;
    out.levels = sched.level_count();
    out.bound = sched.special_case ? 2.0 * std::log2(n) + 3.0
                                   : 3.0 * std::log2(std::log2(n)) + 3.0;
    return out;
}

std::string to_string(ContourKind kind) {
    return kind == ContourKind::bias ? "bias" : "variance";
}

ContourKind contour_kind_from_string(const std::string& name) {
    if (name == "bias") return ContourKind::bias;
    if (name == "variance") return ContourKind::variance;
    throw std::invalid_argument("unknown contour kind '" + name + "'");
}

}  // namespace mlkol
