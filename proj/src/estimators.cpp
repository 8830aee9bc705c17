#include "mlkol/estimators.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mlkol {

EmpiricalCovariances empirical_covariances(const SampleSet& data) {
    if (data.u.rows() < 1) throw std::invalid_argument("empirical_covariances: empty sample set");
    if (data.u.rows() != data.v.rows()) {
        throw std::invalid_argument("empirical_covariances: u and v row counts differ");
    }
    const double inv_n = 1.0 / static_cast<double>(data.u.rows());
    EmpiricalCovariances cov;
    cov.n = static_cast<int>(data.u.rows());
    cov.c_kk.noalias() = inv_n * (data.u.transpose() * data.u);
    cov.c_kk = 0.5 * (cov.c_kk + cov.c_kk.transpose()).eval();
    cov.c_lk.noalias() = inv_n * (data.v.transpose() * data.u);
    return cov;
}

EmpiricalCovariances population_covariances(const OperatorMatrix& a0) {
    EmpiricalCovariances cov;
    cov.c_kk = a0.input.values().asDiagonal();
    cov.c_lk = a0.m * a0.input.values().asDiagonal();
    cov.n = 0;
    return cov;
}

LambdaMap::LambdaMap(int d_out) : rows_(static_cast<std::size_t>(d_out), 0.0) {}

LambdaMap LambdaMap::uniform(int d_out, double lambda) {
    LambdaMap map(d_out);
    for (int j = 0; j < d_out; ++j) map.set(j, lambda);
    return map;
}

LambdaMap LambdaMap::from_schedule(const LambdaSchedule& sched, int d_out) {
    LambdaMap map(d_out);
    const int rows = std::min(sched.y_max, d_out);
    for (int j = 0; j < rows; ++j) map.set(j, sched.lambdas[j]);
    return map;
}

LambdaMap LambdaMap::from_levels(const LevelSchedule& sched, int d_out) {
    LambdaMap map(d_out);
    for (const auto& lvl : sched.levels) {
        for (int row = lvl.row_begin; row < lvl.row_end && row <= d_out; ++row) {
            map.set(row - 1, lvl.lambda);
        }
    }
    return map;
}

void LambdaMap::set(int row, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("LambdaMap: row " + std::to_string(row) +
                                    " needs a positive finite lambda");
    }
    rows_.at(row) = lambda;
}

void LambdaMap::unset(int row) { rows_.at(row) = 0.0; }

int LambdaMap::learned_count() const {
    int count = 0;
    for (double l : rows_) count += l > 0.0 ? 1 : 0;
    return count;
}

std::map<double, std::vector<int>> LambdaMap::groups() const {
    std::map<double, std::vector<int>> out;
    for (int j = 0; j < size(); ++j) {
        if (learned(j)) out[rows_[j]].push_back(j);
    }
    return out;
}

Eigen::MatrixXd fit_rowwise_ridge(const EmpiricalCovariances& cov, const LambdaMap& lmap,
                                  RidgeStats* stats) {
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index d_in = cov.c_kk.rows();
    const Eigen::Index d_out = cov.c_lk.rows();
    if (cov.c_kk.cols() != d_in || cov.c_lk.cols() != d_in) {
        throw std::invalid_argument("fit_rowwise_ridge: covariance dimensions disagree");
    }
    if (lmap.size() != d_out) {
        throw std::invalid_argument("fit_rowwise_ridge: lambda map covers " +
                                    std::to_string(lmap.size()) + " rows, expected " +
                                    std::to_string(d_out));
    }
    Eigen::MatrixXd est = Eigen::MatrixXd::Zero(d_out, d_in);
    int factorizations = 0;
    for (const auto& [lambda, rows] : lmap.groups()) {
        Eigen::MatrixXd reg = cov.c_kk;
        reg.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(reg);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("fit_rowwise_ridge: Cholesky failed for lambda = " +
                                     std::to_string(lambda));
        }
        ++factorizations;
        // (C + lambda I) X^T = C_LK[rows]^T
        Eigen::MatrixXd rhs(d_in, static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) rhs.col(k) = cov.c_lk.row(rows[k]).transpose();
        const Eigen::MatrixXd sol = llt.solve(rhs);
        for (std::size_t k = 0; k < rows.size(); ++k) est.row(rows[k]) = sol.col(k).transpose();
    }
    if (stats != nullptr) {
        stats->factorizations = factorizations;
        stats->elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
    }
    return est;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::single: return "single";
        case EstimatorKind::variance: return "variance";
        case EstimatorKind::bias: return "bias";
        case EstimatorKind::multilevel: return "multilevel";
    }
    return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
    for (auto kind : all_estimators()) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

const std::vector<EstimatorKind>& all_estimators() {
    static const std::vector<EstimatorKind> kinds{EstimatorKind::single, EstimatorKind::variance,
                                                  EstimatorKind::bias, EstimatorKind::multilevel};
    return kinds;
}

double baseline_lambda(const ProblemConfig& cfg, double n) {
    return std::pow(n, -1.0 / (cfg.beta + cfg.p));
}

LambdaMap estimator_lambda_map(EstimatorKind kind, const ProblemConfig& cfg, double n) {
    switch (kind) {
        case EstimatorKind::single: return LambdaMap::uniform(cfg.d_out, baseline_lambda(cfg, n));
        case EstimatorKind::variance:
            return LambdaMap::from_schedule(variance_lambdas(cfg, n), cfg.d_out);
        case EstimatorKind::bias: return LambdaMap::from_schedule(bias_lambdas(cfg, n), cfg.d_out);
        case EstimatorKind::multilevel:
            return LambdaMap::from_levels(multilevel_schedule(cfg, n), cfg.d_out);
    }
    throw std::invalid_argument("estimator_lambda_map: unknown estimator");
}

namespace {

void check_dims(const SampleSet& data, const ProblemConfig& cfg) {
    if (data.u.cols() != cfg.d_in || data.v.cols() != cfg.d_out) {
        throw std::invalid_argument("sample set is " + std::to_string(data.u.cols()) + " -> " +
                                    std::to_string(data.v.cols()) + ", config expects " +
                                    std::to_string(cfg.d_in) + " -> " + std::to_string(cfg.d_out));
    }
}

OperatorMatrix fit_with_map(const EmpiricalCovariances& cov, const ProblemConfig& cfg,
                            const LambdaMap& lmap, RidgeStats* stats) {
    return OperatorMatrix(fit_rowwise_ridge(cov, lmap, stats), input_decay(cfg), output_decay(cfg));
}

}  // namespace

OperatorMatrix estimate_single_ridge(const SampleSet& data, const ProblemConfig& cfg,
                                     double lambda, RidgeStats* stats) {
    cfg.validate();
    check_dims(data, cfg);
    return fit_with_map(empirical_covariances(data), cfg, LambdaMap::uniform(cfg.d_out, lambda),
                        stats);
}

OperatorMatrix estimate_variance_contour(const SampleSet& data, const ProblemConfig& cfg,
                                         RidgeStats* stats) {
    return estimate(EstimatorKind::variance, data, cfg, stats);
}

OperatorMatrix estimate_bias_contour(const SampleSet& data, const ProblemConfig& cfg,
                                     RidgeStats* stats) {
    return estimate(EstimatorKind::bias, data, cfg, stats);
}

OperatorMatrix estimate_multilevel(const SampleSet& data, const ProblemConfig& cfg,
                                   RidgeStats* stats) {
    return estimate(EstimatorKind::multilevel, data, cfg, stats);
}

OperatorMatrix estimate(EstimatorKind kind, const SampleSet& data, const ProblemConfig& cfg,
                        RidgeStats* stats) {
    cfg.validate();
    check_dims(data, cfg);
    return estimate_from_covariances(kind, empirical_covariances(data), cfg, stats);
}

OperatorMatrix estimate_from_covariances(EstimatorKind kind, const EmpiricalCovariances& cov,
                                         const ProblemConfig& cfg, RidgeStats* stats) {
    const double n = cov.n;
    return fit_with_map(cov, cfg, estimator_lambda_map(kind, cfg, n), stats);
}

OperatorMatrix population_regularized(const OperatorMatrix& a0, const LambdaMap& lmap) {
    if (lmap.size() != a0.d_out()) {
        throw std::invalid_argument("population_regularized: lambda map size mismatch");
    }
    const Eigen::VectorXd& mu = a0.input.values();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a0.d_out(), a0.d_in());
    for (int j = 0; j < a0.d_out(); ++j) {
        if (!lmap.learned(j)) continue;
        const double lambda = lmap.lambda(j);
        for (int i = 0; i < a0.d_in(); ++i) m(j, i) = mu[i] / (mu[i] + lambda) * a0.m(j, i);
    }
    return OperatorMatrix(std::move(m), a0.input, a0.output);
}

double analytic_bias(const SourceCoefficients& src, const LambdaMap& lmap, const EigenDecay& in,
                     const EigenDecay& out, const ProblemConfig& cfg) {
    if (src.a.cols() != in.size() || src.a.rows() != out.size() || lmap.size() != out.size()) {
        throw std::invalid_argument("analytic_bias: dimension mismatch");
    }
    const Eigen::VectorXd col_w = in.pow(cfg.beta - cfg.beta_prime);
    const Eigen::VectorXd row_w = out.pow(cfg.gamma_prime - cfg.gamma);
    double sum = 0.0;
    for (int j = 0; j < out.size(); ++j) {
        const bool learned = lmap.learned(j);
        const double lambda = learned ? lmap.lambda(j) : 0.0;
        for (int i = 0; i < in.size(); ++i) {
            const double shrink = learned ? lambda / (in[i] + lambda) : 1.0;
            const double a = src.a(j, i);
            sum += col_w[i] * row_w[j] * shrink * shrink * a * a;
        }
    }
    return std::sqrt(sum);
}

double effective_dimension(const EigenDecay& decay, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("effective_dimension: lambda must be > 0");
    return (decay.values().array() / (decay.values().array() + lambda)).sum();
}

PredictionError prediction_error_metric(const OperatorMatrix& a_hat, const OperatorMatrix& a0,
                                        const ProblemConfig& cfg, int n_mc, std::uint64_t seed) {
    if (n_mc < 2) throw std::invalid_argument("prediction_error_metric: need n_mc >= 2");
    const OperatorMatrix err = a_hat - a0;
    const Eigen::VectorXd row_w = err.output.pow(-(1.0 - cfg.gamma_prime));
    const Eigen::MatrixXd u = sample_inputs(n_mc, err.input, seed);
    const Eigen::MatrixXd mapped = u * err.m.transpose();  // n_mc x d_out
    const Eigen::VectorXd per_draw = mapped.array().square().matrix() * row_w;

    PredictionError out;
    out.monte_carlo = per_draw.mean();
    const double var =
        (per_draw.array() - out.monte_carlo).square().sum() / static_cast<double>(n_mc - 1);
    out.std_error = std::sqrt(var / n_mc);
    out.exact = (row_w.asDiagonal() * err.m.array().square().matrix() * err.input.values()).sum();
    const double bound = bg_norm(err, 0.0, cfg.gamma_prime);
    out.norm_bound = bound * bound;
    return out;
}

}  // namespace mlkol
