#include "mlkol/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace mlkol {

using nlohmann::json;

namespace {

double get_number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError(path, "expected an integer, got " + v.dump());
    }
    const auto value = v.get<std::int64_t>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        throw ConfigError(path, "integer out of range");
    }
    return static_cast<int>(value);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown key");
    }
}

template <typename T, typename Getter>
void maybe(const json& obj, const std::string& key, const std::string& prefix, T& target,
           Getter getter) {
    if (obj.contains(key)) target = getter(obj, key, prefix + key);
}

void parse_ground_truth(const json& doc, ExperimentConfig& exp) {
    if (!doc.is_object()) throw ConfigError("ground_truth", "expected an object");
    reject_unknown(doc, {"kind", "params"}, "ground_truth.");
    GroundTruthSpec& gt = exp.ground_truth;
    if (doc.contains("kind")) {
        const json& kind = doc.at("kind");
        if (!kind.is_string()) throw ConfigError("ground_truth.kind", "expected a string");
        const auto name = kind.get<std::string>();
        if (name == "random") gt.kind = GroundTruthKind::random;
        else if (name == "laplacian") gt.kind = GroundTruthKind::laplacian;
        else if (name == "packing") gt.kind = GroundTruthKind::packing;
        else throw ConfigError("ground_truth.kind", "must be random, laplacian or packing, got '" + name + "'");
    }
    const json params = doc.value("params", json::object());
    if (!params.is_object()) throw ConfigError("ground_truth.params", "expected an object");
    const std::string prefix = "ground_truth.params.";
    switch (gt.kind) {
        case GroundTruthKind::random:
            reject_unknown(params, {"taper"}, prefix);
            maybe(params, "taper", prefix, gt.taper, get_number);
            if (!(gt.taper > 0.0)) throw ConfigError(prefix + "taper", "must be positive");
            break;
        case GroundTruthKind::laplacian: {
            reject_unknown(params, {"t", "scale", "s", "m"}, prefix);
            maybe(params, "t", prefix, gt.t, get_int);
            maybe(params, "scale", prefix, gt.scale, get_number);
            // The decays are tied to p and q: mu_n = n^{-2s} = n^{-1/p}.
            const auto check = [&](const char* key, double expected) {
                if (!params.contains(key)) return;
                const double given = get_number(params, key, prefix + key);
                if (std::abs(given - expected) > 1e-12 * expected) {
                    throw ConfigError(prefix + key, "must equal " + format_double(expected) +
                                                        " to match the configured decay exponent");
                }
            };
            check("s", 1.0 / (2.0 * exp.problem.p));
            check("m", 1.0 / (2.0 * exp.problem.q));
            break;
        }
        case GroundTruthKind::packing: {
            reject_unknown(params, {"m1", "m2", "K", "eps", "omega"}, prefix);
            PackingSpec& ps = gt.packing;
            maybe(params, "m1", prefix, ps.m1, get_int);
            maybe(params, "m2", prefix, ps.m2, get_int);
            maybe(params, "K", prefix, ps.K, get_int);
            maybe(params, "eps", prefix, ps.eps, get_number);
            if (ps.m1 < 1) throw ConfigError(prefix + "m1", "must be >= 1");
            if (ps.m2 < 0) throw ConfigError(prefix + "m2", "must be >= 0");
            if (ps.K < 1) throw ConfigError(prefix + "K", "must be >= 1");
            if (!(ps.eps > 0.0)) throw ConfigError(prefix + "eps", "must be positive");
            if (params.contains("omega")) {
                const json& om = params.at("omega");
                if (!om.is_array() || static_cast<int>(om.size()) != ps.m1) {
                    throw ConfigError(prefix + "omega", "expected m1 rows");
                }
                Eigen::MatrixXi omega(ps.m1, ps.K);
                for (int i = 0; i < ps.m1; ++i) {
                    if (!om[i].is_array() || static_cast<int>(om[i].size()) != ps.K) {
                        throw ConfigError(prefix + "omega", "expected K columns in every row");
                    }
                    for (int j = 0; j < ps.K; ++j) {
                        const json& cell = om[i][j];
                        if (!cell.is_number_integer() || (cell.get<int>() != 0 && cell.get<int>() != 1)) {
                            throw ConfigError(prefix + "omega", "entries must be 0 or 1");
                        }
                        omega(i, j) = cell.get<int>();
                    }
                }
                gt.omega = omega;
            }
            if (2 * ps.m1 > exp.problem.d_in) throw ConfigError(prefix + "m1", "2*m1 exceeds d_in");
            if (ps.K + ps.m2 > exp.problem.d_out) throw ConfigError(prefix + "K", "K+m2 exceeds d_out");
            break;
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    reject_unknown(doc,
                   {"p", "q", "alpha", "beta", "beta_prime", "gamma", "gamma_prime", "B", "sigma",
                    "c0", "d_in", "d_out", "seed", "ground_truth", "noise", "n", "n_list", "trials"},
                   "");
    ExperimentConfig exp;
    ProblemConfig& cfg = exp.problem;
    const std::string none;
    maybe(doc, "p", none, cfg.p, get_number);
    maybe(doc, "q", none, cfg.q, get_number);
    maybe(doc, "alpha", none, cfg.alpha, get_number);
    maybe(doc, "beta", none, cfg.beta, get_number);
    maybe(doc, "beta_prime", none, cfg.beta_prime, get_number);
    maybe(doc, "gamma", none, cfg.gamma, get_number);
    maybe(doc, "gamma_prime", none, cfg.gamma_prime, get_number);
    maybe(doc, "B", none, cfg.B, get_number);
    maybe(doc, "sigma", none, cfg.sigma, get_number);
    maybe(doc, "c0", none, cfg.c0, get_number);
    maybe(doc, "d_in", none, cfg.d_in, get_int);
    maybe(doc, "d_out", none, cfg.d_out, get_int);
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            throw ConfigError("seed", "expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    exp.noise.sigma = cfg.sigma;
    if (doc.contains("noise")) {
        const json& noise = doc.at("noise");
        if (!noise.is_object()) throw ConfigError("noise", "expected an object");
        reject_unknown(noise, {"sigma", "profile"}, "noise.");
        if (noise.contains("sigma")) {
            const double s = get_number(noise, "sigma", "noise.sigma");
            if (doc.contains("sigma") && s != cfg.sigma) {
                throw ConfigError("noise.sigma", "disagrees with top-level sigma");
            }
            cfg.sigma = s;
            exp.noise.sigma = s;
        }
        if (noise.contains("profile")) {
            const json& prof = noise.at("profile");
            if (!prof.is_string() || prof.get<std::string>() != "polynomial") {
                throw ConfigError("noise.profile", "only \"polynomial\" is supported");
            }
        }
    }
    maybe(doc, "n", none, exp.n, get_number);
    maybe(doc, "trials", none, exp.trials, get_int);
    if (doc.contains("n_list")) {
        const json& list = doc.at("n_list");
        if (!list.is_array()) throw ConfigError("n_list", "expected an array of integers");
        for (const auto& v : list) {
            if (!v.is_number_integer()) throw ConfigError("n_list", "expected an array of integers");
            exp.n_list.push_back(v.get<int>());
        }
    }
    cfg.validate();
    if (!(exp.n >= 2.0)) throw ConfigError("n", "must be >= 2");
    if (exp.trials < 1) throw ConfigError("trials", "must be >= 1");
    for (std::size_t k = 0; k < exp.n_list.size(); ++k) {
        if (exp.n_list[k] < 2 || (k > 0 && exp.n_list[k] <= exp.n_list[k - 1])) {
            throw ConfigError("n_list", "must be strictly increasing with entries >= 2");
        }
    }
    if (doc.contains("ground_truth")) parse_ground_truth(doc.at("ground_truth"), exp);
    if (exp.ground_truth.kind == GroundTruthKind::laplacian && cfg.d_in != cfg.d_out) {
        throw ConfigError("d_out", "laplacian ground truth needs d_in == d_out");
    }
    return exp;
}

json config_to_json(const ExperimentConfig& exp) {
    const ProblemConfig& c = exp.problem;
    json doc = {{"p", c.p},         {"q", c.q},
                {"alpha", c.alpha}, {"beta", c.beta},
                {"beta_prime", c.beta_prime}, {"gamma", c.gamma},
                {"gamma_prime", c.gamma_prime}, {"B", c.B},
                {"sigma", c.sigma}, {"c0", c.c0},
                {"d_in", c.d_in},   {"d_out", c.d_out},
                {"seed", c.seed},   {"n", exp.n},
                {"trials", exp.trials}};
    if (!exp.n_list.empty()) doc["n_list"] = exp.n_list;
    json gt = {{"kind", to_string(exp.ground_truth.kind)}};
    switch (exp.ground_truth.kind) {
        case GroundTruthKind::random: gt["params"] = {{"taper", exp.ground_truth.taper}}; break;
        case GroundTruthKind::laplacian:
            gt["params"] = {{"t", exp.ground_truth.t}, {"scale", exp.ground_truth.scale}};
            break;
        case GroundTruthKind::packing: {
            const auto& ps = exp.ground_truth.packing;
            gt["params"] = {{"m1", ps.m1}, {"m2", ps.m2}, {"K", ps.K}, {"eps", ps.eps}};
            if (exp.ground_truth.omega) {
                json rows = json::array();
                for (int i = 0; i < exp.ground_truth.omega->rows(); ++i) {
                    json row = json::array();
                    for (int j = 0; j < exp.ground_truth.omega->cols(); ++j) row.push_back((*exp.ground_truth.omega)(i, j));
                    rows.push_back(row);
                }
                gt["params"]["omega"] = rows;
            }
            break;
        }
    }
    doc["ground_truth"] = gt;
    doc["noise"] = {{"sigma", exp.noise.sigma}, {"profile", "polynomial"}};
    return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<json>", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(doc);
}

ExperimentConfig template_config() {
    ExperimentConfig exp;
    ProblemConfig& c = exp.problem;
    c.p = 0.5;
    c.q = 0.5;
    c.alpha = 0.4;
    c.beta = 0.9;
    c.beta_prime = 0.1;
    c.gamma = 0.0;
    c.gamma_prime = 0.5;
    c.B = 1.0;
    c.sigma = 0.1;
    c.c0 = 1.0;
    c.d_in = 256;
    c.d_out = 512;
    c.seed = 20240601;
    exp.noise.sigma = c.sigma;
    exp.n = 16384;
    exp.n_list = {1024, 2048, 4096, 8192, 16384, 32768, 65536};
    exp.trials = 20;
    return exp;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

namespace {

// 12 significant digits; contour arithmetic carries ~1e-15 relative noise.
std::string format_short(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, 12);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

void write_schedule_csv(std::ostream& out, const LevelSchedule& sched) {
    out << "level,x,y,lambda,row_start,row_end\n";
    for (std::size_t k = 0; k < sched.levels.size(); ++k) {
        const auto& l = sched.levels[k];
        out << k << ',' << format_short(l.x) << ',' << format_short(l.y) << ','
            << format_short(l.lambda) << ',' << l.row_begin << ',' << l.row_end << '\n';
    }
}

json schedule_to_json(const LevelSchedule& sched) {
    json levels = json::array();
    for (const auto& l : sched.levels) {
        levels.push_back({{"x", l.x},
                          {"y", l.y},
                          {"lambda", l.lambda},
                          {"row_start", l.row_begin},
                          {"row_end", l.row_end}});
    }
    return {{"levels", levels},          {"eta1", sched.eta1},
            {"eta2", sched.eta2},        {"u", sched.u},
            {"special_case", sched.special_case}, {"clamped", sched.clamped},
            {"lambda_floor", sched.lambda_floor}};
}

void write_contours_csv(std::ostream& out, ContourKind kind, const std::vector<ContourPoint>& points,
                        bool header) {
    if (header) out << "kind,x,y\n";
    for (const auto& pt : points) {
        out << to_string(kind) << ',' << format_short(pt.x) << ',' << format_short(pt.y) << '\n';
    }
}

void write_runs_csv(std::ostream& out, const RateReport& report) {
    out << "estimator,n,trial,error_sq,elapsed_ms\n";
    for (const auto& r : report.runs) {
        std::ostringstream ms;
        ms.setf(std::ios::fixed);
        ms.precision(3);
        ms << r.elapsed_ms;
        out << to_string(r.estimator) << ',' << r.n << ',' << r.trial << ','
            << format_double(r.error_sq) << ',' << ms.str() << '\n';
    }
}

void write_summary_csv(std::ostream& out, const RateReport& report) {
    out << "estimator,n,median_error_sq,iqr_low,iqr_high\n";
    for (const auto& r : report.summary) {
        out << to_string(r.estimator) << ',' << r.n << ',' << format_double(r.median_error_sq) << ','
            << format_double(r.iqr_low) << ',' << format_double(r.iqr_high) << '\n';
    }
}

json report_to_json(const RateReport& report, const ExperimentPlan& plan) {
    json rows = json::array();
    for (const auto& r : report.summary) {
        rows.push_back({{"estimator", to_string(r.estimator)},
                        {"n", r.n},
                        {"median_error_sq", r.median_error_sq},
                        {"iqr_low", r.iqr_low},
                        {"iqr_high", r.iqr_high},
                        {"mean_elapsed_ms", r.mean_elapsed_ms},
                        {"factorizations", r.factorizations}});
    }
    json fits = json::object();
    for (const auto& f : report.fits) {
        fits[to_string(f.estimator)] = {{"slope", f.fit.slope},
                                        {"intercept", f.fit.intercept},
                                        {"r_squared", f.fit.r_squared}};
    }
    return {{"config", config_to_json(plan.config)},
            {"trials", plan.trials},
            {"n_list", plan.n_list},
            {"eta1", report.eta1},
            {"theoretical_slope", report.theoretical_slope},
            {"summary", rows},
            {"fits", fits},
            {"total_elapsed_ms", report.total_elapsed_ms}};
}

namespace {

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            auto bits = std::bit_cast<std::uint64_t>(m(r, c));
            if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            std::uint64_t bits = 0;
            if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
                throw std::runtime_error("truncated dataset file " + path.string());
            }
            if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
            m(r, c) = std::bit_cast<double>(bits);
        }
    }
    return m;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
    return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void write_dataset(const std::filesystem::path& prefix, const SampleSet& data) {
    write_matrix(with_suffix(prefix, ".u.bin"), data.u);
    write_matrix(with_suffix(prefix, ".v.bin"), data.v);
    const json meta = {{"n", data.u.rows()},
                       {"d_in", data.u.cols()},
                       {"d_out", data.v.cols()},
                       {"seed", data.seed_used},
                       {"dtype", "float64"},
                       {"byte_order", "little"},
                       {"layout", "row-major"},
                       {"files", {{"u", with_suffix(prefix, ".u.bin").filename().string()},
                                  {"v", with_suffix(prefix, ".v.bin").filename().string()}}}};
    std::ofstream out(with_suffix(prefix, ".json"));
    out << meta.dump(2) << '\n';
}

SampleSet read_dataset(const std::filesystem::path& prefix) {
    std::ifstream in(with_suffix(prefix, ".json"));
    if (!in) throw std::runtime_error("cannot read dataset sidecar for " + prefix.string());
    const json meta = json::parse(in);
    SampleSet data;
    const auto n = meta.at("n").get<Eigen::Index>();
    data.u = read_matrix(with_suffix(prefix, ".u.bin"), n, meta.at("d_in").get<Eigen::Index>());
    data.v = read_matrix(with_suffix(prefix, ".v.bin"), n, meta.at("d_out").get<Eigen::Index>());
    data.seed_used = meta.at("seed").get<std::uint64_t>();
    return data;
}

}  // namespace mlkol
