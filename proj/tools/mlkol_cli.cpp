// mlkol: schedules, contours, simulations and rate sweeps for synthetic
// kernel operator learning problems.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlkol/config.hpp"
#include "mlkol/estimators.hpp"
#include "mlkol/harness.hpp"
#include "mlkol/io.hpp"
#include "mlkol/oracle_checks.hpp"
#include "mlkol/schedules.hpp"
#include "mlkol/spectral.hpp"
#include "mlkol/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<int> n_list;
    std::string estimator = "all";
    std::string format = "csv";
    std::optional<double> n;
    std::optional<double> c0;
    int workers = 1;
    // contours
    std::string kind = "both";
    std::optional<double> x_min;
    std::optional<double> x_max;
    int samples = 64;
    // simulate
    std::string dump_data;
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

mlkol::ExperimentConfig load(const Options& opt) {
    auto exp = opt.config.empty() ? mlkol::template_config() : mlkol::load_config(opt.config);
    if (opt.seed) exp.problem.seed = *opt.seed;
    if (opt.c0) exp.problem.c0 = *opt.c0;
    if (opt.n) exp.n = *opt.n;
    if (opt.trials) exp.trials = *opt.trials;
    if (!opt.n_list.empty()) exp.n_list = opt.n_list;
    exp.problem.validate();
    if (!(exp.n >= 2.0)) throw mlkol::ConfigError("n", "must be >= 2");
    if (exp.trials < 1) throw mlkol::ConfigError("trials", "must be >= 1");
    return exp;
}

std::vector<mlkol::EstimatorKind> selected_estimators(const std::string& name) {
    if (name == "all") return mlkol::all_estimators();
    return {mlkol::estimator_from_string(name)};
}

void require_format(const std::string& format) {
    if (format != "csv" && format != "json") {
        throw std::invalid_argument("--format must be csv or json");
    }
}

int cmd_gen_config(const Options& opt) {
    auto exp = mlkol::template_config();
    if (opt.seed) exp.problem.seed = *opt.seed;
    Output out(opt.out);
    out.stream() << mlkol::config_to_json(exp).dump(2) << '\n';
    return kExitOk;
}

int cmd_schedule(const Options& opt) {
    const auto exp = load(opt);
    const auto sched = mlkol::multilevel_schedule(exp.problem, exp.n);
    Output out(opt.out);
    if (opt.format == "json") {
        out.stream() << mlkol::schedule_to_json(sched).dump(2) << '\n';
    } else {
        mlkol::write_schedule_csv(out.stream(), sched);
    }
    return kExitOk;
}

int cmd_contours(const Options& opt) {
    const auto exp = load(opt);
    const auto& cfg = exp.problem;
    const auto rate = mlkol::theoretical_rate(cfg);
    const double x_min = opt.x_min.value_or(1.0);
    const double x_max =
        opt.x_max.value_or(std::pow(exp.n, cfg.p / mlkol::variance_exponent(cfg) * rate.eta2));
    std::vector<mlkol::ContourKind> kinds;
    if (opt.kind == "both") {
        kinds = {mlkol::ContourKind::bias, mlkol::ContourKind::variance};
    } else {
        kinds = {mlkol::contour_kind_from_string(opt.kind)};
    }
    Output out(opt.out);
    json doc = json::array();
    bool header = true;
    for (auto kind : kinds) {
        const double level =
            std::pow(exp.n, kind == mlkol::ContourKind::bias ? rate.eta1 : rate.eta2);
        const auto pts = mlkol::contour_points(kind, level, cfg, x_min, x_max, opt.samples);
        if (opt.format == "json") {
            json xs = json::array();
            json ys = json::array();
            for (const auto& p : pts) {
                xs.push_back(p.x);
                ys.push_back(p.y);
            }
            doc.push_back({{"kind", mlkol::to_string(kind)}, {"level", level}, {"x", xs}, {"y", ys}});
        } else {
            mlkol::write_contours_csv(out.stream(), kind, pts, header);
            header = false;
        }
    }
    if (opt.format == "json") out.stream() << doc.dump(2) << '\n';
    return kExitOk;
}

int cmd_simulate(const Options& opt) {
    const auto exp = load(opt);
    const auto& cfg = exp.problem;
    const auto truth = mlkol::build_ground_truth(exp);
    const int n = static_cast<int>(exp.n);
    const auto data = mlkol::make_dataset(truth.op, n, exp.noise, mlkol::trial_seed(cfg.seed, n, 0));
    if (!opt.dump_data.empty()) mlkol::write_dataset(opt.dump_data, data);
    const auto cov = mlkol::empirical_covariances(data);

    json fits = json::array();
    for (auto kind : selected_estimators(opt.estimator)) {
        mlkol::RidgeStats stats;
        const auto lmap = mlkol::estimator_lambda_map(kind, cfg, exp.n);
        const auto est = mlkol::OperatorMatrix(mlkol::fit_rowwise_ridge(cov, lmap, &stats),
                                               truth.op.input, truth.op.output);
        const double err = mlkol::bg_norm(est - truth.op, cfg.beta_prime, cfg.gamma_prime);
        const double bias =
            mlkol::analytic_bias(truth.source, lmap, truth.op.input, truth.op.output, cfg);
        fits.push_back({{"estimator", mlkol::to_string(kind)},
                        {"error_sq", err * err},
                        {"bias_sq", bias * bias},
                        {"learned_rows", lmap.learned_count()},
                        {"factorizations", stats.factorizations},
                        {"elapsed_ms", stats.elapsed_ms}});
    }
    const auto rate = mlkol::theoretical_rate(cfg);
    const json doc = {{"n", n},
                      {"seed", cfg.seed},
                      {"ground_truth", mlkol::to_string(exp.ground_truth.kind)},
                      {"truth_norm", mlkol::bg_norm(truth.op, cfg.beta, cfg.gamma)},
                      {"eta1", rate.eta1},
                      {"u", rate.u},
                      {"estimates", fits}};
    Output out(opt.out);
    out.stream() << doc.dump(2) << '\n';
    return kExitOk;
}

int cmd_rates(const Options& opt) {
    const auto exp = load(opt);
    mlkol::ExperimentPlan plan;
    plan.config = exp;
    plan.n_list = exp.n_list;
    plan.trials = exp.trials;
    plan.estimators = selected_estimators(opt.estimator);
    plan.workers = opt.workers;
    if (plan.n_list.empty()) throw mlkol::ConfigError("n_list", "no sample sizes given");
    plan.validate();

    const auto report = mlkol::run_convergence(plan);
    const json doc = mlkol::report_to_json(report, plan);

    if (opt.format == "json") {
        Output out(opt.out);
        out.stream() << doc.dump(2) << '\n';
        return kExitOk;
    }
    if (opt.out.empty()) {
        mlkol::write_summary_csv(std::cout, report);
        return kExitOk;
    }
    const fs::path summary_path(opt.out);
    fs::path runs_path = summary_path;
    runs_path.replace_extension(".runs.csv");
    fs::path json_path = summary_path;
    json_path.replace_extension(".json");
    {
        Output out(summary_path.string());
        mlkol::write_summary_csv(out.stream(), report);
    }
    {
        Output out(runs_path.string());
        mlkol::write_runs_csv(out.stream(), report);
    }
    {
        Output out(json_path.string());
        out.stream() << doc.dump(2) << '\n';
    }
    for (const auto& f : report.fits) {
        std::cerr << mlkol::to_string(f.estimator) << ": slope " << f.fit.slope << " (theory "
                  << report.theoretical_slope << ", r^2 " << f.fit.r_squared << ")\n";
    }
    return kExitOk;
}

int cmd_oracle_check(const Options& opt) {
    const auto results = mlkol::run_oracle_checks(opt.seed.value_or(20240601));
    bool ok = true;
    Output out(opt.out);
    json doc = json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        if (opt.format == "json") {
            doc.push_back({{"name", r.name},
                           {"passed", r.passed},
                           {"cases", r.cases},
                           {"worst", r.worst},
                           {"tolerance", r.tolerance},
                           {"elapsed_ms", r.elapsed_ms},
                           {"detail", r.detail}});
        } else {
            out.stream() << (r.passed ? "PASS " : "FAIL ") << r.name << ": cases=" << r.cases
                         << " worst=" << r.worst << " tol=" << r.tolerance << " ("
                         << r.elapsed_ms << " ms)";
            if (!r.detail.empty()) out.stream() << " " << r.detail;
            out.stream() << '\n';
        }
    }
    if (opt.format == "json") out.stream() << doc.dump(2) << '\n';
    return ok ? kExitOk : kExitFailure;
}

int cmd_packing(const Options& opt) {
    auto exp = load(opt);
    exp.ground_truth.kind = mlkol::GroundTruthKind::packing;
    const auto& cfg = exp.problem;
    const auto& spec = exp.ground_truth.packing;
    const auto truth = mlkol::build_ground_truth(exp);
    const Eigen::MatrixXi omega = exp.ground_truth.omega
                                      ? *exp.ground_truth.omega
                                      : mlkol::random_omega(spec.m1, spec.K,
                                                            mlkol::derive_seed(cfg.seed, 3));
    Output out(opt.out);
    if (opt.format == "json") {
        json w = json::array();
        for (int i = 0; i < omega.rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < omega.cols(); ++k) row.push_back(omega(i, k));
            w.push_back(row);
        }
        json entries = json::array();
        for (int j = 0; j < truth.op.d_out(); ++j) {
            for (int i = 0; i < truth.op.d_in(); ++i) {
                if (truth.op.m(j, i) != 0.0) {
                    entries.push_back({{"row", j + 1}, {"col", i + 1}, {"value", truth.op.m(j, i)}});
                }
            }
        }
        const json doc = {{"m1", spec.m1}, {"m2", spec.m2},     {"K", spec.K},
                          {"eps", spec.eps}, {"omega", w},       {"entries", entries},
                          {"norm_sq", std::pow(mlkol::bg_norm(truth.op, cfg.beta_prime,
                                                              cfg.gamma_prime), 2)}};
        out.stream() << doc.dump(2) << '\n';
    } else {
        out.stream() << "row,col,omega,value\n";
        for (int i = 0; i < spec.m1; ++i) {
            for (int k = 0; k < spec.K; ++k) {
                const int row = k + spec.m2;
                const int col = i + spec.m1;
                out.stream() << row + 1 << ',' << col + 1 << ',' << omega(i, k) << ','
                             << mlkol::format_double(truth.op.m(row, col)) << '\n';
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel kernel operator learning simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config, "Problem configuration (JSON)");
    app.add_option("--out", opt.out, "Output path (stdout when omitted)");
    app.add_option("--seed", opt.seed, "Override the configuration seed");
    app.add_option("--trials", opt.trials, "Trials per sample size");
    app.add_option("--n-list", opt.n_list, "Comma-separated sample sizes")->delimiter(',');
    app.add_option("--estimator", opt.estimator, "single|variance|bias|multilevel|all");
    app.add_option("--format", opt.format, "csv|json");
    app.add_option("--n", opt.n, "Sample size for schedule, contours and simulate");
    app.add_option("--c0", opt.c0, "Lambda floor constant");
    app.add_option("--workers", opt.workers, "Worker threads for rates")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-config", "Write a template configuration");
    auto* schedule = app.add_subcommand("schedule", "Multilevel staircase as CSV");
    auto* contours = app.add_subcommand("contours", "Bias and variance contour samples");
    contours->add_option("--kind", opt.kind, "bias|variance|both");
    contours->add_option("--x-min", opt.x_min, "Smallest abscissa");
    contours->add_option("--x-max", opt.x_max, "Largest abscissa");
    contours->add_option("--samples", opt.samples, "Points per contour")->check(CLI::Range(2, 1000000));
    auto* simulate = app.add_subcommand("simulate", "One dataset, one fit per estimator");
    simulate->add_option("--dump-data", opt.dump_data, "Write the dataset under this prefix");
    auto* rates = app.add_subcommand("rates", "Convergence sweep and slope fits");
    auto* oracle = app.add_subcommand("oracle-check", "Analytic-oracle property suites");
    auto* packing = app.add_subcommand("packing", "Packing-family instance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        require_format(opt.format);
        if (*gen) return cmd_gen_config(opt);
        if (*schedule) return cmd_schedule(opt);
        if (*contours) return cmd_contours(opt);
        if (*simulate) return cmd_simulate(opt);
        if (*rates) return cmd_rates(opt);
        if (*oracle) return cmd_oracle_check(opt);
        if (*packing) return cmd_packing(opt);
    } catch (const mlkol::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
