#include "mlkol/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mlkol/random.hpp"

namespace mlkol {

namespace {

constexpr std::uint64_t kOmegaStream = 3;

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

/// Calls fn(k) for k in [0, count) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all threads join.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int k = next++; k < count; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::string to_string(GroundTruthKind kind) {
    switch (kind) {
        case GroundTruthKind::random: return "random";
        case GroundTruthKind::laplacian: return "laplacian";
        case GroundTruthKind::packing: return "packing";
    }
    return "unknown";
}

GroundTruth build_ground_truth(const ExperimentConfig& exp) {
    const ProblemConfig& cfg = exp.problem;
    cfg.validate();
    const GroundTruthSpec& gt = exp.ground_truth;
    switch (gt.kind) {
        case GroundTruthKind::random: return random_source_operator(cfg, cfg.seed, gt.taper);
        case GroundTruthKind::laplacian: {
            // mu_n = n^{-2s} = n^{-1/p}
            auto inst = laplacian_operator(1.0 / (2.0 * cfg.p), 1.0 / (2.0 * cfg.q), gt.t, cfg.d_in,
                                           cfg.d_out, gt.scale, cfg.beta, cfg.gamma);
            return {std::move(inst.source), std::move(inst.op)};
        }
        case GroundTruthKind::packing: {
            const Eigen::MatrixXi omega =
                gt.omega ? *gt.omega
                         : random_omega(gt.packing.m1, gt.packing.K, derive_seed(cfg.seed, kOmegaStream));
            OperatorMatrix op = packing_operator(gt.packing, omega, input_decay(cfg),
                                                 output_decay(cfg), cfg.beta_prime, cfg.gamma_prime);
            SourceCoefficients src = source_from_operator(op, cfg.beta, cfg.gamma);
            return {std::move(src), std::move(op)};
        }
    }
    throw std::invalid_argument("unknown ground truth kind");
}

EmpiricalCovariances sampled_covariances(const OperatorMatrix& a0, int n,
                                         const NoiseProfile& profile, std::uint64_t seed,
                                         int chunk) {
    if (n < 1) throw std::invalid_argument("sampled_covariances: n must be >= 1");
    chunk = std::max(chunk, 1);
    const int d_in = a0.d_in();
    const int d_out = a0.d_out();
    const Eigen::VectorXd in_scale = a0.input.pow(0.5);
    const Eigen::VectorXd noise_sd = profile.variances(d_out).cwiseSqrt();
    const bool noisy = profile.sigma > 0.0;
    // Same streams and draw order as make_dataset.
    Rng input_rng(derive_seed(seed, 1));
    Rng noise_rng(derive_seed(seed, 2));

    Eigen::MatrixXd ukk = Eigen::MatrixXd::Zero(d_in, d_in);
    Eigen::MatrixXd vu = Eigen::MatrixXd::Zero(d_out, d_in);
    Eigen::MatrixXd u(chunk, d_in);
    Eigen::MatrixXd eps(chunk, d_out);
    for (int start = 0; start < n; start += chunk) {
        const int rows = std::min(chunk, n - start);
        for (int k = 0; k < rows; ++k) {
            for (int i = 0; i < d_in; ++i) {
                u(k, i) = in_scale[i] * input_rng.symmetric(kUniformHalfWidth);
            }
        }
        auto ub = u.topRows(rows);
        Eigen::MatrixXd v = ub * a0.m.transpose();
        if (noisy) {
            for (int k = 0; k < rows; ++k) {
                for (int j = 0; j < d_out; ++j) {
                    v(k, j) += noise_sd[j] * noise_rng.symmetric(kUniformHalfWidth);
                }
            }
        }
        ukk.selfadjointView<Eigen::Lower>().rankUpdate(ub.transpose());
        vu.noalias() += v.transpose() * ub;
    }
    EmpiricalCovariances cov;
    cov.n = n;
    const double inv_n = 1.0 / n;
    cov.c_kk = inv_n * Eigen::MatrixXd(ukk.selfadjointView<Eigen::Lower>());
    cov.c_lk = inv_n * vu;
    return cov;
}

void ExperimentPlan::validate() const {
    config.problem.validate();
    if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] < 2) throw std::invalid_argument("n_list entries must be >= 2");
        if (k > 0 && n_list[k] <= n_list[k - 1]) {
            throw std::invalid_argument("n_list must be strictly increasing");
        }
    }
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (estimators.empty()) throw std::invalid_argument("no estimators requested");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

LambdaMap plan_lambda_map(EstimatorKind kind, const ProblemConfig& cfg, double n,
                          std::optional<double> single_lambda_exponent) {
    if (kind == EstimatorKind::single && single_lambda_exponent) {
        return LambdaMap::uniform(cfg.d_out, std::pow(n, -*single_lambda_exponent));
    }
    return estimator_lambda_map(kind, cfg, n);
}

namespace {

TrialResult fit_and_score(const EmpiricalCovariances& cov, const ProblemConfig& cfg,
                          const OperatorMatrix& a0, int n, int trial, EstimatorKind kind,
                          std::optional<double> single_lambda_exponent) {
    const auto start = std::chrono::steady_clock::now();
    RidgeStats stats;
    const LambdaMap lmap = plan_lambda_map(kind, cfg, n, single_lambda_exponent);
    const OperatorMatrix est(fit_rowwise_ridge(cov, lmap, &stats), a0.input, a0.output);
    TrialResult r;
    r.estimator = kind;
    r.n = n;
    r.trial = trial;
    r.elapsed_ms = elapsed_ms_since(start);
    r.factorizations = stats.factorizations;
    const double err = bg_norm(est - a0, cfg.beta_prime, cfg.gamma_prime);
    r.error_sq = err * err;
    return r;
}

}  // namespace

TrialResult run_trial(const ProblemConfig& cfg, const OperatorMatrix& a0,
                      const NoiseProfile& noise, int n, int trial, EstimatorKind estimator,
                      std::optional<double> single_lambda_exponent) {
    cfg.validate();
    const auto cov = sampled_covariances(a0, n, noise, trial_seed(cfg.seed, n, trial));
    return fit_and_score(cov, cfg, a0, n, trial, estimator, single_lambda_exponent);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
    const double m = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [n, e] : points) {
        if (!(n > 0.0) || !(e > 0.0)) throw std::invalid_argument("fit_rate: values must be positive");
        sx += std::log(n);
        sy += std::log(e);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, e] : points) {
        const double dx = std::log(n) - mx;
        const double dy = std::log(e) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_rate: all sample counts are equal");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return fit;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

const SummaryRow& RateReport::row(EstimatorKind kind, int n) const {
    for (const auto& r : summary) {
        if (r.estimator == kind && r.n == n) return r;
    }
    throw std::out_of_range("no summary row for " + to_string(kind) + " at n=" + std::to_string(n));
}

const RateFit& RateReport::fit(EstimatorKind kind) const {
    for (const auto& f : fits) {
        if (f.estimator == kind) return f.fit;
    }
    throw std::out_of_range("no rate fit for " + to_string(kind));
}

RateReport run_convergence(const ExperimentPlan& plan) {
    plan.validate();
    if (plan.n_list.size() < 3) {
        throw std::invalid_argument("run_convergence: slope fitting needs at least 3 sample counts");
    }
    const auto start = std::chrono::steady_clock::now();
    const ProblemConfig& cfg = plan.config.problem;
    const GroundTruth truth = build_ground_truth(plan.config);
    const int n_est = static_cast<int>(plan.estimators.size());
    const int cells = static_cast<int>(plan.n_list.size()) * plan.trials;

    std::vector<TrialResult> results(static_cast<std::size_t>(cells) * n_est);
    parallel_for(cells, plan.workers, [&](int cell) {
        const int n = plan.n_list[cell / plan.trials];
        const int trial = cell % plan.trials;
        const auto cov =
            sampled_covariances(truth.op, n, plan.config.noise, trial_seed(cfg.seed, n, trial));
        for (int e = 0; e < n_est; ++e) {
            results[static_cast<std::size_t>(cell) * n_est + e] = fit_and_score(
                cov, cfg, truth.op, n, trial, plan.estimators[e], plan.single_lambda_exponent);
        }
    });

    RateReport report;
    report.runs = results;
    const auto rate = theoretical_rate(cfg);
    report.eta1 = rate.eta1;
    report.theoretical_slope = -rate.eta1;
    for (int e = 0; e < n_est; ++e) {
        std::vector<std::pair<double, double>> points;
        for (std::size_t k = 0; k < plan.n_list.size(); ++k) {
            std::vector<double> errs;
            double elapsed = 0.0;
            int facts = 0;
            for (int t = 0; t < plan.trials; ++t) {
                const auto& r =
                    results[(k * plan.trials + t) * static_cast<std::size_t>(n_est) + e];
                errs.push_back(r.error_sq);
                elapsed += r.elapsed_ms;
                facts = r.factorizations;
            }
            SummaryRow row;
            row.estimator = plan.estimators[e];
            row.n = plan.n_list[k];
            row.median_error_sq = quantile(errs, 0.5);
            row.iqr_low = quantile(errs, 0.25);
            row.iqr_high = quantile(errs, 0.75);
            row.mean_elapsed_ms = elapsed / plan.trials;
            row.factorizations = facts;
            report.summary.push_back(row);
            if (row.median_error_sq > 0.0) points.emplace_back(row.n, row.median_error_sq);
        }
        EstimatorFit ef;
        ef.estimator = plan.estimators[e];
        if (points.size() >= 3) {
            ef.fit = fit_rate(points);
        } else {
            // Exact recovery at every n: nothing to fit.
            ef.fit = RateFit{0.0, 0.0, 1.0};
        }
        report.fits.push_back(ef);
    }
    report.total_elapsed_ms = elapsed_ms_since(start);
    return report;
}

}  // namespace mlkol
