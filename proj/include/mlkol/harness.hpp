#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlkol/config.hpp"
#include "mlkol/estimators.hpp"
#include "mlkol/synth.hpp"

namespace mlkol {

enum class GroundTruthKind { random, laplacian, packing };

struct GroundTruthSpec {
    GroundTruthKind kind = GroundTruthKind::random;
    double taper = 0.75;
    // laplacian
    int t = 0;
    double scale = 1.0;
    // packing
    PackingSpec packing;
    std::optional<Eigen::MatrixXi> omega;  // random from the seed when absent
};

/// Everything a config file describes: the problem, its ground truth, the
/// noise law, and optional experiment defaults.
struct ExperimentConfig {
    ProblemConfig problem;
    GroundTruthSpec ground_truth;
    NoiseProfile noise;
    double n = 16384;
    std::vector<int> n_list;
    int trials = 5;
};

std::string to_string(GroundTruthKind kind);

/// Ground truth of the experiment, seeded from problem.seed.
GroundTruth build_ground_truth(const ExperimentConfig& exp);

/// Covariances of make_dataset(a0, n, profile, seed), accumulated over
/// row chunks so memory stays O(chunk * (d_in + d_out)).
EmpiricalCovariances sampled_covariances(const OperatorMatrix& a0, int n,
                                         const NoiseProfile& profile, std::uint64_t seed,
                                         int chunk = 4096);

struct ExperimentPlan {
    ExperimentConfig config;
    std::vector<int> n_list;
    int trials = 1;
    std::vector<EstimatorKind> estimators = all_estimators();
    /// Baseline uses lambda = N^{-single_lambda_exponent}; defaults to 1 / (beta + p).
    std::optional<double> single_lambda_exponent;
    int workers = 1;

    /// Throws std::invalid_argument unless n_list is strictly increasing
    /// with entries >= 2 and trials >= 1.
    void validate() const;
};

/// Regularization map of an estimator with the plan's baseline rule.
LambdaMap plan_lambda_map(EstimatorKind kind, const ProblemConfig& cfg, double n,
                          std::optional<double> single_lambda_exponent);

struct TrialResult {
    EstimatorKind estimator = EstimatorKind::multilevel;
    int n = 0;
    int trial = 0;
    double error_sq = 0.0;
    double elapsed_ms = 0.0;
    int factorizations = 0;
};

/// Squared (beta', gamma')-error of one estimator on the dataset drawn with
/// sub-seed trial_seed(cfg.seed, n, trial).
TrialResult run_trial(const ProblemConfig& cfg, const OperatorMatrix& a0,
                      const NoiseProfile& noise, int n, int trial, EstimatorKind estimator,
                      std::optional<double> single_lambda_exponent = std::nullopt);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of ln(err_sq) on ln(n).
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct SummaryRow {
    EstimatorKind estimator = EstimatorKind::multilevel;
    int n = 0;
    double median_error_sq = 0.0;
    double iqr_low = 0.0;
    double iqr_high = 0.0;
    double mean_elapsed_ms = 0.0;
    int factorizations = 0;
};

struct EstimatorFit {
    EstimatorKind estimator = EstimatorKind::multilevel;
    RateFit fit;
};

struct RateReport {
    std::vector<TrialResult> runs;       // ordered by (n, trial, estimator)
    std::vector<SummaryRow> summary;     // ordered by (estimator, n)
    std::vector<EstimatorFit> fits;
    double eta1 = 0.0;
    double theoretical_slope = 0.0;      // -eta1
    double total_elapsed_ms = 0.0;

    const SummaryRow& row(EstimatorKind kind, int n) const;
    const RateFit& fit(EstimatorKind kind) const;
};

/// Runs every (n, trial) cell on `plan.workers` threads; each cell draws one
/// dataset and fits all requested estimators on it. Output does not depend
/// on the worker count.
RateReport run_convergence(const ExperimentPlan& plan);

/// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double prob);

}  // namespace mlkol
