#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlkol/config.hpp"
#include "mlkol/schedules.hpp"
#include "mlkol/spectral.hpp"
#include "mlkol/synth.hpp"

namespace mlkol {

/// Uncentered empirical covariances C_KK = u^T u / N and C_LK = v^T u / N.
struct EmpiricalCovariances {
    Eigen::MatrixXd c_kk;  // d_in x d_in
    Eigen::MatrixXd c_lk;  // d_out x d_in
    int n = 0;
};

EmpiricalCovariances empirical_covariances(const SampleSet& data);

/// Population covariances diag(mu) and A0 diag(mu) of the data model.
EmpiricalCovariances population_covariances(const OperatorMatrix& a0);

/// Assignment of output rows (0-based) to ridge coefficients. Rows without
/// a coefficient are not learned and estimated as zero.
class LambdaMap {
public:
    explicit LambdaMap(int d_out = 0);

    static LambdaMap uniform(int d_out, double lambda);
    static LambdaMap from_schedule(const LambdaSchedule& sched, int d_out);
    static LambdaMap from_levels(const LevelSchedule& sched, int d_out);

    /// Throws unless lambda > 0 and finite.
    void set(int row, double lambda);
    void unset(int row);

    int size() const { return static_cast<int>(rows_.size()); }
    bool learned(int row) const { return rows_[row] > 0.0; }
    /// Coefficient of a learned row.
    double lambda(int row) const { return rows_[row]; }
    int learned_count() const;

    /// Learned rows grouped by coefficient, in increasing lambda order.
    std::map<double, std::vector<int>> groups() const;

private:
    std::vector<double> rows_;  // 0 marks an unlearned row
};

struct RidgeStats {
    int factorizations = 0;
    double elapsed_ms = 0.0;
};

/// Row j of the estimate is row j of c_lk times (c_kk + lambda_j I)^{-1};
/// one Cholesky factorization per distinct lambda.
Eigen::MatrixXd fit_rowwise_ridge(const EmpiricalCovariances& cov, const LambdaMap& lmap,
                                  RidgeStats* stats = nullptr);

enum class EstimatorKind { single, variance, bias, multilevel };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);
const std::vector<EstimatorKind>& all_estimators();

/// Classical input-only rule N^{-1/(beta+p)}.
double baseline_lambda(const ProblemConfig& cfg, double n);

/// The regularization map each estimator applies at sample size n.
LambdaMap estimator_lambda_map(EstimatorKind kind, const ProblemConfig& cfg, double n);

OperatorMatrix estimate_single_ridge(const SampleSet& data, const ProblemConfig& cfg,
                                     double lambda, RidgeStats* stats = nullptr);
OperatorMatrix estimate_variance_contour(const SampleSet& data, const ProblemConfig& cfg,
                                         RidgeStats* stats = nullptr);
OperatorMatrix estimate_bias_contour(const SampleSet& data, const ProblemConfig& cfg,
                                     RidgeStats* stats = nullptr);
OperatorMatrix estimate_multilevel(const SampleSet& data, const ProblemConfig& cfg,
                                   RidgeStats* stats = nullptr);

/// Dispatch on kind; `single` uses baseline_lambda.
OperatorMatrix estimate(EstimatorKind kind, const SampleSet& data, const ProblemConfig& cfg,
                        RidgeStats* stats = nullptr);

/// Same as `estimate` on precomputed covariances.
OperatorMatrix estimate_from_covariances(EstimatorKind kind, const EmpiricalCovariances& cov,
                                         const ProblemConfig& cfg, RidgeStats* stats = nullptr);

/// Population limit of the ridge: entry (j, i) is mu_i / (mu_i + lambda_j)
/// times a0(j, i) on learned rows, zero elsewhere.
OperatorMatrix population_regularized(const OperatorMatrix& a0, const LambdaMap& lmap);

/// Closed-form (beta', gamma')-norm of A_lambda - A0 from the source
/// coefficients; unlearned rows contribute their full weight.
double analytic_bias(const SourceCoefficients& src, const LambdaMap& lmap, const EigenDecay& in,
                     const EigenDecay& out, const ProblemConfig& cfg);

/// sum_i mu_i / (mu_i + lambda)
double effective_dimension(const EigenDecay& decay, double lambda);

struct PredictionError {
    double monte_carlo = 0.0;  // mean over draws of sum_j rho_j^{-(1-gamma')} ((A_hat - A0) u)_j^2
    double std_error = 0.0;
    double exact = 0.0;        // closed-form expectation under the input law
    double norm_bound = 0.0;   // bg_norm(A_hat - A0, 0, gamma')^2
};

PredictionError prediction_error_metric(const OperatorMatrix& a_hat, const OperatorMatrix& a0,
                                        const ProblemConfig& cfg, int n_mc, std::uint64_t seed);

}  // namespace mlkol
