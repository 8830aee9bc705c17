#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "mlkol/config.hpp"
#include "mlkol/spectral.hpp"

namespace mlkol {

/// N samples of the model v = A0 u + eps, both sides in orthonormal
/// coordinates. Row k is sample k.
struct SampleSet {
    Eigen::MatrixXd u;  // N x d_in
    Eigen::MatrixXd v;  // N x d_out
    std::uint64_t seed_used = 0;

    int n() const { return static_cast<int>(u.rows()); }
};

enum class NoiseKind { polynomial };

/// Output noise with coordinate variances sigma^2 * (6 / pi^2) * j^{-2}, so
/// the full trace is sigma^2 and any truncation stays below it.
struct NoiseProfile {
    NoiseKind kind = NoiseKind::polynomial;
    double sigma = 0.0;

    Eigen::VectorXd variances(int dim) const;
};

/// Half-width of the unit-variance uniform law used for all draws.
inline constexpr double kUniformHalfWidth = 1.7320508075688772;  // sqrt(3)

/// u[k][i] = sqrt(mu_i) * xi, xi ~ U[-sqrt 3, sqrt 3].
Eigen::MatrixXd sample_inputs(int n, const EigenDecay& in, std::uint64_t seed);

/// eps[k][j] = sigma_j * eta, eta ~ U[-sqrt 3, sqrt 3].
Eigen::MatrixXd sample_noise(int n, const EigenDecay& out, const NoiseProfile& profile,
                             std::uint64_t seed);

/// Inputs and noise are drawn from decorrelated sub-seeds of `seed`.
SampleSet make_dataset(const OperatorMatrix& a0, int n, const NoiseProfile& profile,
                       std::uint64_t seed);

struct GroundTruth {
    SourceCoefficients source;
    OperatorMatrix op;
};

/// Random-sign coefficients with polynomial taper i^{-taper} j^{-taper},
/// rescaled so the Frobenius norm (equivalently the (beta, gamma)-norm of the
/// operator) is exactly cfg.B.
GroundTruth random_source_operator(const ProblemConfig& cfg, std::uint64_t seed,
                                   double taper = 0.75);

struct LaplacianInstance {
    SourceCoefficients source;
    OperatorMatrix op;
    /// Whether the untruncated coefficient sequence is square-summable,
    /// i.e. (1 - gamma) m < (1 - beta) s - 1/2.
    bool finite_source = false;
};

/// Diagonal operator d_n = scale * (pi n)^{2t} between spaces with
/// eigenvalues mu_n = n^{-2s} and rho_n = n^{-2m}. Source coefficients are
/// reported for the caller's (beta, gamma).
LaplacianInstance laplacian_operator(double s, double m, int t, int d_in, int d_out, double scale,
                                     double beta, double gamma);

struct PackingSpec {
    int m1 = 1;
    int m2 = 0;
    int K = 1;
    double eps = 1.0;
};

/// Sign-pattern operator of the packing family: for omega (m1 x K, entries
/// 0/1) the coordinate at output row j + m2, input column i + m1 (1-based)
/// is sqrt(32 eps / (m1 K)) omega_ij mu^{(beta'-1)/2} rho^{(1-gamma')/2}.
OperatorMatrix packing_operator(const PackingSpec& spec, const Eigen::MatrixXi& omega,
                                const EigenDecay& in, const EigenDecay& out, double beta_prime,
                                double gamma_prime);

Eigen::MatrixXi random_omega(int m1, int K, std::uint64_t seed);

}  // namespace mlkol
