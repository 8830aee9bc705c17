#pragma once

#include <Eigen/Dense>

#include "mlkol/config.hpp"

namespace mlkol {

/// Power-law eigenvalue sequence values[i] = (i + 1)^{-1/exponent}.
class EigenDecay {
public:
    EigenDecay() = default;

    /// Builds the sequence for any positive exponent. `make_decay` is the
    /// checked entry point for capacity exponents in (0, 1).
    EigenDecay(int dim, double exponent);

    int size() const { return static_cast<int>(values_.size()); }
    double exponent() const { return exponent_; }
    const Eigen::VectorXd& values() const { return values_; }
    double operator[](int i) const { return values_[i]; }

    /// values^power, element-wise.
    Eigen::VectorXd pow(double power) const;

private:
    Eigen::VectorXd values_;
    double exponent_ = 1.0;
};

EigenDecay make_decay(int dim, double exponent);

EigenDecay input_decay(const ProblemConfig& cfg);
EigenDecay output_decay(const ProblemConfig& cfg);

/// Source-condition coefficients a (rows: output index j, columns: input
/// index i) of an operator with bounded (beta, gamma)-norm.
struct SourceCoefficients {
    Eigen::MatrixXd a;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Operator coordinates <phi'_j, A phi_i> in the orthonormal eigenbases
/// phi_i = mu_i^{1/2} e_i and phi'_j = rho_j^{1/2} f_j.
struct OperatorMatrix {
    Eigen::MatrixXd m;  // d_out x d_in
    EigenDecay input;
    EigenDecay output;

    OperatorMatrix() = default;
    OperatorMatrix(Eigen::MatrixXd coords, EigenDecay in, EigenDecay out);

    int d_in() const { return static_cast<int>(m.cols()); }
    int d_out() const { return static_cast<int>(m.rows()); }
};

/// this - other, on matching decays.
OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(double c, const OperatorMatrix& op);

/// m[j][i] = a[j][i] * mu_i^{(beta-1)/2} * rho_j^{(1-gamma)/2}.
OperatorMatrix operator_from_source(const SourceCoefficients& src, const EigenDecay& in,
                                    const EigenDecay& out);

/// Inverse of operator_from_source for the given (beta, gamma).
SourceCoefficients source_from_operator(const OperatorMatrix& op, double beta, double gamma);

/// (b, g)-norm: sqrt(sum_{j,i} mu_i^{1-b} rho_j^{-(1-g)} m_ji^2).
double bg_norm(const OperatorMatrix& op, double b, double g);

/// Same quantity computed as the Hilbert-Schmidt norm of
/// C_L^{-(1-g)/2} A C_K^{(1-b)/2}: columns rescaled first, then rows.
double bg_norm_via_embedding(const OperatorMatrix& op, double b, double g);

}  // namespace mlkol
