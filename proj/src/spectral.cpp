#include "mlkol/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mlkol {

EigenDecay::EigenDecay(int dim, double exponent) : exponent_(exponent) {
    if (dim < 1) throw std::invalid_argument("decay dimension must be >= 1");
    if (!(exponent > 0.0) || !std::isfinite(exponent)) {
        throw std::invalid_argument("decay exponent must be positive");
    }
    values_.resize(dim);
    const double power = -1.0 / exponent;
    for (int i = 0; i < dim; ++i) {
        values_[i] = std::pow(static_cast<double>(i + 1), power);
    }
}

Eigen::VectorXd EigenDecay::pow(double power) const {
    return values_.array().pow(power).matrix();
}

EigenDecay make_decay(int dim, double exponent) {
    if (dim < 1) {
        throw std::invalid_argument("make_decay: dim must be >= 1, got " + std::to_string(dim));
    }
    if (!(exponent > 0.0 && exponent < 1.0)) {
        throw std::invalid_argument("make_decay: exponent must lie in (0, 1), got " +
                                    std::to_string(exponent));
    }
    return EigenDecay(dim, exponent);
}

EigenDecay input_decay(const ProblemConfig& cfg) { return make_decay(cfg.d_in, cfg.p); }
EigenDecay output_decay(const ProblemConfig& cfg) { return make_decay(cfg.d_out, cfg.q); }

OperatorMatrix::OperatorMatrix(Eigen::MatrixXd coords, EigenDecay in, EigenDecay out)
    : m(std::move(coords)), input(std::move(in)), output(std::move(out)) {
    if (m.cols() != input.size() || m.rows() != output.size()) {
        throw std::invalid_argument("OperatorMatrix: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " coordinates do not match decays " +
                                    std::to_string(output.size()) + "x" +
                                    std::to_string(input.size()));
    }
}

OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    if (lhs.m.rows() != rhs.m.rows() || lhs.m.cols() != rhs.m.cols()) {
        throw std::invalid_argument("operator difference: dimension mismatch");
    }
    return OperatorMatrix(lhs.m - rhs.m, lhs.input, lhs.output);
}

OperatorMatrix operator*(double c, const OperatorMatrix& op) {
    return OperatorMatrix(c * op.m, op.input, op.output);
}

OperatorMatrix operator_from_source(const SourceCoefficients& src, const EigenDecay& in,
                                    const EigenDecay& out) {
    if (src.a.cols() != in.size() || src.a.rows() != out.size()) {
        throw std::invalid_argument("operator_from_source: coefficient matrix is " +
                                    std::to_string(src.a.rows()) + "x" +
                                    std::to_string(src.a.cols()) + ", decays are " +
                                    std::to_string(out.size()) + "x" + std::to_string(in.size()));
    }
    const Eigen::VectorXd col_w = in.pow((src.beta - 1.0) / 2.0);
    const Eigen::VectorXd row_w = out.pow((1.0 - src.gamma) / 2.0);
    Eigen::MatrixXd m = row_w.asDiagonal() * src.a * col_w.asDiagonal();
    return OperatorMatrix(std::move(m), in, out);
}

SourceCoefficients source_from_operator(const OperatorMatrix& op, double beta, double gamma) {
    const Eigen::VectorXd col_w = op.input.pow((1.0 - beta) / 2.0);
    const Eigen::VectorXd row_w = op.output.pow(-(1.0 - gamma) / 2.0);
    return {row_w.asDiagonal() * op.m * col_w.asDiagonal(), beta, gamma};
}

double bg_norm(const OperatorMatrix& op, double b, double g) {
    const Eigen::VectorXd col_w = op.input.pow(1.0 - b);
    const Eigen::VectorXd row_w = op.output.pow(-(1.0 - g));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < op.m.cols(); ++i) {
        for (Eigen::Index j = 0; j < op.m.rows(); ++j) {
            const double v = op.m(j, i);
            sum += col_w[i] * row_w[j] * v * v;
        }
    }
    return std::sqrt(sum);
}

double bg_norm_via_embedding(const OperatorMatrix& op, double b, double g) {
    // C_K^{(1-b)/2} acts on the input side, C_L^{-(1-g)/2} on the output side.
    Eigen::MatrixXd embedded = op.m * op.input.pow((1.0 - b) / 2.0).asDiagonal();
    embedded = op.output.pow(-(1.0 - g) / 2.0).asDiagonal() * embedded;
    return embedded.norm();
}

}  // namespace mlkol
