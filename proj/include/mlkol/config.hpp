#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlkol {

/// Raised when a problem configuration violates its invariants. `field()`
/// names the offending key using the JSON spelling.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Exponents, scales and truncation of one synthetic operator-learning
/// problem.
///
/// Input eigenvalues decay as i^{-1/p}, output eigenvalues as j^{-1/q}.
/// The ground truth has bounded (beta, gamma)-norm and errors are measured
/// in the (beta_prime, gamma_prime)-norm.
struct ProblemConfig {
    double p = 0.5;
    double q = 0.5;
    double alpha = 0.5;
    double beta = 0.9;
    double beta_prime = 0.1;
    double gamma = 0.1;
    double gamma_prime = 0.9;
    double B = 1.0;
    double sigma = 0.1;
    double c0 = 1.0;
    int d_in = 64;
    int d_out = 64;
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the first violated field.
    void validate() const;
};

/// Optimal squared-error exponent and the multilevel recursion power.
struct TheoreticalRate {
    double eta1 = 0.0;  // error^2 ~ N^{-eta1}
    double eta2 = 0.0;  // 1 - eta1
    double u = 0.0;
};

TheoreticalRate theoretical_rate(const ProblemConfig& cfg);

/// max{alpha, beta + p}
double input_rate_denominator(const ProblemConfig& cfg);

/// beta' + max{alpha - beta, p}: the variance exponent of lambda. Equals
/// beta' + p outside the hard regime alpha > beta + p.
double variance_exponent(const ProblemConfig& cfg);

/// (beta - beta') / max{alpha, beta + p}
double input_rate(const ProblemConfig& cfg);

/// (gamma' - gamma) / (1 - gamma)
double output_rate(const ProblemConfig& cfg);

}  // namespace mlkol
