#include "mlkol/config.hpp"

#include <algorithm>
#include <cmath>

namespace mlkol {

namespace {

void require_open_unit(double value, const char* field) {
    if (!std::isfinite(value) || value <= 0.0 || value >= 1.0) {
        throw ConfigError(field, "must lie in (0, 1), got " + std::to_string(value));
    }
}

}  // namespace

void ProblemConfig::validate() const {
    require_open_unit(p, "p");
    require_open_unit(q, "q");
    require_open_unit(alpha, "alpha");
    require_open_unit(beta, "beta");
    if (!std::isfinite(beta_prime) || beta_prime <= 0.0 || beta_prime >= beta) {
        throw ConfigError("beta_prime", "must lie in (0, beta), got " + std::to_string(beta_prime));
    }
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma >= 1.0) {
        throw ConfigError("gamma", "must lie in [0, 1), got " + std::to_string(gamma));
    }
    if (!std::isfinite(gamma_prime) || gamma_prime <= gamma || gamma_prime >= 1.0) {
        throw ConfigError("gamma_prime",
                          "must lie in (gamma, 1), got " + std::to_string(gamma_prime));
    }
    if (!std::isfinite(B) || B < 0.0) {
        throw ConfigError("B", "must be a finite non-negative bound");
    }
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw ConfigError("sigma", "must be finite and >= 0");
    }
    if (!std::isfinite(c0) || c0 <= 0.0) {
        throw ConfigError("c0", "must be finite and > 0");
    }
    if (d_in < 1) throw ConfigError("d_in", "must be >= 1");
    if (d_out < 1) throw ConfigError("d_out", "must be >= 1");
}

double input_rate_denominator(const ProblemConfig& cfg) {
    return std::max(cfg.alpha, cfg.beta + cfg.p);
}

double variance_exponent(const ProblemConfig& cfg) {
    return cfg.beta_prime + std::max(cfg.alpha - cfg.beta, cfg.p);
}

double input_rate(const ProblemConfig& cfg) {
    return (cfg.beta - cfg.beta_prime) / input_rate_denominator(cfg);
}

double output_rate(const ProblemConfig& cfg) {
    return (cfg.gamma_prime - cfg.gamma) / (1.0 - cfg.gamma);
}

TheoreticalRate theoretical_rate(const ProblemConfig& cfg) {
    TheoreticalRate r;
    r.eta1 = std::min(input_rate(cfg), output_rate(cfg));
    r.eta2 = 1.0 - r.eta1;
    r.u = variance_exponent(cfg) / (cfg.beta - cfg.beta_prime) *
          (cfg.gamma_prime - cfg.gamma) / (1.0 - cfg.gamma_prime);
    return r;
}

}  // namespace mlkol
