#include "mlkol/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mlkol/random.hpp"

namespace mlkol {

namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

Eigen::VectorXd NoiseProfile::variances(int dim) const {
    Eigen::VectorXd var(dim);
    const double scale = sigma * sigma * 6.0 / (std::numbers::pi * std::numbers::pi);
    for (int j = 0; j < dim; ++j) {
        const double idx = j + 1.0;
        var[j] = scale / (idx * idx);
    }
    return var;
}

Eigen::MatrixXd sample_inputs(int n, const EigenDecay& in, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_inputs: n must be >= 1");
    const Eigen::VectorXd scale = in.pow(0.5);
    Rng rng(seed);
    Eigen::MatrixXd u(n, in.size());
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < in.size(); ++i) {
            u(k, i) = scale[i] * rng.symmetric(kUniformHalfWidth);
        }
    }
    return u;
}

Eigen::MatrixXd sample_noise(int n, const EigenDecay& out, const NoiseProfile& profile,
                             std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_noise: n must be >= 1");
    if (!(profile.sigma >= 0.0)) throw std::invalid_argument("sample_noise: sigma must be >= 0");
    Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(n, out.size());
    if (profile.sigma == 0.0) return eps;
    const Eigen::VectorXd sd = profile.variances(out.size()).cwiseSqrt();
    Rng rng(seed);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < out.size(); ++j) {
            eps(k, j) = sd[j] * rng.symmetric(kUniformHalfWidth);
        }
    }
    return eps;
}

SampleSet make_dataset(const OperatorMatrix& a0, int n, const NoiseProfile& profile,
                       std::uint64_t seed) {
    SampleSet data;
    data.seed_used = seed;
    data.u = sample_inputs(n, a0.input, derive_seed(seed, kInputStream));
    data.v = data.u * a0.m.transpose();
    if (profile.sigma > 0.0) {
        data.v += sample_noise(n, a0.output, profile, derive_seed(seed, kNoiseStream));
    }
    return data;
}

GroundTruth random_source_operator(const ProblemConfig& cfg, std::uint64_t seed, double taper) {
    cfg.validate();
    const EigenDecay in = input_decay(cfg);
    const EigenDecay out = output_decay(cfg);
    Rng rng(seed);
    Eigen::MatrixXd a(cfg.d_out, cfg.d_in);
    for (int j = 0; j < cfg.d_out; ++j) {
        const double wj = std::pow(j + 1.0, -taper);
        for (int i = 0; i < cfg.d_in; ++i) {
            a(j, i) = rng.sign() * std::pow(i + 1.0, -taper) * wj;
        }
    }
    if (cfg.B == 0.0) {
        a.setZero();
    } else {
        a *= cfg.B / a.norm();
    }
    SourceCoefficients src{std::move(a), cfg.beta, cfg.gamma};
    OperatorMatrix op = operator_from_source(src, in, out);
    return {std::move(src), std::move(op)};
}

LaplacianInstance laplacian_operator(double s, double m, int t, int d_in, int d_out, double scale,
                                     double beta, double gamma) {
    if (!(s > 0.0) || !(m > 0.0)) {
        throw std::invalid_argument("laplacian_operator: s and m must be positive");
    }
    if (d_in < 1 || d_out < 1) throw std::invalid_argument("laplacian_operator: dims must be >= 1");
    if (d_in != d_out) {
        throw std::invalid_argument("laplacian_operator: diagonal operator needs d_in == d_out, got " +
                                    std::to_string(d_in) + " and " + std::to_string(d_out));
    }
    const EigenDecay in(d_in, 1.0 / (2.0 * s));
    const EigenDecay out(d_out, 1.0 / (2.0 * m));

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d_out, d_in);
    for (int n = 0; n < d_in; ++n) {
        const double symbol = scale * std::pow(std::numbers::pi * (n + 1.0), 2.0 * t);
        a(n, n) = symbol * std::pow(in[n], -beta / 2.0) * std::pow(out[n], -(1.0 - gamma / 2.0));
    }
    LaplacianInstance inst;
    inst.source = SourceCoefficients{std::move(a), beta, gamma};
    inst.op = operator_from_source(inst.source, in, out);
    inst.finite_source = (1.0 - gamma) * m < (1.0 - beta) * s - 0.5;
    return inst;
}

OperatorMatrix packing_operator(const PackingSpec& spec, const Eigen::MatrixXi& omega,
                                const EigenDecay& in, const EigenDecay& out, double beta_prime,
                                double gamma_prime) {
    if (spec.m1 < 1 || spec.K < 1 || spec.m2 < 0 || !(spec.eps > 0.0)) {
        throw std::invalid_argument("packing_operator: need m1 >= 1, K >= 1, m2 >= 0, eps > 0");
    }
    if (omega.rows() != spec.m1 || omega.cols() != spec.K) {
        throw std::invalid_argument("packing_operator: omega must be m1 x K");
    }
    if (2 * spec.m1 > in.size() || spec.K + spec.m2 > out.size()) {
        throw std::out_of_range("packing_operator: block [" + std::to_string(spec.m1 + 1) + ", " +
                                std::to_string(2 * spec.m1) + "] x [" +
                                std::to_string(spec.m2 + 1) + ", " +
                                std::to_string(spec.m2 + spec.K) + "] exceeds the " +
                                std::to_string(in.size()) + " x " + std::to_string(out.size()) +
                                " grid");
    }
    const double amp = std::sqrt(32.0 * spec.eps / (spec.m1 * static_cast<double>(spec.K)));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out.size(), in.size());
    for (int i = 0; i < spec.m1; ++i) {
        const int col = i + spec.m1;
        const double wi = std::pow(in[col], (beta_prime - 1.0) / 2.0);
        for (int j = 0; j < spec.K; ++j) {
            const int v = omega(i, j);
            if (v != 0 && v != 1) throw std::invalid_argument("packing_operator: omega must be 0/1");
            const int row = j + spec.m2;
            m(row, col) = amp * v * wi * std::pow(out[row], (1.0 - gamma_prime) / 2.0);
        }
    }
    return OperatorMatrix(std::move(m), in, out);
}

Eigen::MatrixXi random_omega(int m1, int K, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXi omega(m1, K);
    for (int i = 0; i < m1; ++i) {
        for (int j = 0; j < K; ++j) omega(i, j) = static_cast<int>(rng.next() >> 63);
    }
    return omega;
}

}  // namespace mlkol
