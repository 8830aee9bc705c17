#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mlkol/random.hpp"
#include "mlkol/spectral.hpp"
#include "mlkol/synth.hpp"

using namespace mlkol;

namespace {

ProblemConfig small_config() {
    ProblemConfig c;
    c.alpha = 0.4;
    c.gamma = 0.0;
    c.gamma_prime = 0.5;
    c.d_in = 12;
    c.d_out = 9;
    c.seed = 42;
    return c;
}

}  // namespace

TEST(Random, DeriveSeedSeparatesStreams) {
    EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
    EXPECT_NE(trial_seed(5, 1024, 0), trial_seed(5, 1024, 1));
    EXPECT_NE(trial_seed(5, 1024, 0), trial_seed(5, 2048, 0));
}

TEST(Random, UniformStaysInRange) {
    Rng rng(99);
    for (int k = 0; k < 10000; ++k) {
        const double x = rng.uniform();
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
    }
}

TEST(SampleInputs, BoundedByUniformHalfWidth) {
    const auto in = make_decay(20, 0.5);
    const auto u = sample_inputs(2000, in, 1);
    for (int k = 0; k < u.rows(); ++k) {
        for (int i = 0; i < u.cols(); ++i) {
            ASSERT_LE(std::abs(u(k, i)) / std::sqrt(in[i]), 1.7320509);
        }
    }
}

TEST(SampleInputs, UnitSecondMomentOnFirstCoordinate) {
    const auto u = sample_inputs(100000, make_decay(3, 0.5), 2);
    const double m2 = u.col(0).squaredNorm() / u.rows();
    EXPECT_GE(m2, 0.98);
    EXPECT_LE(m2, 1.02);
}

TEST(SampleInputs, SecondMomentsTrackEigenvalues) {
    const auto in = make_decay(5, 0.5);
    const auto u = sample_inputs(100000, in, 3);
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(u.col(i).squaredNorm() / u.rows() / in[i], 1.0, 0.02);
    }
}

TEST(SampleInputs, DeterministicPerSeed) {
    const auto in = make_decay(7, 0.4);
    EXPECT_EQ(sample_inputs(50, in, 77), sample_inputs(50, in, 77));
    EXPECT_NE(sample_inputs(50, in, 77), sample_inputs(50, in, 78));
}

TEST(SampleInputs, EmbeddingBoundHolds) {
    // alpha > p: sum_i mu_i^{alpha-1} u_i^2 <= 3 sum_i i^{-alpha/p}.
    const double p = 0.3;
    const double alpha = 0.6;
    const auto in = make_decay(40, p);
    double bound = 0.0;
    for (int i = 1; i <= 40; ++i) bound += std::pow(i, -alpha / p);
    bound *= 3.0;
    const auto u = sample_inputs(5000, in, 5);
    const Eigen::VectorXd w = in.pow(alpha - 1.0);
    for (int k = 0; k < u.rows(); ++k) {
        ASSERT_LE(u.row(k).array().square().matrix().dot(w), bound);
    }
}

TEST(SampleNoise, ZeroSigmaGivesZero) {
    const NoiseProfile profile{NoiseKind::polynomial, 0.0};
    EXPECT_EQ(sample_noise(10, make_decay(4, 0.5), profile, 1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleNoise, BaselNormalizedVariances) {
    const NoiseProfile profile{NoiseKind::polynomial, 1.0};
    const auto var = profile.variances(1000);
    EXPECT_NEAR(var[0], 6.0 / (std::numbers::pi * std::numbers::pi), 1e-15);
    EXPECT_NEAR(var[0], 0.60793, 1e-5);
    EXPECT_LE(var.sum(), 1.0);
    EXPECT_GT(var.sum(), 0.999);
}

TEST(SampleNoise, EmpiricalVariancesMatchProfile) {
    const NoiseProfile profile{NoiseKind::polynomial, 0.5};
    const auto eps = sample_noise(100000, make_decay(4, 0.5), profile, 9);
    const auto var = profile.variances(4);
    for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(eps.col(j).squaredNorm() / eps.rows() / var[j], 1.0, 0.02);
    }
}

TEST(MakeDataset, NoiselessIsLinearModel) {
    const auto truth = random_source_operator(small_config(), 1);
    const auto data = make_dataset(truth.op, 64, NoiseProfile{NoiseKind::polynomial, 0.0}, 11);
    for (int k = 0; k < data.n(); ++k) {
        const Eigen::VectorXd expected = truth.op.m * data.u.row(k).transpose();
        EXPECT_LE((data.v.row(k).transpose() - expected).norm(), 1e-14 * expected.norm());
    }
}

TEST(MakeDataset, ZeroOperatorNoNoiseGivesZero) {
    const OperatorMatrix zero(Eigen::MatrixXd::Zero(3, 4), make_decay(4, 0.5), make_decay(3, 0.5));
    const auto data = make_dataset(zero, 20, NoiseProfile{NoiseKind::polynomial, 0.0}, 1);
    EXPECT_EQ(data.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MakeDataset, IdentityOperatorCopiesInputs) {
    const OperatorMatrix id(Eigen::MatrixXd::Identity(5, 5), make_decay(5, 0.5), make_decay(5, 0.5));
    const auto data = make_dataset(id, 30, NoiseProfile{NoiseKind::polynomial, 0.0}, 2);
    EXPECT_EQ(data.u, data.v);
}

TEST(MakeDataset, DeterministicAndSeedRecorded) {
    const auto truth = random_source_operator(small_config(), 1);
    const NoiseProfile noise{NoiseKind::polynomial, 0.1};
    const auto a = make_dataset(truth.op, 40, noise, 123);
    const auto b = make_dataset(truth.op, 40, noise, 123);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.seed_used, 123u);
}

TEST(RandomSource, FrobeniusNormEqualsB) {
    auto cfg = small_config();
    cfg.B = 2.5;
    const auto truth = random_source_operator(cfg, 8);
    EXPECT_NEAR(truth.source.a.norm(), 2.5, 2.5e-12);
    EXPECT_NEAR(bg_norm(truth.op, cfg.beta, cfg.gamma), 2.5, 2.5e-10);
}

TEST(RandomSource, ZeroBGivesZeroOperator) {
    auto cfg = small_config();
    cfg.B = 0.0;
    const auto truth = random_source_operator(cfg, 8);
    EXPECT_EQ(truth.op.m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RandomSource, TaperedMagnitudesAndDeterminism) {
    const auto cfg = small_config();
    const auto a = random_source_operator(cfg, 8, 0.75);
    const auto b = random_source_operator(cfg, 8, 0.75);
    EXPECT_EQ(a.source.a, b.source.a);
    const double c = std::abs(a.source.a(0, 0));
    EXPECT_NEAR(std::abs(a.source.a(2, 3)), c * std::pow(3.0, -0.75) * std::pow(4.0, -0.75), 1e-15);
    EXPECT_NE(random_source_operator(cfg, 9).source.a, a.source.a);
}

TEST(Laplacian, IdentitySymbol) {
    const auto inst = laplacian_operator(1.0, 0.5, 0, 6, 6, 1.0, 0.0, 1.0);
    for (int n = 0; n < 6; ++n) {
        const double a = inst.source.a(n, n);
        // a_nn = d_n mu_n^{-beta/2} rho_n^{-(1-gamma/2)} with beta = 0, gamma = 1.
        EXPECT_NEAR(a, std::pow(inst.op.output[n], -0.5), 1e-12 * a);
    }
    EXPECT_TRUE(inst.finite_source);
}

TEST(Laplacian, SymbolForT1) {
    const auto inst = laplacian_operator(1.0, 1.0, 1, 3, 3, 1.0, 0.0, 0.0);
    const double d2 = inst.source.a(1, 1) * std::pow(inst.op.input[1], 0.0) *
                      std::pow(inst.op.output[1], 1.0);
    EXPECT_NEAR(d2, 4.0 * std::numbers::pi * std::numbers::pi, 1e-10);
    EXPECT_NEAR(d2, 39.478, 1e-3);
}

TEST(Laplacian, DimensionMismatchThrows) {
    EXPECT_THROW(laplacian_operator(1.0, 0.5, 0, 4, 5, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST(Laplacian, FiniteSourceCondition) {
    EXPECT_FALSE(laplacian_operator(1.0, 1.0, 0, 3, 3, 1.0, 0.5, 0.0).finite_source);
}

TEST(Packing, ZeroOmegaGivesZero) {
    const PackingSpec spec{2, 1, 3, 0.1};
    const auto op = packing_operator(spec, Eigen::MatrixXi::Zero(2, 3), make_decay(4, 0.5),
                                     make_decay(4, 0.5), 0.1, 0.5);
    EXPECT_EQ(op.m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Packing, SingleEntryHandValue) {
    // m1 = K = 1, m2 = 1: the entry lands at (row 2, col 2) with
    // mu_2 = rho_2 = 0.25, so value = 0.25^{-1/2} * 0.25^{1/4} = sqrt(2).
    const PackingSpec spec{1, 1, 1, 1.0 / 32.0};
    const auto op = packing_operator(spec, Eigen::MatrixXi::Ones(1, 1), make_decay(2, 0.5),
                                     make_decay(2, 0.5), 0.0, 0.5);
    EXPECT_NEAR(op.m(1, 1), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(op.m(0, 0), 0.0);
    EXPECT_EQ(op.m(0, 1), 0.0);
    EXPECT_EQ(op.m(1, 0), 0.0);
}

TEST(Packing, SeparationIdentity) {
    const PackingSpec spec{4, 2, 5, 0.01};
    const auto in = make_decay(10, 0.4);
    const auto out = make_decay(9, 0.6);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto w1 = random_omega(4, 5, 2 * s);
        const auto w2 = random_omega(4, 5, 2 * s + 1);
        const auto d = packing_operator(spec, w1, in, out, 0.2, 0.7) -
                       packing_operator(spec, w2, in, out, 0.2, 0.7);
        const double want = 32.0 * 0.01 / 20.0 * (w1 - w2).cast<double>().squaredNorm();
        const double got = std::pow(bg_norm(d, 0.2, 0.7), 2);
        EXPECT_NEAR(got, want, 1e-12 * std::max(want, 1e-300));
    }
}

TEST(Packing, OutOfRangeBlockThrows) {
    const PackingSpec spec{3, 2, 3, 0.1};
    EXPECT_THROW(packing_operator(spec, Eigen::MatrixXi::Zero(3, 3), make_decay(5, 0.5),
                                  make_decay(8, 0.5), 0.1, 0.5),
                 std::out_of_range);
    EXPECT_THROW(packing_operator(spec, Eigen::MatrixXi::Zero(3, 3), make_decay(6, 0.5),
                                  make_decay(4, 0.5), 0.1, 0.5),
                 std::out_of_range);
}

TEST(Packing, RejectsNonBinaryOmega) {
    const PackingSpec spec{1, 0, 1, 0.1};
    EXPECT_THROW(packing_operator(spec, Eigen::MatrixXi::Constant(1, 1, 2), make_decay(2, 0.5),
                                  make_decay(2, 0.5), 0.1, 0.5),
                 std::invalid_argument);
}
