#include <cmath>

#include <gtest/gtest.h>

#include "mlkol/config.hpp"
#include "mlkol/random.hpp"
#include "mlkol/spectral.hpp"

using namespace mlkol;

namespace {

ProblemConfig config_a() {
    ProblemConfig c;
    c.p = 0.5;
    c.q = 0.5;
    c.alpha = 0.5;
    c.beta = 0.9;
    c.beta_prime = 0.1;
    c.gamma = 0.1;
    c.gamma_prime = 0.9;
    return c;
}

ProblemConfig config_b() {
    ProblemConfig c;
    c.alpha = 0.4;
    c.gamma = 0.0;
    c.gamma_prime = 0.5;
    c.d_in = 256;
    c.d_out = 512;
    return c;
}

OperatorMatrix random_operator(Rng& rng, int d_out, int d_in) {
    Eigen::MatrixXd m(d_out, d_in);
    for (int j = 0; j < d_out; ++j) {
        for (int i = 0; i < d_in; ++i) m(j, i) = rng.symmetric(2.0);
    }
    return OperatorMatrix(m, EigenDecay(d_in, 0.2 + 0.7 * rng.uniform()),
                          EigenDecay(d_out, 0.2 + 0.7 * rng.uniform()));
}

}  // namespace

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(ProblemConfig{}.validate()); }

TEST(Config, ValidationNamesField) {
    const auto expect_field = [](ProblemConfig c, const std::string& field) {
        try {
            c.validate();
            FAIL() << "expected ConfigError for " << field;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.field(), field);
        }
    };
    auto c = config_a();
    c.p = 1.0;
    expect_field(c, "p");
    c = config_a();
    c.q = 0.0;
    expect_field(c, "q");
    c = config_a();
    c.alpha = 1.2;
    expect_field(c, "alpha");
    c = config_a();
    c.beta_prime = c.beta;
    expect_field(c, "beta_prime");
    c = config_a();
    c.gamma_prime = c.gamma;
    expect_field(c, "gamma_prime");
    c = config_a();
    c.sigma = -1.0;
    expect_field(c, "sigma");
    c = config_a();
    c.c0 = 0.0;
    expect_field(c, "c0");
    c = config_a();
    c.d_out = 0;
    expect_field(c, "d_out");
}

TEST(TheoreticalRate, OutputLimitedConfig) {
    const auto r = theoretical_rate(config_b());
    EXPECT_DOUBLE_EQ(r.eta1, 0.5);
    EXPECT_NEAR(input_rate(config_b()), 4.0 / 7.0, 1e-15);
    EXPECT_NEAR(r.u, 0.75, 1e-15);
}

TEST(TheoreticalRate, InputLimitedConfig) {
    const auto r = theoretical_rate(config_a());
    EXPECT_NEAR(r.eta1, 4.0 / 7.0, 1e-15);
    EXPECT_NEAR(r.u, 6.0, 1e-12);
}

TEST(TheoreticalRate, VanishesAsBetaPrimeApproachesBeta) {
    auto c = config_a();
    c.beta_prime = c.beta - 1e-9;
    EXPECT_LT(theoretical_rate(c).eta1, 1e-8);
}

TEST(TheoreticalRate, EtasSumToOneOnRandomConfigs) {
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        ProblemConfig c;
        c.p = 0.05 + 0.9 * rng.uniform();
        c.q = 0.05 + 0.9 * rng.uniform();
        c.alpha = 0.05 + 0.9 * rng.uniform();
        c.beta = 0.1 + 0.85 * rng.uniform();
        c.beta_prime = c.beta * (0.05 + 0.9 * rng.uniform());
        c.gamma = 0.5 * rng.uniform();
        c.gamma_prime = c.gamma + (1.0 - c.gamma) * (0.05 + 0.9 * rng.uniform());
        const auto r = theoretical_rate(c);
        EXPECT_EQ(r.eta1 + r.eta2, 1.0);
        EXPECT_GT(r.eta1, 0.0);
        EXPECT_LT(r.eta1, 1.0);
    }
}

TEST(TheoreticalRate, HardRegimeUsesAlphaInVarianceExponent) {
    auto c = config_a();
    c.alpha = 0.95;
    c.beta = 0.3;
    c.beta_prime = 0.1;
    c.p = 0.2;
    EXPECT_NEAR(variance_exponent(c), 0.1 + 0.65, 1e-15);
    EXPECT_NEAR(input_rate_denominator(c), 0.95, 1e-15);
}

TEST(EigenDecay, HandValues) {
    const auto d = make_decay(3, 0.5);
    ASSERT_EQ(d.size(), 3);
    EXPECT_EQ(d[0], 1.0);
    EXPECT_DOUBLE_EQ(d[1], 0.25);
    EXPECT_DOUBLE_EQ(d[2], 1.0 / 9.0);
    EXPECT_EQ(make_decay(1, 0.9)[0], 1.0);
    EXPECT_DOUBLE_EQ(make_decay(2, 0.25)[1], 0.0625);
}

TEST(EigenDecay, StrictlyDecreasingFromOne) {
    const auto d = make_decay(500, 0.37);
    EXPECT_EQ(d[0], 1.0);
    for (int i = 1; i < d.size(); ++i) EXPECT_LT(d[i], d[i - 1]);
}

TEST(EigenDecay, RejectsBadArguments) {
    EXPECT_THROW(make_decay(0, 0.5), std::invalid_argument);
    EXPECT_THROW(make_decay(3, 1.0), std::invalid_argument);
    EXPECT_THROW(make_decay(3, 0.0), std::invalid_argument);
}

TEST(OperatorFromSource, ZeroSourceGivesZero) {
    SourceCoefficients src{Eigen::MatrixXd::Zero(3, 4), 0.5, 0.5};
    const auto op = operator_from_source(src, make_decay(4, 0.5), make_decay(3, 0.5));
    EXPECT_EQ(op.m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(OperatorFromSource, WeightFormula) {
    // mu_2 = 0.25 (p = 0.5), rho_2 = 0.5 (q = 1): place the entry at (2, 2).
    SourceCoefficients src{Eigen::MatrixXd::Zero(2, 2), 0.5, 0.5};
    src.a(1, 1) = 1.0;
    const EigenDecay in(2, 0.5);
    const EigenDecay out(2, 1.0);
    ASSERT_DOUBLE_EQ(out[1], 0.5);
    const auto op = operator_from_source(src, in, out);
    EXPECT_NEAR(op.m(1, 1), std::pow(2.0, 0.25), 1e-14);
    EXPECT_NEAR(op.m(1, 1), 1.18921, 1e-5);
}

TEST(OperatorFromSource, UnitWeightsLeaveCoefficients) {
    SourceCoefficients src{Eigen::MatrixXd::Constant(1, 1, 7.0), 1.0, 1.0};
    const auto op = operator_from_source(src, make_decay(1, 0.5), make_decay(1, 0.5));
    EXPECT_EQ(op.m(0, 0), 7.0);
}

TEST(OperatorFromSource, DimensionMismatchThrows) {
    SourceCoefficients src{Eigen::MatrixXd::Zero(3, 4), 0.5, 0.5};
    EXPECT_THROW(operator_from_source(src, make_decay(3, 0.5), make_decay(3, 0.5)),
                 std::invalid_argument);
}

TEST(OperatorFromSource, RoundTripThroughSource) {
    Rng rng(3);
    const auto op = random_operator(rng, 6, 9);
    const auto src = source_from_operator(op, 0.7, 0.2);
    const auto back = operator_from_source(src, op.input, op.output);
    EXPECT_LE((back.m - op.m).norm(), 1e-13 * op.m.norm());
}

TEST(BgNorm, SingleEntryHandValue) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 1);
    m(1, 0) = 2.0;
    const OperatorMatrix op(m, make_decay(1, 0.5), make_decay(2, 0.5));
    EXPECT_NEAR(bg_norm(op, 0.0, 0.5), std::sqrt(8.0), 1e-14);
    EXPECT_NEAR(bg_norm(op, 0.0, 0.5), 2.82843, 1e-5);
}

TEST(BgNorm, SourceNormRecovery345) {
    SourceCoefficients src{Eigen::MatrixXd::Zero(2, 2), 0.6, 0.3};
    src.a(0, 0) = 3.0;
    src.a(0, 1) = 4.0;
    const auto op = operator_from_source(src, make_decay(2, 0.5), make_decay(2, 0.4));
    EXPECT_NEAR(bg_norm(op, 0.6, 0.3), 5.0, 1e-14);
}

TEST(BgNorm, ZeroOperator) {
    const OperatorMatrix op(Eigen::MatrixXd::Zero(4, 3), make_decay(3, 0.5), make_decay(4, 0.5));
    EXPECT_EQ(bg_norm(op, 0.2, 0.4), 0.0);
    EXPECT_EQ(bg_norm_via_embedding(op, 0.2, 0.4), 0.0);
}

TEST(BgNorm, UnitExponentsGiveFrobenius) {
    Rng rng(11);
    const auto op = random_operator(rng, 5, 7);
    EXPECT_NEAR(bg_norm(op, 1.0, 1.0), op.m.norm(), 1e-13 * op.m.norm());
    EXPECT_NEAR(bg_norm_via_embedding(op, 1.0, 1.0), op.m.norm(), 1e-13 * op.m.norm());
}

TEST(BgNorm, EmbeddingRouteMatchesOnRandom8x8) {
    Rng rng(19);
    for (int k = 0; k < 20; ++k) {
        const auto op = random_operator(rng, 8, 8);
        const double b = rng.symmetric(1.0);
        const double g = rng.symmetric(1.0);
        const double direct = bg_norm(op, b, g);
        EXPECT_LE(std::abs(bg_norm_via_embedding(op, b, g) - direct), 1e-12 * direct);
    }
}

TEST(BgNorm, AbsolutelyHomogeneous) {
    Rng rng(23);
    const auto op = random_operator(rng, 6, 5);
    const double base = bg_norm(op, 0.3, 0.6);
    for (double c : {-3.5, -1.0, 0.0, 0.25, 12.0}) {
        EXPECT_NEAR(bg_norm(c * op, 0.3, 0.6), std::abs(c) * base, 1e-14 * (1.0 + std::abs(c)) * base);
    }
}

TEST(BgNorm, SourceRoundTripOnRandomCoefficients) {
    Rng rng(29);
    for (int k = 0; k < 50; ++k) {
        const int d_in = 1 + static_cast<int>(rng.next() % 32);
        const int d_out = 1 + static_cast<int>(rng.next() % 32);
        SourceCoefficients src{Eigen::MatrixXd(d_out, d_in), 0.9 * rng.uniform(), 0.9 * rng.uniform()};
        for (int j = 0; j < d_out; ++j) {
            for (int i = 0; i < d_in; ++i) src.a(j, i) = rng.symmetric(1.0);
        }
        const auto op = operator_from_source(src, EigenDecay(d_in, 0.3), EigenDecay(d_out, 0.6));
        EXPECT_NEAR(bg_norm(op, src.beta, src.gamma), src.a.norm(), 1e-12 * src.a.norm());
    }
}

TEST(OperatorMatrix, ArithmeticChecksDecays) {
    Rng rng(31);
    const auto a = random_operator(rng, 3, 3);
    const auto b = random_operator(rng, 3, 4);
    EXPECT_THROW(a - b, std::invalid_argument);
    const auto d = a - a;
    EXPECT_EQ(d.m.cwiseAbs().maxCoeff(), 0.0);
}
