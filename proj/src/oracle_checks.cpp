#include "mlkol/oracle_checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mlkol/estimators.hpp"
#include "mlkol/schedules.hpp"
#include "mlkol/spectral.hpp"
#include "mlkol/synth.hpp"

namespace mlkol {

namespace {

using Clock = std::chrono::steady_clock;

double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

CheckResult new_result(std::string name, int cases, double tolerance) {
    CheckResult r;
    r.name = std::move(name);
    r.cases = cases;
    r.tolerance = tolerance;
    return r;
}

CheckResult finish(CheckResult r, Clock::time_point start) {
    r.passed = r.worst <= r.tolerance;
    r.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return r;
}

LambdaMap random_lambda_map(Rng& rng, int d_out) {
    LambdaMap map(d_out);
    for (int j = 0; j < d_out; ++j) {
        if (rng.uniform() < 0.8) map.set(j, std::pow(10.0, uniform_in(rng, -6.0, 1.0)));
    }
    return map;
}

ProblemConfig random_any_problem(Rng& rng, int d_in, int d_out) {
    const double pick = rng.uniform();
    const auto branch = pick < 0.45   ? RecursionBranch::above_one
                        : pick < 0.9 ? RecursionBranch::below_one
                                     : RecursionBranch::equal_one;
    return random_problem(rng, branch, d_in, d_out);
}

const std::vector<double>& recursion_grid() {
    static const std::vector<double> grid{1e3, 1e4, 1e5, 1e6};
    return grid;
}

std::vector<double> bound_grid() {
    std::vector<double> grid = recursion_grid();
    for (int e = 8; e <= 20; ++e) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

}  // namespace

ProblemConfig random_problem(Rng& rng, RecursionBranch branch, int d_in, int d_out) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        ProblemConfig c;
        c.p = uniform_in(rng, 0.2, 0.8);
        c.q = uniform_in(rng, 0.2, 0.8);
        c.alpha = uniform_in(rng, 0.1, 0.9);
        c.beta = uniform_in(rng, 0.3, 0.95);
        c.beta_prime = uniform_in(rng, 0.05, 0.8) * c.beta;
        c.gamma = uniform_in(rng, 0.0, 0.5);
        c.gamma_prime = uniform_in(rng, c.gamma + 0.05, 0.95);
        c.B = 1.0;
        c.sigma = 0.1;
        c.c0 = 1.0;
        c.d_in = d_in;
        c.d_out = d_out;
        c.seed = rng.next();
        if (branch == RecursionBranch::equal_one) {
            // u = 1 exactly when (gamma' - gamma) / (1 - gamma') = (beta - beta') / v.
            const double r = (c.beta - c.beta_prime) / variance_exponent(c);
            c.gamma_prime = (c.gamma + r) / (1.0 + r);
            if (c.gamma_prime >= 1.0 || c.gamma_prime <= c.gamma) continue;
            return c;
        }
        const double u = theoretical_rate(c).u;
        const double lg = std::log2(u);
        if (branch == RecursionBranch::above_one && lg >= 0.5 && u <= 20.0) return c;
        if (branch == RecursionBranch::below_one && lg <= -0.5 && u >= 0.05) return c;
    }
    throw std::runtime_error("random_problem: rejection sampling did not converge");
}

CheckResult check_source_roundtrip(std::uint64_t seed, int instances) {
    const auto start = Clock::now();
    CheckResult r = new_result("source-norm round trip", instances, 1e-12);
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const int d_in = uniform_int(rng, 1, 32);
        const int d_out = uniform_int(rng, 1, 32);
        const EigenDecay in(d_in, uniform_in(rng, 0.1, 0.95));
        const EigenDecay out(d_out, uniform_in(rng, 0.1, 0.95));
        SourceCoefficients src{Eigen::MatrixXd(d_out, d_in), uniform_in(rng, 0.0, 0.99),
                               uniform_in(rng, 0.0, 0.99)};
        for (int j = 0; j < d_out; ++j) {
            for (int i = 0; i < d_in; ++i) src.a(j, i) = rng.symmetric(1.0);
        }
        const auto op = operator_from_source(src, in, out);
        r.worst = std::max(r.worst, rel_err(bg_norm(op, src.beta, src.gamma), src.a.norm()));
    }
    return finish(r, start);
}

CheckResult check_norm_equivalence(std::uint64_t seed, int instances) {
    const auto start = Clock::now();
    CheckResult r = new_result("norm equivalence (weighted sum vs embedding)", instances, 1e-12);
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const int d_in = uniform_int(rng, 1, 32);
        const int d_out = uniform_int(rng, 1, 32);
        Eigen::MatrixXd m(d_out, d_in);
        for (int j = 0; j < d_out; ++j) {
            for (int i = 0; i < d_in; ++i) m(j, i) = rng.symmetric(1.0);
        }
        const OperatorMatrix op(m, EigenDecay(d_in, uniform_in(rng, 0.1, 0.95)),
                                EigenDecay(d_out, uniform_in(rng, 0.1, 0.95)));
        const double b = uniform_in(rng, -0.5, 1.0);
        const double g = uniform_in(rng, -0.5, 1.0);
        r.worst = std::max(r.worst, rel_err(bg_norm_via_embedding(op, b, g), bg_norm(op, b, g)));
    }
    return finish(r, start);
}

CheckResult check_bias_oracle(std::uint64_t seed, int instances) {
    const auto start = Clock::now();
    CheckResult r = new_result("bias oracle (closed form vs regularized operator)", instances, 1e-10);
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const auto cfg = random_any_problem(rng, uniform_int(rng, 1, 64), uniform_int(rng, 1, 64));
        const auto truth = random_source_operator(cfg, rng.next(), uniform_in(rng, 0.25, 1.5));
        const auto lmap = random_lambda_map(rng, cfg.d_out);
        const double closed =
            analytic_bias(truth.source, lmap, truth.op.input, truth.op.output, cfg);
        const double direct =
            bg_norm(population_regularized(truth.op, lmap) - truth.op, cfg.beta_prime, cfg.gamma_prime);
        r.worst = std::max(r.worst, rel_err(closed, direct));
    }
    return finish(r, start);
}

CheckResult check_solver_oracle(std::uint64_t seed, int instances) {
    const auto start = Clock::now();
    CheckResult r = new_result("solver oracle (ridge on population covariances)", instances, 1e-10);
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const auto cfg = random_any_problem(rng, uniform_int(rng, 1, 64), uniform_int(rng, 1, 64));
        const auto truth = random_source_operator(cfg, rng.next());
        const auto lmap = random_lambda_map(rng, cfg.d_out);
        const Eigen::MatrixXd fitted = fit_rowwise_ridge(population_covariances(truth.op), lmap);
        const Eigen::MatrixXd expected = population_regularized(truth.op, lmap).m;
        const double scale = std::max(expected.norm(), 1e-300);
        r.worst = std::max(r.worst, (fitted - expected).norm() / scale);
    }
    return finish(r, start);
}

CheckResult check_schedule_recursion(std::uint64_t seed, int configs_per_branch) {
    const auto start = Clock::now();
    CheckResult r = new_result("multilevel recursion and contour identities", 0, 1e-9);
    Rng rng(seed);
    std::ostringstream detail;
    for (auto branch : {RecursionBranch::above_one, RecursionBranch::below_one}) {
        for (int k = 0; k < configs_per_branch; ++k) {
            const auto cfg = random_problem(rng, branch);
            const auto rate = theoretical_rate(cfg);
            const auto bias_e = contour_exponents(ContourKind::bias, cfg);
            const auto var_e = contour_exponents(ContourKind::variance, cfg);
            for (double n : recursion_grid()) {
                ++r.cases;
                const auto sched = multilevel_schedule(cfg, n);
                const double shift = std::pow(n, -cfg.p / input_rate_denominator(cfg));
                const auto& lv = sched.levels;
                for (std::size_t i = 0; i < lv.size(); ++i) {
                    const double var_lhs =
                        std::pow(lv[i].x, var_e.ex) * std::pow(lv[i].y, var_e.ey);
                    r.worst = std::max(r.worst, rel_err(var_lhs, std::pow(n, rate.eta2)));
                    if (i + 1 == lv.size()) continue;
                    const double bias_lhs =
                        std::pow(lv[i + 1].x, bias_e.ex) * std::pow(lv[i].y, bias_e.ey);
                    r.worst = std::max(r.worst, rel_err(bias_lhs, std::pow(n, rate.eta1)));
                    const double got = branch == RecursionBranch::above_one ? shift * lv[i + 1].x
                                                                            : lv[i + 1].x;
                    const double want = branch == RecursionBranch::above_one
                                            ? std::pow(shift * lv[i].x, rate.u)
                                            : std::pow(lv[i].x, rate.u);
                    r.worst = std::max(r.worst, rel_err(got, want));
                }
            }
        }
    }
    for (int k = 0; k < configs_per_branch; ++k) {
        const auto cfg = random_problem(rng, RecursionBranch::equal_one);
        for (double n : recursion_grid()) {
            ++r.cases;
            const auto sched = multilevel_schedule(cfg, n);
            if (!sched.special_case) {
                r.worst = std::max(r.worst, 1.0);
                detail << "u=" << sched.u << " not detected as special; ";
            }
            for (std::size_t i = 0; i + 1 < sched.levels.size(); ++i) {
                r.worst = std::max(r.worst,
                                   rel_err(sched.levels[i + 1].x, 0.5 * sched.levels[i].x));
            }
        }
    }
    r.detail = detail.str();
    return finish(r, start);
}

CheckResult check_level_bounds(std::uint64_t seed, int configs_per_branch) {
    const auto start = Clock::now();
    CheckResult r = new_result("level-count ceilings", 0, 0.0);
    Rng rng(seed);
    std::ostringstream detail;
    for (auto branch :
         {RecursionBranch::above_one, RecursionBranch::below_one, RecursionBranch::equal_one}) {
        for (int k = 0; k < configs_per_branch; ++k) {
            const auto cfg = random_problem(rng, branch);
            for (double n : bound_grid()) {
                ++r.cases;
                const auto b = level_count_bound(cfg, n);
                // worst = largest excess of L over its ceiling (<= 0 passes)
                const double excess = b.levels - b.bound;
                if (r.cases == 1 || excess > r.worst) r.worst = excess;
                if (excess > 0.0) detail << "L=" << b.levels << " > " << b.bound << " at N=" << n << "; ";
            }
        }
    }
    r.detail = detail.str();
    return finish(r, start);
}

CheckResult check_packing_separation(std::uint64_t seed, int pairs) {
    const auto start = Clock::now();
    CheckResult r = new_result("packing separation identity", pairs, 1e-12);
    Rng rng(seed);
    for (int k = 0; k < pairs; ++k) {
        PackingSpec spec;
        spec.m1 = uniform_int(rng, 1, 12);
        spec.K = uniform_int(rng, 1, 12);
        spec.m2 = uniform_int(rng, 0, 12);
        spec.eps = std::pow(10.0, uniform_in(rng, -4.0, 0.0));
        const EigenDecay in(2 * spec.m1 + uniform_int(rng, 0, 4), uniform_in(rng, 0.2, 0.9));
        const EigenDecay out(spec.K + spec.m2 + uniform_int(rng, 0, 4), uniform_in(rng, 0.2, 0.9));
        const double beta_prime = uniform_in(rng, 0.05, 0.9);
        const double gamma_prime = uniform_in(rng, 0.05, 0.95);
        Eigen::MatrixXi w1 = random_omega(spec.m1, spec.K, rng.next());
        Eigen::MatrixXi w2 = random_omega(spec.m1, spec.K, rng.next());
        if (w1 == w2) w2(0, 0) = 1 - w2(0, 0);
        const auto a1 = packing_operator(spec, w1, in, out, beta_prime, gamma_prime);
        const auto a2 = packing_operator(spec, w2, in, out, beta_prime, gamma_prime);
        const double d = bg_norm(a1 - a2, beta_prime, gamma_prime);
        const double hamming = (w1 - w2).cast<double>().squaredNorm();
        const double want = 32.0 * spec.eps / (spec.m1 * static_cast<double>(spec.K)) * hamming;
        r.worst = std::max(r.worst, rel_err(d * d, want));
    }
    return finish(r, start);
}

std::vector<CheckResult> run_oracle_checks(std::uint64_t seed) {
    return {check_source_roundtrip(derive_seed(seed, 11)),
            check_norm_equivalence(derive_seed(seed, 12)),
            check_bias_oracle(derive_seed(seed, 13)),
            check_solver_oracle(derive_seed(seed, 14)),
            check_schedule_recursion(derive_seed(seed, 15)),
            check_level_bounds(derive_seed(seed, 16)),
            check_packing_separation(derive_seed(seed, 17))};
}

}  // namespace mlkol
