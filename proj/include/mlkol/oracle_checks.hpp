#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlkol/config.hpp"
#include "mlkol/random.hpp"

namespace mlkol {

/// Outcome of one property suite.
struct CheckResult {
    std::string name;
    bool passed = false;
    int cases = 0;
    double worst = 0.0;      // largest observed deviation (relative unless noted)
    double tolerance = 0.0;
    double elapsed_ms = 0.0;
    std::string detail;
};

enum class RecursionBranch { above_one, below_one, equal_one };

/// Random valid config in the requested multilevel branch. Off the special
/// case |log2 u| >= 1/2 and u <= 20, so level counts stay in the O(ln ln N)
/// regime with a moderate constant.
ProblemConfig random_problem(Rng& rng, RecursionBranch branch, int d_in = 32, int d_out = 32);

CheckResult check_source_roundtrip(std::uint64_t seed, int instances = 100);
CheckResult check_norm_equivalence(std::uint64_t seed, int instances = 100);
CheckResult check_bias_oracle(std::uint64_t seed, int instances = 50);
CheckResult check_solver_oracle(std::uint64_t seed, int instances = 50);
CheckResult check_schedule_recursion(std::uint64_t seed, int configs_per_branch = 20);
CheckResult check_level_bounds(std::uint64_t seed, int configs_per_branch = 20);
CheckResult check_packing_separation(std::uint64_t seed, int pairs = 50);

/// All suites above, in a fixed order.
std::vector<CheckResult> run_oracle_checks(std::uint64_t seed);

}  // namespace mlkol
