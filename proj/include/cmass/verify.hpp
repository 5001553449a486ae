#pragma once

#include <cstdint>
#include <string>

// Property suites behind the `verify` CLI subcommand and the acceptance
// tests. Every suite checks an implementation route against an independent
// one: definitional utilities vs incremental state, exhaustive enumeration vs
// the greedy, closed forms vs sampling.
namespace cmass::verify {

struct SuiteResult {
    bool pass = false;
    std::string detail;
};

// Pending-utility submodularity: exhaustive (S, T, i) checks on random
// instances (|V| <= 7).
SuiteResult submodularity_suite(int instances = 1000, std::uint64_t seed = 2024);

// Incremental-correctness: recorded greedy rounds replayed against the
// definitional marginals and levels.
SuiteResult incremental_suite(int instances = 500, std::uint64_t seed = 777);

// Worst-case ratio on uniform-cost instances, budget N in {2..5}:
// greedy >= [1 - (1 - gamma/N)^(N-1)] * optimum; also reports the observed
// ratio distribution.
SuiteResult approx_ratio_suite(int instances = 500, std::uint64_t seed = 31337);

// The two adversarial constructions: actual-greedy collapses on the first,
// pending-greedy on the second, the hybrid survives both.
SuiteResult examples_suite();

// Bisection residuals, the capacity-ceiling boundary, and rate shape checks.
SuiteResult channel_suite(int links = 100, std::uint64_t seed = 99);

}  // namespace cmass::verify
