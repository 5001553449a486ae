#include "cmass/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cmass/baselines.hpp"
#include "cmass/scheduler.hpp"

namespace cmass::verify {

namespace {

using baselines::random_instance;
using scheduler::CovId;
using scheduler::Instance;

std::vector<CovId> subset_to_covs(const Instance& inst, unsigned mask) {
    std::vector<CovId> out;
    for (std::size_t i = 0; i < inst.covs.size(); ++i) {
        if (mask & (1u << i)) out.push_back(inst.covs[i]);
    }
    return out;
}

}  // namespace

SuiteResult submodularity_suite(int instances, std::uint64_t seed) {
    Rng rng(seed);
    long checks = 0;
    for (int k = 0; k < instances; ++k) {
        const Instance inst = random_instance(rng, 7, 12);
        const unsigned v = static_cast<unsigned>(inst.covs.size());
        const unsigned full = 1u << v;

        // Memoize g+ over all subsets, then sweep S subseteq T strictly inside V.
        std::vector<double> gp(full);
        for (unsigned mask = 0; mask < full; ++mask) {
            const auto covs = subset_to_covs(inst, mask);
            gp[mask] = scheduler::pending_utility(inst, covs);
        }
        for (unsigned t = 0; t < full; ++t) {
            if (t == full - 1) continue;  // T must be a strict subset
            for (unsigned s = t;; s = (s - 1) & t) {
                for (unsigned i = 0; i < v; ++i) {
                    const unsigned bit = 1u << i;
                    if (t & bit) continue;
                    const double lhs = gp[s | bit] - gp[s];
                    const double rhs = gp[t | bit] - gp[t];
                    ++checks;
                    if (lhs < rhs - 1e-9) {
                        std::ostringstream why;
                        why << "violation at instance " << k << ": S=" << s << " T=" << t
                            << " i=" << inst.covs[i] << " (" << lhs << " < " << rhs << ")";
                        return {false, why.str()};
                    }
                }
                if (s == 0) break;
            }
        }
    }
    std::ostringstream ok;
    ok << instances << " instances, " << checks << " inequalities, 0 violations";
    return {true, ok.str()};
}

SuiteResult incremental_suite(int instances, std::uint64_t seed) {
    Rng rng(seed);
    for (int k = 0; k < instances; ++k) {
        const Instance inst = random_instance(rng, 8, 15);
        scheduler::GreedyTrace trace;
        scheduler::SchedulerParams params;  // auto mix weight
        scheduler::hybrid_greedy(inst, params, {}, nullptr, &trace);
        std::string why;
        if (!scheduler::incremental_oracle_check(inst, trace, &why)) {
            return {false, "instance " + std::to_string(k) + ": " + why};
        }
    }
    return {true, std::to_string(instances) + " instances replayed against the definitions"};
}

SuiteResult approx_ratio_suite(int instances, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> ratios;
    for (int k = 0; k < instances; ++k) {
        const int n = 2 + static_cast<int>(rng.uniform_int(4));  // budget in unit costs
        Instance inst = random_instance(rng, 9, 15, /*unit_costs=*/true,
                                        /*budget=*/static_cast<double>(n));
        const int degree = scheduler::collaboration_degree(inst.topo, inst.covs);
        const double gamma = scheduler::gamma_of(degree);
        const double bound = 1.0 - std::pow(1.0 - gamma / n, n - 1);

        scheduler::SchedulerParams params;  // lambda = 1/(C+1)
        const auto decision = scheduler::hybrid_greedy(inst, params);
        const double got = scheduler::actual_utility(inst, decision.scheduled);
        const auto best = baselines::offline_optimal(inst);

        if (best.utility <= 0.0) {
            ratios.push_back(1.0);
            continue;
        }
        const double ratio = got / best.utility;
        ratios.push_back(ratio);
        if (got < bound * best.utility - 1e-9) {
            std::ostringstream why;
            why << "instance " << k << ": ratio " << ratio << " below bound " << bound
                << " (C=" << degree << ", N=" << n << ")";
            return {false, why.str()};
        }
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = ratios[ratios.size() / 2];
    std::ostringstream ok;
    ok << instances << " instances within the bound; median ratio " << median;
    return {true, ok.str()};
}

SuiteResult examples_suite() {
    using baselines::FixtureSpec;

    // First construction: the joint-only heavy object is invisible to the
    // actual-utility greedy.
    FixtureSpec e1;
    e1.family = FixtureSpec::Family::Example1;
    e1.n = 10;
    e1.epsilon = 0.01;
    e1.budget = 2.0;
    const Instance inst1 = baselines::make_fixture(e1);

    scheduler::SchedulerParams actual_only;
    actual_only.mix_weight = 1e-9;
    const double got_actual = scheduler::actual_utility(
        inst1, scheduler::hybrid_greedy(inst1, actual_only).scheduled);
    if (std::abs(got_actual - 0.02) > 1e-12) {
        return {false, "actual-greedy on construction 1 returned " +
                           std::to_string(got_actual) + ", expected 0.02"};
    }
    scheduler::SchedulerParams hybrid;  // auto: C=1 -> lambda=1/2
    const double got_hybrid1 = scheduler::actual_utility(
        inst1, scheduler::hybrid_greedy(inst1, hybrid).scheduled);
    if (got_hybrid1 < 1.0 - 1e-12) {
        return {false, "hybrid on construction 1 returned " + std::to_string(got_hybrid1) +
                           ", expected >= 1.0"};
    }

    // Second construction: pending-greedy keeps opening pairs it never closes.
    FixtureSpec e2;
    e2.family = FixtureSpec::Family::Example2;
    e2.n = 10;
    e2.epsilon = 0.01;
    e2.budget = 4.0;
    const Instance inst2 = baselines::make_fixture(e2);

    scheduler::SchedulerParams pending_only;
    pending_only.mix_weight = 1.0 - 1e-9;
    const double got_pending = scheduler::actual_utility(
        inst2, scheduler::hybrid_greedy(inst2, pending_only).scheduled);
    if (std::abs(got_pending - 0.04) > 1e-12) {
        return {false, "pending-greedy on construction 2 returned " +
                           std::to_string(got_pending) + ", expected 0.04"};
    }
    const double got_hybrid2 = scheduler::actual_utility(
        inst2, scheduler::hybrid_greedy(inst2, hybrid).scheduled);
    if (got_hybrid2 < 2.0 - 1e-12) {
        return {false, "hybrid on construction 2 returned " + std::to_string(got_hybrid2) +
                           ", expected >= 2.0"};
    }

    std::ostringstream ok;
    ok << "actual-greedy 0.02 / hybrid " << got_hybrid1 << "; pending-greedy 0.04 / hybrid "
       << got_hybrid2;
    return {true, ok.str()};
}

SuiteResult channel_suite(int links, std::uint64_t seed) {
    Rng rng(seed);
    channel::ChannelParams params;
    params.fading = false;

    for (int k = 0; k < links; ++k) {
        // Random feasible demand below the capacity ceiling.
        const double gain = std::pow(10.0, rng.uniform(-12.0, -6.0));
        const double s = params.tx_power_linear() * gain / params.noise_psd_linear();
        const double ceiling = s / std::log(2.0);
        const double dt = 0.1;
        const double demand = ceiling * rng.uniform(0.01, 0.99) * dt;
        const auto b = channel::min_bandwidth(demand, gain, params, dt);
        if (!b) return {false, "feasible link flagged infeasible"};
        const double residual =
            std::abs(channel::achievable_rate(*b, gain, params) * dt - demand) / demand;
        if (residual > 1e-6) {
            return {false, "bisection residual " + std::to_string(residual) + " at link " +
                               std::to_string(k)};
        }
        // Just above the ceiling must be infeasible.
        if (channel::min_bandwidth(ceiling * 1.01 * dt, gain, params, dt)) {
            return {false, "demand above the capacity ceiling accepted"};
        }
    }

    // Monotone and concave in W by finite differences.
    const double gain = 1e-9;
    double prev = 0.0, prev_delta = -1.0;
    for (int i = 1; i <= 200; ++i) {
        const double w = i * 1e5;
        const double r = channel::achievable_rate(w, gain, params);
        const double delta = r - prev;
        if (delta <= 0.0) return {false, "rate not increasing in bandwidth"};
        if (prev_delta > 0.0 && delta > prev_delta + 1e-6) {
            return {false, "rate not concave in bandwidth"};
        }
        prev = r;
        prev_delta = delta;
    }
    return {true, std::to_string(links) + " links within 1e-6 residual; rate monotone/concave"};
}

}  // namespace cmass::verify
