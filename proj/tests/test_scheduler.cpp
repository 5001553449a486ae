#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmass/baselines.hpp"
#include "cmass/rng.hpp"
#include "cmass/scheduler.hpp"

using namespace cmass;
using namespace cmass::scheduler;
using baselines::FixtureSpec;

namespace {

Instance example1(int n = 3, double eps = 0.1, double budget = 2.0) {
    FixtureSpec spec;
    spec.family = FixtureSpec::Family::Example1;
    spec.n = n;
    spec.epsilon = eps;
    spec.budget = budget;
    return baselines::make_fixture(spec);
}

Instance example2(int n, double eps, double budget) {
    FixtureSpec spec;
    spec.family = FixtureSpec::Family::Example2;
    spec.n = n;
    spec.epsilon = eps;
    spec.budget = budget;
    return baselines::make_fixture(spec);
}

}  // namespace

TEST_CASE("actual utility on the first construction") {
    const Instance inst = example1();
    CHECK(actual_utility(inst, {}) == 0.0);
    const CovId v12[2] = {3, 4};  // v1, v2
    CHECK(actual_utility(inst, v12) == doctest::Approx(0.2));
    const CovId u12[2] = {1, 2};  // u1, u2 jointly detect m
    CHECK(actual_utility(inst, u12) == doctest::Approx(1.0));
}

TEST_CASE("pending utility splits by cost") {
    Instance inst;
    inst.covs = {1, 2};
    inst.costs[1] = 1.0;
    inst.costs[2] = 1.0;
    inst.budget = 2.0;
    inst.weights[10] = 1.0;
    inst.topo.second[{1, 2}].insert(10);

    const CovId a[1] = {1};
    CHECK(pending_utility(inst, a) == doctest::Approx(0.5));

    inst.costs[1] = 1.0;
    inst.costs[2] = 3.0;
    CHECK(pending_utility(inst, a) == doctest::Approx(0.25));
    const CovId b[1] = {2};
    CHECK(pending_utility(inst, b) == doctest::Approx(0.75));

    const CovId both[2] = {1, 2};
    CHECK(pending_utility(inst, both) == doctest::Approx(actual_utility(inst, both)));
}

TEST_CASE("hybrid utility blends the two") {
    const Instance inst = example1();
    const CovId a[1] = {1};
    const double pend = pending_utility(inst, a);
    const double act = actual_utility(inst, a);
    CHECK(hybrid_utility(inst, a, 0.5) == doctest::Approx(0.5 * pend + 0.5 * act));
    CHECK(hybrid_utility(inst, a, 1.0) == doctest::Approx(pend));
    const CovId all[5] = {1, 2, 3, 4, 5};
    CHECK(hybrid_utility(inst, all, 0.3) == doctest::Approx(actual_utility(inst, all)));
}

TEST_CASE("collaboration degree, gamma, and the automatic mix weight") {
    PerceptionTopology empty;
    const std::vector<CovId> covs{1, 2, 3};
    CHECK(collaboration_degree(empty, covs) == 0);
    CHECK(gamma_of(0) == 1.0);
    CHECK(auto_mix_weight(0) == doctest::Approx(1.0 - 1e-9));

    const Instance e1 = example1();
    CHECK(collaboration_degree(e1.topo, e1.covs) == 1);
    CHECK(gamma_of(1) == doctest::Approx(1.0 / 6.0));
    CHECK(auto_mix_weight(1) == doctest::Approx(0.5));

    CHECK(gamma_of(2) == doctest::Approx(1.0 / 14.0));
    CHECK(auto_mix_weight(2) == doctest::Approx(1.0 / 3.0));

    PerceptionTopology star;  // CoV 1 pairs with 2, 3, 4
    star.second[{1, 2}].insert(10);
    star.second[{1, 3}].insert(11);
    star.second[{1, 4}].insert(12);
    const std::vector<CovId> four{1, 2, 3, 4};
    CHECK(collaboration_degree(star, four) == 3);
}

TEST_CASE("hybrid greedy walks the first construction exactly as hand-traced") {
    const Instance inst = example1(3, 0.1, 2.0);
    SchedulerParams params;  // auto lambda: C=1 -> 1/2
    GreedyTrace trace;
    const ScheduleDecision d = hybrid_greedy(inst, params, {}, nullptr, &trace);

    REQUIRE(d.scheduled.size() == 2);
    CHECK(d.scheduled[0] == 1);  // u1 on the tie against u2
    CHECK(d.scheduled[1] == 2);
    CHECK(actual_utility(inst, d.scheduled) == doctest::Approx(1.0));

    // Round 1: h(u1) = 0.5 * 0.5 = 0.25 beats every v at 0.1.
    REQUIRE(trace.rounds.size() == 2);
    const auto& r1 = trace.rounds[0];
    for (std::size_t c = 0; c < r1.candidates.size(); ++c) {
        const double h = trace.lambda * r1.marginal_pending[c] +
                         (1 - trace.lambda) * r1.marginal_actual[c];
        if (r1.candidates[c] == 1) CHECK(h == doctest::Approx(0.25));
        if (r1.candidates[c] == 3) CHECK(h == doctest::Approx(0.1));
    }
    // Round 2: h(u2 | {u1}) = 0.5*0.5 + 0.5*1 = 0.75.
    const auto& r2 = trace.rounds[1];
    for (std::size_t c = 0; c < r2.candidates.size(); ++c) {
        if (r2.candidates[c] == 2) {
            const double h = trace.lambda * r2.marginal_pending[c] +
                             (1 - trace.lambda) * r2.marginal_actual[c];
            CHECK(h == doctest::Approx(0.75));
        }
    }
}

TEST_CASE("hybrid greedy recovers the paired construction") {
    const Instance inst = example2(4, 0.01, 4.0);
    SchedulerParams params;
    const ScheduleDecision d = hybrid_greedy(inst, params);
    CHECK(actual_utility(inst, d.scheduled) == doctest::Approx(2.0 + 2 * 0.01));

    SchedulerParams pending_only;
    pending_only.mix_weight = 1.0 - 1e-9;
    const ScheduleDecision p = hybrid_greedy(inst, pending_only);
    CHECK(actual_utility(inst, p.scheduled) == doctest::Approx(4 * 0.01));
}

TEST_CASE("zero budget schedules nothing") {
    Instance inst = example1();
    inst.budget = 0.0;
    CHECK(hybrid_greedy(inst, {}).scheduled.empty());
}

TEST_CASE("budget feasibility on random instances") {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const Instance inst = baselines::random_instance(rng);
        const ScheduleDecision d = hybrid_greedy(inst, {});
        double spent = 0.0;
        for (CovId i : d.scheduled) spent += inst.costs.at(i);
        CHECK(spent <= inst.budget + 1e-9);
        CHECK(spent == doctest::Approx(d.spent));
    }
}

TEST_CASE("marginal-zero covs are never scheduled even with leftover budget") {
    Instance inst;
    inst.covs = {1, 2};
    inst.costs[1] = 1.0;
    inst.costs[2] = 1.0;
    inst.budget = 10.0;
    inst.weights[10] = 1.0;
    inst.topo.first[1].insert(10);
    // CoV 2 sees nothing.
    const ScheduleDecision d = hybrid_greedy(inst, {});
    CHECK(d.scheduled == std::vector<CovId>{1});
}

TEST_CASE("scale invariance: weights scale utilities, not the selection") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        Instance inst = baselines::random_instance(rng);
        SchedulerParams params;
        params.mix_weight = 0.4;
        const ScheduleDecision base = hybrid_greedy(inst, params);
        const double u = actual_utility(inst, base.scheduled);

        const double k = rng.uniform(0.1, 7.0);
        Instance scaled = inst;
        for (auto& [n, w] : scaled.weights) w *= k;
        const ScheduleDecision same = hybrid_greedy(scaled, params);
        CHECK(same.scheduled == base.scheduled);
        CHECK(actual_utility(scaled, same.scheduled) == doctest::Approx(k * u));
    }
}

TEST_CASE("detection levels never decrease across rounds") {
    Rng rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        const Instance inst = baselines::random_instance(rng);
        GreedyTrace trace;
        hybrid_greedy(inst, {}, {}, nullptr, &trace);
        for (std::size_t r = 1; r < trace.rounds.size(); ++r) {
            for (std::size_t n = 0; n < trace.objects.size(); ++n) {
                CHECK(trace.rounds[r].d_after[n] >= trace.rounds[r - 1].d_after[n] - 1e-15);
            }
        }
    }
}

TEST_CASE("incremental oracle validates fixture traces and flags corruption") {
    const Instance inst = example1();
    GreedyTrace trace;
    hybrid_greedy(inst, {}, {}, nullptr, &trace);
    CHECK(incremental_oracle_check(inst, trace));

    GreedyTrace broken = trace;
    broken.rounds[0].marginal_pending[0] += 1e-6;
    std::string why;
    CHECK_FALSE(incremental_oracle_check(inst, broken, &why));
    CHECK(why.find("round 0") != std::string::npos);

    // Vacuous trace on an empty instance.
    Instance empty;
    empty.budget = 1.0;
    GreedyTrace none;
    hybrid_greedy(empty, {}, {}, nullptr, &none);
    CHECK(incremental_oracle_check(empty, none));
}

TEST_CASE("preselected zero-cost member seeds the state like a scheduled cov") {
    // A free participant pairing with CoV 2 turns the pair into immediate
    // utility for CoV 2.
    Instance inst;
    inst.covs = {2, 3, 99};
    inst.costs[2] = 1.0;
    inst.costs[3] = 1.0;
    inst.costs[99] = 0.0;
    inst.budget = 1.0;
    inst.weights[10] = 1.0;   // joint with the free member
    inst.weights[11] = 0.6;   // CoV 3 alone
    inst.topo.second[{99, 2}].insert(10);
    inst.topo.first[3].insert(11);

    const Preselected pre[1] = {{99, 0.0}};
    SchedulerParams params;
    params.mix_weight = 0.5;
    const ScheduleDecision d = hybrid_greedy(inst, params, pre);
    REQUIRE(d.scheduled.size() == 2);
    CHECK(d.scheduled[0] == 99);
    CHECK(d.scheduled[1] == 2);  // marginal 1.0 beats 0.6
    CHECK(d.spent == doctest::Approx(1.0));
}

TEST_CASE("cmass reduces to the hybrid greedy when everything is explored") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const Instance inst = baselines::random_instance(rng);
        topology::EmpiricalState emp;
        emp.topo = inst.topo;
        for (CovId i : inst.covs) emp.last_seen_single[i] = 10;  // tau = t

        SchedulerParams params;
        params.alpha = 0.0;
        params.beta = 0.0;
        const ScheduleDecision a = cmass_schedule(emp, inst, params, 10);
        const ScheduleDecision b = hybrid_greedy(inst, params);
        CHECK(a.scheduled == b.scheduled);
    }
}

TEST_CASE("never-seen covs are forced regardless of utility") {
    Instance inst;
    inst.covs = {1, 2};
    inst.costs[1] = 1.0;
    inst.costs[2] = 1.0;
    inst.budget = 2.0;
    inst.weights[10] = 1.0;
    inst.topo.first[1].insert(10);

    topology::EmpiricalState emp;
    emp.topo.first[1] = {10};
    emp.last_seen_single[1] = 0;  // CoV 2 never scheduled, sees nothing

    const ScheduleDecision d = cmass_schedule(emp, inst, {}, 5);
    CHECK(std::find(d.scheduled.begin(), d.scheduled.end(), 2) != d.scheduled.end());
}

TEST_CASE("forced exploration admits cheapest-first under overflow") {
    Instance inst;
    inst.covs = {1, 2, 3};
    inst.costs[1] = 5.0;
    inst.costs[2] = 2.0;
    inst.costs[3] = 2.5;
    inst.budget = 5.0;
    for (CovId i : inst.covs) inst.weights[100 + i] = 1.0;

    topology::EmpiricalState emp;  // nobody ever scheduled
    const ScheduleDecision d = cmass_schedule(emp, inst, {}, 1);
    // Cheapest two fit (2 + 2.5 = 4.5); the 5.0 CoV no longer does.
    CHECK(d.scheduled == std::vector<CovId>{2, 3});
}

TEST_CASE("the ucb term orders stale covs first") {
    Instance inst;
    inst.covs = {1, 2};
    inst.costs[1] = 1.0;
    inst.costs[2] = 1.0;
    inst.budget = 1.0;  // room for exactly one
    inst.weights[10] = 1.0;
    inst.weights[11] = 1.0;
    inst.topo.first[1].insert(10);
    inst.topo.first[2].insert(11);

    topology::EmpiricalState emp;
    emp.topo = inst.topo;
    emp.last_seen_single[1] = 99;   // fresh
    emp.last_seen_single[2] = 0;    // stale by 100 frames

    SchedulerParams params;
    params.alpha = 0.0;
    params.beta = 0.01;
    const ScheduleDecision d = cmass_schedule(emp, inst, params, 100);
    REQUIRE(d.scheduled.size() == 1);
    CHECK(d.scheduled[0] == 2);

    // Without the bonus the tie falls to the lower id.
    params.beta = 0.0;
    const ScheduleDecision tie = cmass_schedule(emp, inst, params, 100);
    CHECK(tie.scheduled[0] == 1);
}

TEST_CASE("uncertainty bonus draws exploration toward emerging objects") {
    Instance inst;
    inst.covs = {1, 2};
    inst.costs[1] = 1.0;
    inst.costs[2] = 1.0;
    inst.budget = 1.0;
    inst.weights[10] = 0.5;
    inst.weights[11] = 0.5;
    inst.weights[12] = 0.4;
    inst.topo.first[1].insert(10);
    inst.topo.first[2].insert(11);

    topology::EmpiricalState emp;
    emp.topo = inst.topo;
    emp.last_seen_single[1] = 50;
    emp.last_seen_single[2] = 50;
    emp.uncertainty[2] = {12};  // object 12 predicted to emerge for CoV 2

    SchedulerParams params;
    params.alpha = 0.1;
    params.beta = 0.0;
    const ScheduleDecision d = cmass_schedule(emp, inst, params, 51);
    REQUIRE(d.scheduled.size() == 1);
    CHECK(d.scheduled[0] == 2);
}

TEST_CASE("instance fixtures survive the json round trip") {
    Rng rng(101);
    for (int rep = 0; rep < 50; ++rep) {
        const Instance inst = baselines::random_instance(rng);
        const Instance back = instance_from_json(instance_to_json(inst));
        CHECK(back.covs == inst.covs);
        CHECK(back.costs == inst.costs);
        CHECK(back.weights == inst.weights);
        CHECK(back.budget == inst.budget);
        CHECK(back.topo.first == inst.topo.first);
        CHECK(back.topo.second == inst.topo.second);
        // The decision must be reproducible from the serialized form.
        const auto a = hybrid_greedy(inst, {});
        const auto b = hybrid_greedy(back, {});
        CHECK(a.scheduled == b.scheduled);
    }
    CHECK_THROWS(instance_from_json("{"));
}

TEST_CASE("submodularity of the pending utility on random instances") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        const Instance inst = baselines::random_instance(rng, 6, 10);
        const unsigned v = static_cast<unsigned>(inst.covs.size());
        std::vector<double> gp(1u << v);
        for (unsigned mask = 0; mask < (1u << v); ++mask) {
            std::vector<CovId> s;
            for (unsigned i = 0; i < v; ++i) {
                if (mask & (1u << i)) s.push_back(inst.covs[i]);
            }
            gp[mask] = pending_utility(inst, s);
        }
        for (unsigned t = 0; t + 1 < (1u << v); ++t) {
            for (unsigned s = t;; s = (s - 1) & t) {
                for (unsigned i = 0; i < v; ++i) {
                    if (t & (1u << i)) continue;
                    CHECK(gp[s | (1u << i)] - gp[s] >= gp[t | (1u << i)] - gp[t] - 1e-9);
                }
                if (s == 0) break;
            }
        }
    }
}
