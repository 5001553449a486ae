#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmass/channel.hpp"
#include "cmass/geometry.hpp"
#include "cmass/rng.hpp"
#include "cmass/scheduler.hpp"

// Baseline schedulers, the exhaustive offline optimum, and the adversarial
// fixture families used to stress the greedy variants.
namespace cmass::baselines {

using scheduler::CovId;
using scheduler::Instance;
using scheduler::ObjId;
using scheduler::ScheduleDecision;

struct CovSite {
    CovId id;
    Vec2 pos;
    double cost;  // Hz
};

// Adds CoVs nearest-first while they fit; unaffordable ones are skipped and
// the walk continues.
ScheduleDecision closest_first(std::span<const CovSite> covs, Vec2 user_pos,
                               double budget);

// Ratio-greedy on newly covered area cells. A cell is covered when it lies in
// the CoV's sensing disc with building line-of-sight; vehicle bodies are
// ignored for coverage.
struct CoverageGrid {
    std::vector<Vec2> cells;  // cell centers inside the interest region
    double cell_size = 5.0;
};

CoverageGrid make_coverage_grid(const channel::RegionGeometry& region, double cell_size);

ScheduleDecision greedy_area(std::span<const CovSite> covs, const CoverageGrid& grid,
                             std::span<const Rect> buildings, double sensing_range,
                             double budget);

// Object-level CP baseline: the union of first-order detections over every
// live CoV; nothing is charged.
std::set<ObjId> cpm_baseline(const topology::PerceptionTopology& truth,
                             std::span<const CovId> covs);

struct OptimalResult {
    std::vector<CovId> covs;
    double utility = 0.0;
    double spent = 0.0;
};

// Exhaustive search over budget-feasible subsets (cost-pruned DFS), with the
// optional preselected members always included at their own cost. Throws when
// the CoV count exceeds `cap`.
OptimalResult offline_optimal(const Instance& inst,
                              std::span<const scheduler::Preselected> preselected = {},
                              int cap = 18);

// Adversarial and random instance families.
struct FixtureSpec {
    enum class Family { Example1, Example2, Example3, Example4, Random };
    Family family = Family::Example1;
    int n = 3;             // group count
    int degree = 2;        // C, examples 3-4
    double epsilon = 0.1;  // small-object weight
    int lookahead = 2;     // L, example 4
    double budget = 2.0;
    std::uint64_t seed = 0;
};

Instance make_fixture(const FixtureSpec& spec);

// Random instance: every object lands in a random singleton or pair set,
// weights U(0,1], costs U[1,4].
Instance random_instance(Rng& rng, int max_covs = 9, int max_objects = 15,
                         bool unit_costs = false, double budget = -1.0);

}  // namespace cmass::baselines
