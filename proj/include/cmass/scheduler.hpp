#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmass/topology.hpp"

// The optimization core: the budgeted coverage variant with joint
// detections. Definitional utility evaluators (used directly by tests and the
// verification suites) sit next to the incremental greedy, which maintains
// the per-object detection-level vector d and per-(CoV, object) matrix P.
namespace cmass::scheduler {

using topology::CovId;
using topology::ObjId;
using topology::PerceptionTopology;

struct Instance {
    std::vector<CovId> covs;
    PerceptionTopology topo;
    std::map<ObjId, double> weights;
    std::map<CovId, double> costs;  // Hz; > 0 for every schedulable CoV
    double budget = 0.0;            // Hz

    void validate() const;
};

struct SchedulerParams {
    std::optional<double> mix_weight;  // lambda; nullopt = 1/(C+1) from the topology
    double alpha = 0.01;               // topological-uncertainty weight
    double beta = 0.01;                // unexplored-time (UCB) weight
};

struct ScheduleDecision {
    std::vector<CovId> scheduled;        // in scheduling order
    std::map<CovId, double> cost;        // charged bandwidth per scheduled CoV
    double spent = 0.0;
};

// Actual utility: summed weights of objects detected by S (composition of
// first- and second-order sets).
double actual_utility(const Instance& inst, std::span<const CovId> s);

// Pending utility: actual plus, per undetected object, the best
// cost-proportional credit over half-initiated pairs crossing the boundary
// of S.
double pending_utility(const Instance& inst, std::span<const CovId> s);

double hybrid_utility(const Instance& inst, std::span<const CovId> s, double lambda);

// Maximum collaboration degree: most non-empty pair entries incident to one
// CoV (restricted to the given CoV set).
int collaboration_degree(const PerceptionTopology& topo, std::span<const CovId> covs);

// Approximation-ratio constant and the automatic utility mix for a degree.
double gamma_of(int degree);
double auto_mix_weight(int degree);  // 1/(C+1), clamped into (0, 1)

// Per-round snapshot for the incremental-correctness oracle.
struct RoundSnapshot {
    std::vector<CovId> candidates;          // unscheduled at round start
    std::vector<double> marginal_actual;    // parallel to candidates
    std::vector<double> marginal_pending;
    std::vector<double> d_after;            // levels after the pick, object-indexed
    CovId chosen = -1;
    double budget_before = 0.0;
};

struct GreedyTrace {
    std::vector<ObjId> objects;             // index order of d_after
    std::vector<CovId> preselected;
    std::vector<RoundSnapshot> rounds;
    double lambda = 0.0;
};

// Extra per-CoV additive term entering both marginals (exploration bonuses).
using BonusMap = std::map<CovId, double>;

// One preselected CoV: charged its cost before the greedy loop runs. Cost may
// be zero (a user vehicle whose own data is free).
struct Preselected {
    CovId cov;
    double cost = 0.0;
};

// The hybrid greedy algorithm. Each round schedules the affordable CoV with
// the best augmented hybrid-marginal-to-cost ratio; zero-ratio CoVs are never
// scheduled; ties break to the lowest CoV id.
ScheduleDecision hybrid_greedy(const Instance& inst, const SchedulerParams& params,
                               std::span<const Preselected> preselected = {},
                               const BonusMap* bonus = nullptr,
                               GreedyTrace* trace = nullptr);

// Replays a recorded trace against the definitional forms: levels must match
// the definition of d and marginals must match the utility differences at
// every round, to 1e-12. On mismatch returns false and reports the round.
bool incremental_oracle_check(const Instance& inst, const GreedyTrace& trace,
                              std::string* why = nullptr);

// One C-MASS scheduling step on the empirical topology: forces never-
// scheduled CoVs first (cheapest first under overflow), then runs the hybrid
// greedy with exploration bonuses alpha * sum of uncertain weights and
// beta * sqrt(t - tau).
ScheduleDecision cmass_schedule(const topology::EmpiricalState& emp,
                                const Instance& inst, const SchedulerParams& params,
                                long t, std::span<const Preselected> preselected = {});

// Fixture format shared with the instance generators: covs, costs, first and
// second topology, weights, budget.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

}  // namespace cmass::scheduler
