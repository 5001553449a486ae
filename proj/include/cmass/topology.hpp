#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "cmass/detmodel.hpp"
#include "cmass/sensing.hpp"

// Perception topology under the second-order approximation: which objects a
// single CoV detects alone (first order) and which only a specific pair
// detects jointly (second order, disjoint from both first-order sets). Also
// the empirical store the scheduler learns online: replayed entries,
// last-scheduled times, LoS refinement, and topological uncertainty.
namespace cmass::topology {

using CovId = std::int64_t;
using ObjId = std::int64_t;

struct CovPair {
    CovId a;
    CovId b;

    CovPair(CovId i, CovId j) : a(i < j ? i : j), b(i < j ? j : i) {}
    auto operator<=>(const CovPair&) const = default;
};

struct PerceptionTopology {
    std::map<CovId, std::set<ObjId>> first;
    std::map<CovPair, std::set<ObjId>> second;

    const std::set<ObjId>* first_of(CovId i) const;
    const std::set<ObjId>* second_of(CovId i, CovId j) const;
    bool disjointness_holds() const;  // second(i,j) avoids first(i) and first(j)
};

// Ground-truth topology of one frame from the per-CoV scans and fixed object
// difficulties. Pairs are evaluated with the two-view information norm and
// the single-view sets subtracted.
PerceptionTopology ground_truth_topology(
    const std::map<CovId, sensing::ScanResult>& scans,
    const std::set<ObjId>& objects,
    const std::map<ObjId, double>& difficulties,
    const detmodel::DetectionModel& model);

// Detected object set of a scheduled set: union of first-order sets and of
// second-order sets of pairs inside S.
std::set<ObjId> compose(const PerceptionTopology& topo, std::span<const CovId> covs);

struct EmpiricalState {
    PerceptionTopology topo;
    std::map<CovId, long> last_seen_single;   // tau per CoV
    std::map<CovPair, long> last_seen_pair;   // tau per pair (diagnostics)
    std::map<CovId, std::set<ObjId>> uncertainty;  // U(i)
    std::map<CovId, std::set<ObjId>> prev_los;     // L_t(i), ground-truth LoS

    bool ever_scheduled(CovId i) const { return last_seen_single.count(i) > 0; }
};

// Refreshes the entries of scheduled CoVs and of pairs inside the scheduled
// set from the ground truth, stamping their times. Stale second-order entries
// touching a refreshed CoV are re-normalized against the new first-order sets
// so the disjointness invariant survives partial refreshes.
void replay(EmpiricalState& emp, std::span<const CovId> scheduled,
            const PerceptionTopology& truth, long t);

// Intersects the empirical sets with the predicted-LoS sets (both endpoints
// for pairs). Only ever shrinks.
void refine(EmpiricalState& emp,
            const std::map<CovId, std::set<ObjId>>& predicted_los);

// Topological uncertainty update: objects predicted to newly gain LoS
// accumulate for scheduled CoVs and overwrite for unscheduled ones.
void update_uncertainty(EmpiricalState& emp, std::span<const CovId> scheduled,
                        const std::map<CovId, std::set<ObjId>>& prev_los,
                        const std::map<CovId, std::set<ObjId>>& predicted_los,
                        const std::set<ObjId>& objects);

// Drops departed CoVs and objects from every stored set.
void sync_population(EmpiricalState& emp, const std::set<CovId>& live_covs,
                     const std::set<ObjId>& live_objects);

}  // namespace cmass::topology
