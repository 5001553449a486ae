#include "cmass/topology.hpp"

#include <algorithm>

namespace cmass::topology {

const std::set<ObjId>* PerceptionTopology::first_of(CovId i) const {
    const auto it = first.find(i);
    return it == first.end() ? nullptr : &it->second;
}

const std::set<ObjId>* PerceptionTopology::second_of(CovId i, CovId j) const {
    const auto it = second.find(CovPair{i, j});
    return it == second.end() ? nullptr : &it->second;
}

bool PerceptionTopology::disjointness_holds() const {
    for (const auto& [pair, objs] : second) {
        for (CovId c : {pair.a, pair.b}) {
            if (const auto* f = first_of(c)) {
                for (ObjId n : objs) {
                    if (f->count(n)) return false;
                }
            }
        }
    }
    return true;
}

PerceptionTopology ground_truth_topology(
    const std::map<CovId, sensing::ScanResult>& scans,
    const std::set<ObjId>& objects,
    const std::map<ObjId, double>& difficulties,
    const detmodel::DetectionModel& model) {
    PerceptionTopology topo;

    const auto count_of = [&](const sensing::ScanResult& s, ObjId n) {
        const auto it = s.points.find(n);
        return it == s.points.end() ? 0 : it->second;
    };

    for (const auto& [cov, scan] : scans) {
        auto& f = topo.first[cov];
        for (ObjId n : objects) {
            const int c[1] = {count_of(scan, n)};
            if (detmodel::is_detected(c, model, difficulties.at(n))) f.insert(n);
        }
    }
    for (auto it = scans.begin(); it != scans.end(); ++it) {
        for (auto jt = std::next(it); jt != scans.end(); ++jt) {
            auto& s = topo.second[CovPair{it->first, jt->first}];
            const auto& fi = topo.first[it->first];
            const auto& fj = topo.first[jt->first];
            for (ObjId n : objects) {
                if (fi.count(n) || fj.count(n)) continue;
                const int c[2] = {count_of(it->second, n), count_of(jt->second, n)};
                if (c[0] <= 0 && c[1] <= 0) continue;  // joint info 0; singles already decided
                if (detmodel::is_detected(c, model, difficulties.at(n))) s.insert(n);
            }
        }
    }
    return topo;
}

std::set<ObjId> compose(const PerceptionTopology& topo, std::span<const CovId> covs) {
    std::set<ObjId> out;
    for (std::size_t i = 0; i < covs.size(); ++i) {
        if (const auto* f = topo.first_of(covs[i])) out.insert(f->begin(), f->end());
        for (std::size_t j = i + 1; j < covs.size(); ++j) {
            if (const auto* s = topo.second_of(covs[i], covs[j])) {
                out.insert(s->begin(), s->end());
            }
        }
    }
    return out;
}

void replay(EmpiricalState& emp, std::span<const CovId> scheduled,
            const PerceptionTopology& truth, long t) {
    std::set<CovId> sched(scheduled.begin(), scheduled.end());
    for (CovId i : sched) {
        const auto* f = truth.first_of(i);
        emp.topo.first[i] = f ? *f : std::set<ObjId>{};
        emp.last_seen_single[i] = t;
    }
    for (auto it = sched.begin(); it != sched.end(); ++it) {
        for (auto jt = std::next(it); jt != sched.end(); ++jt) {
            const CovPair key{*it, *jt};
            const auto* s = truth.second_of(*it, *jt);
            emp.topo.second[key] = s ? *s : std::set<ObjId>{};
            emp.last_seen_pair[key] = t;
        }
    }
    // A refreshed first-order set can overlap a stale pair entry observed
    // earlier; subtract so the stored topology keeps second-order sets
    // disjoint from first-order ones. Composition is unchanged by this.
    for (auto& [pair, objs] : emp.topo.second) {
        const bool touched = sched.count(pair.a) || sched.count(pair.b);
        if (!touched || objs.empty()) continue;
        for (CovId c : {pair.a, pair.b}) {
            if (const auto* f = emp.topo.first_of(c)) {
                for (auto it = objs.begin(); it != objs.end();) {
                    it = f->count(*it) ? objs.erase(it) : std::next(it);
                }
            }
        }
    }
}

void refine(EmpiricalState& emp,
            const std::map<CovId, std::set<ObjId>>& predicted_los) {
    const auto los_of = [&](CovId i) -> const std::set<ObjId>* {
        const auto it = predicted_los.find(i);
        return it == predicted_los.end() ? nullptr : &it->second;
    };
    for (auto& [cov, objs] : emp.topo.first) {
        const auto* los = los_of(cov);
        for (auto it = objs.begin(); it != objs.end();) {
            it = (los && los->count(*it)) ? std::next(it) : objs.erase(it);
        }
    }
    for (auto& [pair, objs] : emp.topo.second) {
        const auto* la = los_of(pair.a);
        const auto* lb = los_of(pair.b);
        for (auto it = objs.begin(); it != objs.end();) {
            const bool keep = la && lb && la->count(*it) && lb->count(*it);
            it = keep ? std::next(it) : objs.erase(it);
        }
    }
}

void update_uncertainty(EmpiricalState& emp, std::span<const CovId> scheduled,
                        const std::map<CovId, std::set<ObjId>>& prev_los,
                        const std::map<CovId, std::set<ObjId>>& predicted_los,
                        const std::set<ObjId>& objects) {
    const std::set<CovId> sched(scheduled.begin(), scheduled.end());
    for (const auto& [cov, predicted] : predicted_los) {
        std::set<ObjId> emerging;
        const auto it = prev_los.find(cov);
        const std::set<ObjId>* had_los = it == prev_los.end() ? nullptr : &it->second;
        for (ObjId n : predicted) {
            if (!objects.count(n)) continue;
            if (!had_los || !had_los->count(n)) emerging.insert(n);
        }
        if (sched.count(cov)) {
            auto& u = emp.uncertainty[cov];
            u.insert(emerging.begin(), emerging.end());
        } else {
            emp.uncertainty[cov] = std::move(emerging);
        }
    }
}

namespace {

template <typename K, typename Pred>
void erase_if_key(std::map<K, std::set<ObjId>>& m, Pred dead_key) {
    for (auto it = m.begin(); it != m.end();) {
        it = dead_key(it->first) ? m.erase(it) : std::next(it);
    }
}

void prune_objects(std::map<CovId, std::set<ObjId>>& m, const std::set<ObjId>& live) {
    for (auto& [k, objs] : m) {
        for (auto it = objs.begin(); it != objs.end();) {
            it = live.count(*it) ? std::next(it) : objs.erase(it);
        }
    }
}

}  // namespace

void sync_population(EmpiricalState& emp, const std::set<CovId>& live_covs,
                     const std::set<ObjId>& live_objects) {
    const auto dead_cov = [&](CovId i) { return !live_covs.count(i); };
    const auto dead_pair = [&](const CovPair& p) {
        return !live_covs.count(p.a) || !live_covs.count(p.b);
    };

    erase_if_key(emp.topo.first, dead_cov);
    erase_if_key(emp.topo.second, dead_pair);
    erase_if_key(emp.uncertainty, dead_cov);
    erase_if_key(emp.prev_los, dead_cov);
    for (auto it = emp.last_seen_single.begin(); it != emp.last_seen_single.end();) {
        it = dead_cov(it->first) ? emp.last_seen_single.erase(it) : std::next(it);
    }
    for (auto it = emp.last_seen_pair.begin(); it != emp.last_seen_pair.end();) {
        it = dead_pair(it->first) ? emp.last_seen_pair.erase(it) : std::next(it);
    }

    prune_objects(emp.topo.first, live_objects);
    for (auto& [pair, objs] : emp.topo.second) {
        for (auto it = objs.begin(); it != objs.end();) {
            it = live_objects.count(*it) ? std::next(it) : objs.erase(it);
        }
    }
    prune_objects(emp.uncertainty, live_objects);
    prune_objects(emp.prev_los, live_objects);
}

}  // namespace cmass::topology
