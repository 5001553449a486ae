#include "cmass/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace cmass::baselines {

ScheduleDecision closest_first(std::span<const CovSite> covs, Vec2 user_pos,
                               double budget) {
    std::vector<CovSite> order(covs.begin(), covs.end());
    std::sort(order.begin(), order.end(), [&](const CovSite& a, const CovSite& b) {
        const double da = distance(a.pos, user_pos), db = distance(b.pos, user_pos);
        return da != db ? da < db : a.id < b.id;
    });
    ScheduleDecision out;
    double remaining = budget;
    for (const CovSite& c : order) {
        if (c.cost > remaining) continue;  // skip and keep walking outward
        remaining -= c.cost;
        out.scheduled.push_back(c.id);
        out.cost[c.id] = c.cost;
        out.spent += c.cost;
    }
    return out;
}

CoverageGrid make_coverage_grid(const channel::RegionGeometry& region, double cell_size) {
    CoverageGrid grid;
    grid.cell_size = cell_size;
    if (region.circular) {
        const double r = region.radius;
        const int n = static_cast<int>(std::ceil(2.0 * r / cell_size));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Vec2 p{region.center.x - r + (i + 0.5) * cell_size,
                             region.center.y - r + (j + 0.5) * cell_size};
                if (distance(p, region.center) <= r) grid.cells.push_back(p);
            }
        }
    } else {
        const int ni = static_cast<int>(std::ceil(2.0 * region.half_long / cell_size));
        const int nj = static_cast<int>(std::ceil(2.0 * region.half_lat / cell_size));
        const double c = std::cos(region.heading), s = std::sin(region.heading);
        for (int i = 0; i < ni; ++i) {
            for (int j = 0; j < nj; ++j) {
                const double lx = -region.half_long + (i + 0.5) * cell_size;
                const double ly = -region.half_lat + (j + 0.5) * cell_size;
                grid.cells.push_back(
                    {region.center.x + lx * c - ly * s, region.center.y + lx * s + ly * c});
            }
        }
    }
    return grid;
}

ScheduleDecision greedy_area(std::span<const CovSite> covs, const CoverageGrid& grid,
                             std::span<const Rect> buildings, double sensing_range,
                             double budget) {
    // Coverage bitmaps per CoV against the region cells.
    std::vector<std::vector<char>> covers(covs.size(),
                                          std::vector<char>(grid.cells.size(), 0));
    for (std::size_t i = 0; i < covs.size(); ++i) {
        for (std::size_t k = 0; k < grid.cells.size(); ++k) {
            const Vec2 cell = grid.cells[k];
            if (distance(covs[i].pos, cell) > sensing_range) continue;
            bool blocked = false;
            for (const Rect& b : buildings) {
                if (segment_intersects_rect_open(covs[i].pos, cell, b)) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) covers[i][k] = 1;
        }
    }

    ScheduleDecision out;
    std::vector<char> covered(grid.cells.size(), 0);
    std::vector<char> taken(covs.size(), 0);
    double remaining = budget;
    while (true) {
        int best = -1;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < covs.size(); ++i) {
            if (taken[i] || covs[i].cost > remaining) continue;
            int fresh = 0;
            for (std::size_t k = 0; k < grid.cells.size(); ++k) {
                fresh += covers[i][k] && !covered[k];
            }
            const double ratio = fresh / covs[i].cost;
            if (ratio > best_ratio ||
                (ratio == best_ratio && best >= 0 && ratio > 0.0 &&
                 covs[i].id < covs[best].id)) {
                best_ratio = ratio;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        taken[best] = 1;
        remaining -= covs[best].cost;
        out.scheduled.push_back(covs[best].id);
        out.cost[covs[best].id] = covs[best].cost;
        out.spent += covs[best].cost;
        for (std::size_t k = 0; k < grid.cells.size(); ++k) {
            if (covers[best][k]) covered[k] = 1;
        }
    }
    return out;
}

std::set<ObjId> cpm_baseline(const topology::PerceptionTopology& truth,
                             std::span<const CovId> covs) {
    std::set<ObjId> out;
    for (CovId i : covs) {
        if (const auto* f = truth.first_of(i)) out.insert(f->begin(), f->end());
    }
    return out;
}

namespace {

// DFS over subsets with cost pruning; incremental per-object hit counters so
// a node costs only the touched sets.
struct OptimalSearch {
    std::vector<CovId> covs;               // candidates sorted by cost asc
    std::vector<double> cost;
    std::vector<ObjId> objects;
    std::vector<double> weight;
    std::map<ObjId, int> obj_idx;
    std::vector<std::vector<int>> firsts;  // per candidate: dense object ids
    // pair lists between candidate indices (and with preselected "anchors")
    std::vector<std::vector<std::pair<int, std::vector<int>>>> pairs;

    std::vector<int> hits;        // per object: covering singles/pairs active
    std::vector<char> chosen;
    double utility = 0.0;
    double best_utility = -1.0;
    std::vector<char> best_set;
    double spent_base = 0.0;

    void toggle_obj(int n, int delta) {
        const int before = hits[n];
        hits[n] += delta;
        if (before == 0 && hits[n] > 0) utility += weight[n];
        if (before > 0 && hits[n] == 0) utility -= weight[n];
    }

    void apply(int i, int delta) {
        for (int n : firsts[i]) toggle_obj(n, delta);
        for (const auto& [j, objs] : pairs[i]) {
            if (j >= 0 && !chosen[j]) continue;  // partner not in the set
            for (int n : objs) toggle_obj(n, delta);
        }
    }

    void dfs(std::size_t i, double remaining) {
        if (utility > best_utility) {
            best_utility = utility;
            best_set.assign(chosen.begin(), chosen.end());
        }
        if (i >= covs.size()) return;
        if (cost[i] > remaining) return;  // sorted: nothing deeper fits either
        // Include covs[i].
        chosen[i] = 1;
        apply(static_cast<int>(i), +1);
        dfs(i + 1, remaining - cost[i]);
        apply(static_cast<int>(i), -1);
        chosen[i] = 0;
        // Exclude covs[i].
        dfs(i + 1, remaining);
    }
};

}  // namespace

OptimalResult offline_optimal(const Instance& inst,
                              std::span<const scheduler::Preselected> preselected,
                              int cap) {
    if (static_cast<int>(inst.covs.size()) > cap) {
        throw std::invalid_argument("offline_optimal: instance too large (" +
                                    std::to_string(inst.covs.size()) + " CoVs, cap " +
                                    std::to_string(cap) + ")");
    }

    OptimalSearch search;
    std::set<CovId> pre_ids;
    for (const auto& p : preselected) pre_ids.insert(p.cov);
    for (CovId i : inst.covs) {
        if (!pre_ids.count(i)) search.covs.push_back(i);
    }
    std::sort(search.covs.begin(), search.covs.end(), [&](CovId a, CovId b) {
        const double ca = inst.costs.at(a), cb = inst.costs.at(b);
        return ca != cb ? ca < cb : a < b;
    });
    for (CovId i : search.covs) search.cost.push_back(inst.costs.at(i));

    for (const auto& [n, w] : inst.weights) {
        search.obj_idx[n] = static_cast<int>(search.objects.size());
        search.objects.push_back(n);
        search.weight.push_back(w);
    }
    search.hits.assign(search.objects.size(), 0);
    search.chosen.assign(search.covs.size(), 0);
    search.firsts.assign(search.covs.size(), {});
    search.pairs.assign(search.covs.size(), {});

    std::map<CovId, int> idx;
    for (std::size_t i = 0; i < search.covs.size(); ++i) idx[search.covs[i]] = static_cast<int>(i);

    const auto dense_objs = [&](const std::set<ObjId>& objs) {
        std::vector<int> out;
        for (ObjId n : objs) {
            const auto it = search.obj_idx.find(n);
            if (it != search.obj_idx.end()) out.push_back(it->second);
        }
        return out;
    };

    for (std::size_t i = 0; i < search.covs.size(); ++i) {
        if (const auto* f = inst.topo.first_of(search.covs[i])) {
            search.firsts[i] = dense_objs(*f);
        }
    }
    for (const auto& [pair, objs] : inst.topo.second) {
        if (objs.empty()) continue;
        const auto ia = idx.find(pair.a);
        const auto ib = idx.find(pair.b);
        const bool pa = pre_ids.count(pair.a), pb = pre_ids.count(pair.b);
        auto dense = dense_objs(objs);
        if (ia != idx.end() && ib != idx.end()) {
            // Register on the later index so the earlier choice is known.
            const int lo = std::min(ia->second, ib->second);
            const int hi = std::max(ia->second, ib->second);
            search.pairs[hi].emplace_back(lo, std::move(dense));
        } else if (ia != idx.end() && pb) {
            search.pairs[ia->second].emplace_back(-1, std::move(dense));  // anchored pair
        } else if (ib != idx.end() && pa) {
            search.pairs[ib->second].emplace_back(-1, std::move(dense));
        }
    }

    // Preselected members are always in: seed the counters with their
    // first-order sets and their internal pairs.
    std::vector<CovId> pre_list(pre_ids.begin(), pre_ids.end());
    for (ObjId n : topology::compose(inst.topo, pre_list)) {
        const auto it = search.obj_idx.find(n);
        if (it != search.obj_idx.end()) search.toggle_obj(it->second, +1);
    }
    for (const auto& p : preselected) search.spent_base += p.cost;

    search.dfs(0, inst.budget - search.spent_base);

    OptimalResult out;
    out.utility = search.best_utility;
    out.covs = pre_list;
    out.spent = search.spent_base;
    for (std::size_t i = 0; i < search.covs.size(); ++i) {
        if (search.best_set.size() > i && search.best_set[i]) {
            out.covs.push_back(search.covs[i]);
            out.spent += search.cost[i];
        }
    }
    std::sort(out.covs.begin(), out.covs.end());
    return out;
}

namespace {

void put_object(Instance& inst, ObjId n, double w) { inst.weights[n] = w; }

}  // namespace

Instance make_fixture(const FixtureSpec& spec) {
    using Family = FixtureSpec::Family;
    Instance inst;
    inst.budget = spec.budget;

    switch (spec.family) {
        case Family::Example1: {
            // Object m needs u1+u2 jointly; each v_k alone sees the light
            // object n_k. Greedy on actual utility collects only epsilons.
            if (spec.n < 1 || spec.epsilon <= 0.0) {
                throw std::invalid_argument("example1: need n >= 1, epsilon > 0");
            }
            const CovId u1 = 1, u2 = 2;
            const ObjId m = 1000;
            inst.covs = {u1, u2};
            inst.costs[u1] = inst.costs[u2] = 1.0;
            put_object(inst, m, 1.0);
            inst.topo.second[{u1, u2}].insert(m);
            for (int k = 0; k < spec.n; ++k) {
                const CovId v = 3 + k;
                const ObjId nk = 2000 + k;
                inst.covs.push_back(v);
                inst.costs[v] = 1.0;
                put_object(inst, nk, spec.epsilon);
                inst.topo.first[v].insert(nk);
            }
            break;
        }
        case Family::Example2: {
            // Pair (u_i, v_i) jointly sees the heavy m_i; v_i alone sees the
            // light n_i, so pending-greedy chases v's and never closes pairs.
            if (spec.n < 1 || spec.epsilon <= 0.0) {
                throw std::invalid_argument("example2: need n >= 1, epsilon > 0");
            }
            for (int k = 0; k < spec.n; ++k) {
                const CovId u = 1 + k, v = 100 + k;
                const ObjId m = 1000 + k, nk = 2000 + k;
                inst.covs.push_back(u);
                inst.covs.push_back(v);
                inst.costs[u] = inst.costs[v] = 1.0;
                put_object(inst, m, 1.0);
                put_object(inst, nk, spec.epsilon);
                inst.topo.second[{u, v}].insert(m);
                inst.topo.first[v].insert(nk);
            }
            std::sort(inst.covs.begin(), inst.covs.end());
            break;
        }
        case Family::Example3: {
            // n groups; in each, a common CoV pairs with `degree` satellites,
            // one unit object per pair.
            if (spec.n < 1 || spec.degree < 1) {
                throw std::invalid_argument("example3: need n >= 1, degree >= 1");
            }
            ObjId next_obj = 1;
            for (int g = 0; g < spec.n; ++g) {
                const CovId common = 1 + g;
                inst.covs.push_back(common);
                inst.costs[common] = 1.0;
                for (int k = 0; k < spec.degree; ++k) {
                    const CovId sat = 100 + g * spec.degree + k;
                    inst.covs.push_back(sat);
                    inst.costs[sat] = 1.0;
                    const ObjId n = next_obj++;
                    put_object(inst, n, 1.0);
                    inst.topo.second[{common, sat}].insert(n);
                }
            }
            std::sort(inst.covs.begin(), inst.covs.end());
            break;
        }
        case Family::Example4: {
            // Group 1: degree CoVs split into subgroups of size L; each
            // in-subgroup pair sees an object of weight sqrt(C). Group 2:
            // degree CoVs where every pair sees a unit object.
            if (spec.degree < 2 || spec.lookahead < 2) {
                throw std::invalid_argument("example4: need degree >= 2, lookahead >= 2");
            }
            ObjId next_obj = 1;
            const double heavy = std::sqrt(static_cast<double>(spec.degree));
            for (int g = 0; g * spec.lookahead < spec.degree; ++g) {
                std::vector<CovId> sub;
                for (int k = 0; k < spec.lookahead && g * spec.lookahead + k < spec.degree; ++k) {
                    const CovId c = 1 + g * spec.lookahead + k;
                    sub.push_back(c);
                    inst.covs.push_back(c);
                    inst.costs[c] = 1.0;
                }
                for (std::size_t a = 0; a < sub.size(); ++a) {
                    for (std::size_t b = a + 1; b < sub.size(); ++b) {
                        const ObjId n = next_obj++;
                        put_object(inst, n, heavy);
                        inst.topo.second[{sub[a], sub[b]}].insert(n);
                    }
                }
            }
            std::vector<CovId> grp2;
            for (int k = 0; k < spec.degree; ++k) {
                const CovId c = 1000 + k;
                grp2.push_back(c);
                inst.covs.push_back(c);
                inst.costs[c] = 1.0;
            }
            for (std::size_t a = 0; a < grp2.size(); ++a) {
                for (std::size_t b = a + 1; b < grp2.size(); ++b) {
                    const ObjId n = next_obj++;
                    put_object(inst, n, 1.0);
                    inst.topo.second[{grp2[a], grp2[b]}].insert(n);
                }
            }
            std::sort(inst.covs.begin(), inst.covs.end());
            break;
        }
        case Family::Random: {
            Rng rng(spec.seed);
            return random_instance(rng);
        }
    }
    return inst;
}

Instance random_instance(Rng& rng, int max_covs, int max_objects, bool unit_costs,
                         double budget) {
    Instance inst;
    const int v = 2 + static_cast<int>(rng.uniform_int(std::max(1, max_covs - 1)));
    const int o = 1 + static_cast<int>(rng.uniform_int(std::max(1, max_objects)));
    for (int i = 0; i < v; ++i) {
        const CovId id = i + 1;
        inst.covs.push_back(id);
        inst.costs[id] = unit_costs ? 1.0 : rng.uniform(1.0, 4.0);
    }
    for (int n = 0; n < o; ++n) {
        const ObjId id = 100 + n;
        double w;
        do { w = rng.uniform(); } while (w == 0.0);
        inst.weights[id] = w;
        if (v >= 2 && rng.uniform() < 0.5) {
            // Pair assignment.
            const int a = static_cast<int>(rng.uniform_int(v));
            int b;
            do { b = static_cast<int>(rng.uniform_int(v)); } while (b == a);
            inst.topo.second[{inst.covs[a], inst.covs[b]}].insert(id);
        } else {
            const int a = static_cast<int>(rng.uniform_int(v));
            inst.topo.first[inst.covs[a]].insert(id);
        }
    }
    if (budget >= 0.0) {
        inst.budget = budget;
    } else {
        double total = 0.0;
        for (const auto& [i, c] : inst.costs) total += c;
        inst.budget = rng.uniform(1.0, std::max(1.5, total));
    }
    return inst;
}

}  // namespace cmass::baselines
