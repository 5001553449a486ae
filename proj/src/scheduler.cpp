#include "cmass/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cmass/kernels.hpp"

namespace cmass::scheduler {

void Instance::validate() const {
    for (CovId i : covs) {
        const auto it = costs.find(i);
        if (it == costs.end() || !(it->second >= 0.0)) {
            throw std::invalid_argument("instance: missing or negative cost for CoV " +
                                        std::to_string(i));
        }
    }
    if (!(budget >= 0.0)) throw std::invalid_argument("instance: negative budget");
    for (const auto& [cov, objs] : topo.first) {
        for (ObjId n : objs) {
            if (!weights.count(n)) {
                throw std::invalid_argument("instance: unweighted object " + std::to_string(n));
            }
        }
    }
    for (const auto& [pair, objs] : topo.second) {
        for (ObjId n : objs) {
            if (!weights.count(n)) {
                throw std::invalid_argument("instance: unweighted object " + std::to_string(n));
            }
        }
    }
}

double actual_utility(const Instance& inst, std::span<const CovId> s) {
    double total = 0.0;
    for (ObjId n : topology::compose(inst.topo, s)) total += inst.weights.at(n);
    return total;
}

double pending_utility(const Instance& inst, std::span<const CovId> s) {
    const std::set<ObjId> detected = topology::compose(inst.topo, s);
    double total = 0.0;
    for (ObjId n : detected) total += inst.weights.at(n);

    std::set<CovId> in(s.begin(), s.end());
    for (const auto& [n, w] : inst.weights) {
        if (detected.count(n)) continue;
        double credit = 0.0;
        for (CovId i : s) {
            for (CovId j : inst.covs) {
                if (in.count(j)) continue;
                const auto* pair = inst.topo.second_of(i, j);
                if (!pair || !pair->count(n)) continue;
                const double bi = inst.costs.at(i), bj = inst.costs.at(j);
                credit = std::max(credit, bi / (bi + bj));
            }
        }
        total += w * credit;
    }
    return total;
}

double hybrid_utility(const Instance& inst, std::span<const CovId> s, double lambda) {
    return lambda * pending_utility(inst, s) + (1.0 - lambda) * actual_utility(inst, s);
}

int collaboration_degree(const PerceptionTopology& topo, std::span<const CovId> covs) {
    int best = 0;
    for (CovId i : covs) {
        int deg = 0;
        for (CovId j : covs) {
            if (i == j) continue;
            const auto* s = topo.second_of(i, j);
            if (s && !s->empty()) ++deg;
        }
        best = std::max(best, deg);
    }
    return best;
}

double gamma_of(int degree) {
    if (degree <= 0) return 1.0;
    if (degree == 1) return 1.0 / 6.0;
    return 1.0 / (6.0 * degree + 2.0);
}

double auto_mix_weight(int degree) {
    const double lambda = 1.0 / (degree + 1.0);
    return std::clamp(lambda, 1e-9, 1.0 - 1e-9);
}

namespace {

// Dense-index view of an instance plus any extra zero/extra-cost preselected
// participants so the greedy can run on flat arrays.
struct Dense {
    std::vector<CovId> covs;    // participants, ascending id
    std::vector<ObjId> objects;
    std::vector<double> w;
    std::vector<double> cost;
    std::vector<std::vector<double>> p;  // per cov: detection-level row
    std::vector<std::vector<std::pair<int, std::vector<int>>>> partners;
    // partners[i]: (j, objects in P2(i,j)) in dense indices
};

Dense build_dense(const Instance& inst, std::span<const Preselected> preselected) {
    Dense d;
    d.covs = inst.covs;
    for (const Preselected& p : preselected) {
        if (std::find(d.covs.begin(), d.covs.end(), p.cov) == d.covs.end()) {
            d.covs.push_back(p.cov);
        }
    }
    std::sort(d.covs.begin(), d.covs.end());
    d.covs.erase(std::unique(d.covs.begin(), d.covs.end()), d.covs.end());

    for (const auto& [n, w] : inst.weights) {
        d.objects.push_back(n);
        d.w.push_back(w);
    }

    std::map<CovId, int> cov_idx;
    for (int i = 0; i < static_cast<int>(d.covs.size()); ++i) cov_idx[d.covs[i]] = i;
    std::map<ObjId, int> obj_idx;
    for (int n = 0; n < static_cast<int>(d.objects.size()); ++n) obj_idx[d.objects[n]] = n;

    d.cost.assign(d.covs.size(), 0.0);
    for (std::size_t i = 0; i < d.covs.size(); ++i) {
        const auto it = inst.costs.find(d.covs[i]);
        if (it != inst.costs.end()) d.cost[i] = it->second;
    }
    for (const Preselected& p : preselected) d.cost[cov_idx.at(p.cov)] = p.cost;

    const std::size_t v = d.covs.size(), o = d.objects.size();
    d.p.assign(v, std::vector<double>(o, 0.0));
    d.partners.assign(v, {});

    for (const auto& [pair, objs] : inst.topo.second) {
        const auto ia = cov_idx.find(pair.a);
        const auto ib = cov_idx.find(pair.b);
        if (ia == cov_idx.end() || ib == cov_idx.end() || objs.empty()) continue;
        const int i = ia->second, j = ib->second;
        const double share_i = d.cost[i] / (d.cost[i] + d.cost[j]);
        const double share_j = d.cost[j] / (d.cost[i] + d.cost[j]);
        std::vector<int> dense_objs;
        for (ObjId n : objs) {
            const auto it = obj_idx.find(n);
            if (it == obj_idx.end()) continue;
            dense_objs.push_back(it->second);
            d.p[i][it->second] = std::max(d.p[i][it->second], share_i);
            d.p[j][it->second] = std::max(d.p[j][it->second], share_j);
        }
        d.partners[i].emplace_back(j, dense_objs);
        d.partners[j].emplace_back(i, std::move(dense_objs));
    }
    for (const auto& [cov, objs] : inst.topo.first) {
        const auto it = cov_idx.find(cov);
        if (it == cov_idx.end()) continue;
        for (ObjId n : objs) {
            const auto oit = obj_idx.find(n);
            if (oit != obj_idx.end()) d.p[it->second][oit->second] = 1.0;
        }
    }
    return d;
}

}  // namespace

ScheduleDecision hybrid_greedy(const Instance& inst, const SchedulerParams& params,
                               std::span<const Preselected> preselected,
                               const BonusMap* bonus, GreedyTrace* trace) {
    inst.validate();
    for (CovId i : inst.covs) {
        const bool pre = std::any_of(preselected.begin(), preselected.end(),
                                     [&](const Preselected& p) { return p.cov == i; });
        if (!pre && !(inst.costs.at(i) > 0.0)) {
            throw std::invalid_argument("hybrid_greedy: non-positive cost for CoV " +
                                        std::to_string(i));
        }
    }

    Dense dense = build_dense(inst, preselected);
    const int v = static_cast<int>(dense.covs.size());
    const std::size_t o = dense.objects.size();

    const int degree = collaboration_degree(inst.topo, dense.covs);
    const double lambda =
        params.mix_weight ? std::clamp(*params.mix_weight, 1e-9, 1.0 - 1e-9)
                          : auto_mix_weight(degree);

    std::vector<double> d(o, 0.0);
    std::vector<char> scheduled(v, 0);
    double remaining = inst.budget;

    ScheduleDecision decision;
    std::map<CovId, int> cov_idx;
    for (int i = 0; i < v; ++i) cov_idx[dense.covs[i]] = i;

    const auto apply = [&](int idx) {
        scheduled[idx] = 1;
        remaining -= dense.cost[idx];
        decision.scheduled.push_back(dense.covs[idx]);
        decision.cost[dense.covs[idx]] = dense.cost[idx];
        decision.spent += dense.cost[idx];
        kernels::max_update(d.data(), dense.p[idx].data(), o);
        for (const auto& [j, objs] : dense.partners[idx]) {
            if (scheduled[j]) continue;
            for (int n : objs) dense.p[j][n] = 1.0;
        }
    };

    if (trace) {
        *trace = {};
        trace->objects = dense.objects;
        trace->lambda = lambda;
    }
    for (const Preselected& p : preselected) {
        const int idx = cov_idx.at(p.cov);
        if (scheduled[idx]) continue;
        apply(idx);
        if (trace) trace->preselected.push_back(p.cov);
    }

    while (true) {
        // Any affordable CoV left at all?
        bool any_affordable = false;
        for (int i = 0; i < v && !any_affordable; ++i) {
            any_affordable = !scheduled[i] && dense.cost[i] <= remaining;
        }
        if (!any_affordable) break;

        RoundSnapshot snap;
        snap.budget_before = remaining;

        int best = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < v; ++i) {
            if (scheduled[i]) continue;
            const auto m = kernels::marginal_utilities(dense.w.data(), d.data(),
                                                       dense.p[i].data(), o);
            if (trace) {
                snap.candidates.push_back(dense.covs[i]);
                snap.marginal_actual.push_back(m.actual);
                snap.marginal_pending.push_back(m.pending);
            }
            if (dense.cost[i] > remaining) continue;
            double h = lambda * m.pending + (1.0 - lambda) * m.actual;
            if (bonus) {
                const auto it = bonus->find(dense.covs[i]);
                if (it != bonus->end()) h += it->second;
            }
            const double ratio = h / dense.cost[i];
            // Mathematically tied ratios (pair partners sharing one object)
            // differ only by rounding noise; resolve them by the id order
            // instead of the noise.
            if (ratio > best_ratio * (1.0 + 1e-12) && ratio > 0.0) {
                best_ratio = ratio;
                best = i;
            }
        }
        if (best < 0) break;  // nothing affordable adds utility

        apply(best);
        if (trace) {
            snap.chosen = dense.covs[best];
            snap.d_after = d;
            trace->rounds.push_back(std::move(snap));
        }
    }
    return decision;
}

namespace {

// Detection levels by definition: 1 for detected objects, otherwise the best
// cost split over pairs crossing the boundary of A.
std::vector<double> definitional_levels(const Instance& inst,
                                        std::span<const CovId> participants,
                                        std::span<const CovId> a,
                                        std::span<const ObjId> objects) {
    const std::set<ObjId> detected = topology::compose(inst.topo, a);
    const std::set<CovId> in(a.begin(), a.end());
    std::vector<double> d(objects.size(), 0.0);
    for (std::size_t k = 0; k < objects.size(); ++k) {
        const ObjId n = objects[k];
        if (detected.count(n)) {
            d[k] = 1.0;
            continue;
        }
        double level = 0.0;
        for (CovId i : a) {
            for (CovId j : participants) {
                if (in.count(j)) continue;
                const auto* pair = inst.topo.second_of(i, j);
                if (!pair || !pair->count(n)) continue;
                const double bi = inst.costs.count(i) ? inst.costs.at(i) : 0.0;
                const double bj = inst.costs.at(j);
                level = std::max(level, bi / (bi + bj));
            }
        }
        d[k] = level;
    }
    return d;
}

// Pending utility over an explicit participant universe (handles preselected
// members that are not instance CoVs).
double pending_value(const Instance& inst, std::span<const CovId> participants,
                     std::span<const CovId> a) {
    const std::set<ObjId> detected = topology::compose(inst.topo, a);
    const std::set<CovId> in(a.begin(), a.end());
    double total = 0.0;
    for (ObjId n : detected) total += inst.weights.at(n);
    for (const auto& [n, w] : inst.weights) {
        if (detected.count(n)) continue;
        double credit = 0.0;
        for (CovId i : a) {
            for (CovId j : participants) {
                if (in.count(j)) continue;
                const auto* pair = inst.topo.second_of(i, j);
                if (!pair || !pair->count(n)) continue;
                const double bi = inst.costs.count(i) ? inst.costs.at(i) : 0.0;
                const double bj = inst.costs.at(j);
                credit = std::max(credit, bi / (bi + bj));
            }
        }
        total += w * credit;
    }
    return total;
}

double actual_value(const Instance& inst, std::span<const CovId> a) {
    double total = 0.0;
    for (ObjId n : topology::compose(inst.topo, a)) total += inst.weights.at(n);
    return total;
}

bool close(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)}); }

}  // namespace

bool incremental_oracle_check(const Instance& inst, const GreedyTrace& trace,
                              std::string* why) {
    std::vector<CovId> participants = inst.covs;
    for (CovId c : trace.preselected) {
        if (std::find(participants.begin(), participants.end(), c) == participants.end()) {
            participants.push_back(c);
        }
    }
    std::vector<CovId> a(trace.preselected.begin(), trace.preselected.end());

    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
        const RoundSnapshot& round = trace.rounds[r];
        const double base_actual = actual_value(inst, a);
        const double base_pending = pending_value(inst, participants, a);
        for (std::size_t c = 0; c < round.candidates.size(); ++c) {
            std::vector<CovId> with = a;
            with.push_back(round.candidates[c]);
            const double da = actual_value(inst, with) - base_actual;
            const double dp = pending_value(inst, participants, with) - base_pending;
            if (!close(da, round.marginal_actual[c]) || !close(dp, round.marginal_pending[c])) {
                if (why) {
                    *why = "round " + std::to_string(r) + ", CoV " +
                           std::to_string(round.candidates[c]) +
                           ": incremental marginals diverge from definitions";
                }
                return false;
            }
        }
        a.push_back(round.chosen);
        const std::vector<double> d =
            definitional_levels(inst, participants, a, trace.objects);
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (!close(d[k], round.d_after[k])) {
                if (why) {
                    *why = "round " + std::to_string(r) + ", object " +
                           std::to_string(trace.objects[k]) +
                           ": levels diverge from the definition";
                }
                return false;
            }
        }
    }
    return true;
}

ScheduleDecision cmass_schedule(const topology::EmpiricalState& emp,
                                const Instance& inst, const SchedulerParams& params,
                                long t, std::span<const Preselected> preselected) {
    double remaining = inst.budget;
    for (const Preselected& p : preselected) remaining -= p.cost;

    // Forced exploration: never-scheduled CoVs, cheapest first, while they fit.
    std::vector<CovId> fresh;
    for (CovId i : inst.covs) {
        if (!emp.ever_scheduled(i)) fresh.push_back(i);
    }
    std::sort(fresh.begin(), fresh.end(), [&](CovId x, CovId y) {
        const double cx = inst.costs.at(x), cy = inst.costs.at(y);
        return cx != cy ? cx < cy : x < y;
    });
    std::vector<Preselected> pre(preselected.begin(), preselected.end());
    for (CovId i : fresh) {
        const double c = inst.costs.at(i);
        if (c <= remaining) {
            pre.push_back({i, c});
            remaining -= c;
        }
    }

    // Exploration bonuses for everyone else.
    BonusMap bonus;
    for (CovId i : inst.covs) {
        double b = 0.0;
        const auto u = emp.uncertainty.find(i);
        if (u != emp.uncertainty.end()) {
            for (ObjId n : u->second) {
                const auto w = inst.weights.find(n);
                if (w != inst.weights.end()) b += params.alpha * w->second;
            }
        }
        const auto tau = emp.last_seen_single.find(i);
        if (tau != emp.last_seen_single.end() && t > tau->second) {
            b += params.beta * std::sqrt(static_cast<double>(t - tau->second));
        }
        if (b > 0.0) bonus[i] = b;
    }

    return hybrid_greedy(inst, params, pre, bonus.empty() ? nullptr : &bonus);
}

std::string instance_to_json(const Instance& inst) {
    nlohmann::ordered_json j;
    j["covs"] = inst.covs;
    nlohmann::ordered_json costs;
    for (const auto& [i, c] : inst.costs) costs[std::to_string(i)] = c;
    j["costs"] = std::move(costs);
    nlohmann::ordered_json weights;
    for (const auto& [n, w] : inst.weights) weights[std::to_string(n)] = w;
    j["weights"] = std::move(weights);
    nlohmann::ordered_json first;
    for (const auto& [i, objs] : inst.topo.first) {
        first[std::to_string(i)] = std::vector<ObjId>(objs.begin(), objs.end());
    }
    j["first"] = std::move(first);
    nlohmann::ordered_json second = nlohmann::ordered_json::array();
    for (const auto& [pair, objs] : inst.topo.second) {
        second.push_back({{"i", pair.a},
                          {"j", pair.b},
                          {"objects", std::vector<ObjId>(objs.begin(), objs.end())}});
    }
    j["second"] = std::move(second);
    j["budget"] = inst.budget;
    return j.dump(2);
}

Instance instance_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    Instance inst;
    j.at("covs").get_to(inst.covs);
    for (const auto& [key, value] : j.at("costs").items()) {
        inst.costs[std::stoll(key)] = value.get<double>();
    }
    for (const auto& [key, value] : j.at("weights").items()) {
        inst.weights[std::stoll(key)] = value.get<double>();
    }
    if (j.contains("first")) {
        for (const auto& [key, value] : j.at("first").items()) {
            auto& objs = inst.topo.first[std::stoll(key)];
            for (const auto& n : value) objs.insert(n.get<ObjId>());
        }
    }
    if (j.contains("second")) {
        for (const auto& entry : j.at("second")) {
            auto& objs = inst.topo.second[topology::CovPair{entry.at("i").get<CovId>(),
                                                            entry.at("j").get<CovId>()}];
            for (const auto& n : entry.at("objects")) objs.insert(n.get<ObjId>());
        }
    }
    inst.budget = j.at("budget").get<double>();
    inst.validate();
    return inst;
}

}  // namespace cmass::scheduler
