#include "cmass/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace cmass::harness {

using json = nlohmann::ordered_json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Cmass: return "cmass";
        case Algorithm::CmassFirstOrder: return "first-order";
        case Algorithm::Closest: return "closest";
        case Algorithm::Area: return "area";
        case Algorithm::Cpm: return "cpm";
        case Algorithm::Optimal: return "optimal";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_string(const std::string& s) {
    if (s == "cmass") return Algorithm::Cmass;
    if (s == "first-order" || s == "cmass-1st") return Algorithm::CmassFirstOrder;
    if (s == "closest") return Algorithm::Closest;
    if (s == "area") return Algorithm::Area;
    if (s == "cpm") return Algorithm::Cpm;
    if (s == "optimal") return Algorithm::Optimal;
    return std::nullopt;
}

std::optional<SweepAxis> axis_from_string(const std::string& s) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(c)));
    if (t == "mpr") return SweepAxis::Mpr;
    if (t == "bandwidth") return SweepAxis::Bandwidth;
    if (t == "alpha") return SweepAxis::Alpha;
    if (t == "beta") return SweepAxis::Beta;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (frames < 1) throw std::invalid_argument("config: frames must be >= 1");
    if (world.mpr < 0.0 || world.mpr > 1.0)
        throw std::invalid_argument("config: mpr must be in [0, 1]");
    if (bandwidth_hz < 0.0) throw std::invalid_argument("config: bandwidth must be >= 0");
    if (world.frame_dt_s <= 0.0) throw std::invalid_argument("config: frame dt must be > 0");
    detection.validate();
}

namespace {

using scheduler::CovId;
using scheduler::ObjId;
using world::Agent;
using world::AgentId;
using world::AgentKind;

struct LinkInfo {
    double cost = 0.0;
    double distance = 0.0;
};

// Per-frame derived scene: user pose, weighted objects, and feasible CoVs
// with link costs. Identical across algorithms for a given seed because every
// random draw comes from a (seed, purpose, frame, id) substream.
struct FrameView {
    world::UserPose user;
    AgentId user_id = -1;  // -1 in edge mode
    channel::RegionGeometry region;
    std::map<ObjId, double> weights;
    std::set<ObjId> objects;
    std::map<CovId, LinkInfo> links;
    std::vector<CovId> covs;  // sorted keys of links
};

class Experiment {
public:
    explicit Experiment(const ExperimentConfig& cfg)
        : cfg_(cfg), map_(world::make_map(cfg.world)) {
        const std::size_t mid = map_.xs.size() / 2;
        edge_anchor_ = {map_.xs[mid], map_.ys[mid]};
        if (!cfg_.trace_path.empty()) {
            trace_frames_ = world::ingest_trace(cfg_.trace_path, cfg_.trace_format, cfg_.world);
            if (trace_frames_.empty()) throw std::invalid_argument("trace contains no frames");
        }
    }

    RunResult run() {
        RunResult result;
        world::FrameState frame;
        topology::EmpiricalState emp;
        sensing::PredictionState pred;

        double num = 0.0, denom = 0.0;
        double sum_candidates = 0.0, sum_scheduled = 0.0;

        const long frames = cfg_.trace_path.empty()
                                ? cfg_.frames
                                : std::min<long>(cfg_.frames,
                                                 static_cast<long>(trace_frames_.size()));
        for (long t = 0; t < frames; ++t) {
            if (!cfg_.trace_path.empty()) {
                frame = trace_frames_[t];
            } else if (t == 0) {
                frame = world::init_world(cfg_.world, map_, cfg_.seed);
            } else {
                frame = world::step_mobility(
                    frame, map_, cfg_.world,
                    Rng::substream(cfg_.seed, kMobTag, static_cast<std::uint64_t>(t)).next_u64());
            }
            resolve_user(frame);
            const FrameView view = build_view(frame, t);

            std::vector<CovId> participants = view.covs;
            if (view.user_id >= 0) {
                participants.push_back(view.user_id);
                std::sort(participants.begin(), participants.end());
            }

            std::map<CovId, sensing::ScanResult> scans;
            for (CovId i : participants) {
                scans.emplace(i, sensing::scan(*frame.find(i), frame, map_, cfg_.lidar));
            }
            const topology::PerceptionTopology truth = topology::ground_truth_topology(
                scans, view.objects, difficulties_, cfg_.detection);

            scheduler::ScheduleDecision decision;
            std::set<ObjId> detected;
            run_algorithm(view, truth, frame, t, emp, decision, detected);

            double g = 0.0;
            for (ObjId n : detected) g += view.weights.at(n);
            double total_w = 0.0;
            for (const auto& [n, w] : view.weights) total_w += w;
            num += g;
            denom += total_w;
            sum_candidates += static_cast<double>(view.covs.size());
            sum_scheduled += static_cast<double>(decision.scheduled.size());

            FrameRecord rec;
            rec.t = t;
            rec.algorithm = to_string(cfg_.algorithm);
            for (CovId i : decision.scheduled) {
                rec.scheduled.emplace_back(i, decision.cost.at(i));
            }
            std::sort(rec.scheduled.begin(), rec.scheduled.end());
            rec.bandwidth_used = decision.spent;
            rec.detected.assign(detected.begin(), detected.end());
            rec.utility = g;
            rec.total_weight = total_w;
            rec.cum_recall = denom > 0.0 ? num / denom : 0.0;
            result.records.push_back(std::move(rec));

            if (is_cmass(cfg_.algorithm)) {
                maintain_empirical(view, truth, t, frame, scans, decision, emp, pred,
                                   detected);
                if (cfg_.dump_empirical) {
                    result.empirical_dump.push_back(dump_empirical_line(t, emp));
                }
            }
        }

        result.summary.mode = cfg_.mode;
        result.summary.algorithm = cfg_.algorithm;
        result.summary.seed = cfg_.seed;
        result.summary.frames = frames;
        result.summary.weighted_recall = denom > 0.0 ? num / denom : 0.0;
        result.summary.mean_candidates = frames > 0 ? sum_candidates / frames : 0.0;
        result.summary.mean_scheduled = frames > 0 ? sum_scheduled / frames : 0.0;
        return result;
    }

private:
    static constexpr std::uint64_t kMobTag = 0x6d6f62;
    static constexpr std::uint64_t kChanTag = 0x6368616e;
    static constexpr std::uint64_t kDiffTag = 0x64696666;

    static bool is_cmass(Algorithm a) {
        return a == Algorithm::Cmass || a == Algorithm::CmassFirstOrder;
    }

    void resolve_user(const world::FrameState& frame) {
        if (cfg_.mode == Mode::Edge) return;
        if (user_id_ >= 0 && frame.find(user_id_)) return;
        for (const Agent& a : frame.agents) {
            if (a.kind == AgentKind::User) {
                user_id_ = a.id;
                return;
            }
        }
        for (const Agent& a : frame.agents) {
            if (a.kind == AgentKind::Cov) {
                user_id_ = a.id;
                return;
            }
        }
        throw std::runtime_error("distributed mode requires at least one CoV or user agent");
    }

    FrameView build_view(const world::FrameState& frame, long t) {
        FrameView view;
        if (cfg_.mode == Mode::Edge) {
            view.user = {edge_anchor_, 0.0};
        } else {
            const Agent* u = frame.find(user_id_);
            view.user = {u->pos, u->heading};
            view.user_id = user_id_;
        }

        world::InterestRegion region;
        if (cfg_.mode == Mode::Edge) {
            region.mode = world::InterestRegion::Mode::EdgeCircle;
            region.radius = cfg_.edge_radius_m;
            region.anchor = edge_anchor_;
        } else {
            region.mode = world::InterestRegion::Mode::DistributedRect;
            region.half_long = cfg_.rect_half_long_m;
            region.half_lat = cfg_.rect_half_lat_m;
        }
        view.region.circular = cfg_.mode == Mode::Edge;
        view.region.center = cfg_.mode == Mode::Edge ? edge_anchor_ : view.user.pos;
        view.region.radius = cfg_.edge_radius_m;
        view.region.half_long = cfg_.rect_half_long_m;
        view.region.half_lat = cfg_.rect_half_lat_m;
        view.region.heading = view.user.heading;

        for (const Agent& a : frame.agents) {
            const bool is_object =
                a.kind == AgentKind::Vehicle || a.kind == AgentKind::Pedestrian;
            if (!is_object) continue;
            const double w = world::importance_weight(a, region, view.user);
            if (w <= 0.0) continue;
            view.weights[a.id] = w;
            view.objects.insert(a.id);
            if (!difficulties_.count(a.id)) {
                Rng rng =
                    Rng::substream(cfg_.seed, kDiffTag, static_cast<std::uint64_t>(a.id));
                difficulties_[a.id] = detmodel::sample_difficulty(cfg_.detection, rng);
            }
        }

        // Link blockers: vehicle bodies (CoVs included), never pedestrians.
        std::vector<OrientedBox> bodies;
        std::vector<AgentId> body_ids;
        for (const Agent& a : frame.agents) {
            if (a.kind == AgentKind::Pedestrian) continue;
            bodies.push_back(a.body());
            body_ids.push_back(a.id);
        }

        for (const Agent& a : frame.agents) {
            const bool is_cov = a.kind == AgentKind::Cov || a.kind == AgentKind::User;
            if (!is_cov || a.id == view.user_id) continue;
            const double dist = distance(a.pos, view.user.pos);
            if (dist > cfg_.channel.max_comm_distance_m || dist <= 0.0) continue;

            std::vector<OrientedBox> blockers;
            for (std::size_t k = 0; k < bodies.size(); ++k) {
                if (body_ids[k] == a.id || body_ids[k] == view.user_id) continue;
                blockers.push_back(bodies[k]);
            }
            const channel::LinkState link =
                channel::classify_link(a.pos, view.user.pos, map_.buildings, blockers);

            Rng rng = Rng::substream(cfg_.seed, kChanTag, static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(a.id));
            double gain;
            if (cfg_.channel.shadowing_ar1_rho > 0.0) {
                const double rho = cfg_.channel.shadowing_ar1_rho;
                double& z = shadow_state_[a.id];
                z = rho * z + std::sqrt(1.0 - rho * rho) * rng.normal();
                const double sigma = link.cls == channel::LinkClass::NLOS
                                         ? cfg_.channel.shadowing_std_nlos_db
                                     : link.cls == channel::LinkClass::NLOSv
                                         ? cfg_.channel.shadowing_std_nlosv_db
                                         : cfg_.channel.shadowing_std_los_db;
                const double shadow_db = sigma * z;
                gain = channel::channel_gain(link, dist, cfg_.channel, rng, &shadow_db);
            } else {
                gain = channel::channel_gain(link, dist, cfg_.channel, rng);
            }

            const double bits = channel::feature_size_bits(a.pos, cfg_.lidar.max_range_m,
                                                           view.region, cfg_.channel);
            if (bits <= 0.0) continue;  // sensing disc misses the region: nothing to offer
            const auto cost = channel::min_bandwidth(bits, gain, cfg_.channel, frame.dt);
            if (!cost) continue;  // above the capacity ceiling this frame
            view.links[a.id] = {*cost, dist};
        }
        for (const auto& [id, info] : view.links) view.covs.push_back(id);
        return view;
    }

    scheduler::Instance make_instance(const FrameView& view,
                                      const topology::PerceptionTopology& topo) const {
        scheduler::Instance inst;
        inst.covs = view.covs;
        if (view.user_id >= 0) {
            inst.covs.push_back(view.user_id);
            std::sort(inst.covs.begin(), inst.covs.end());
            inst.costs[view.user_id] = 0.0;
        }
        for (const auto& [id, info] : view.links) inst.costs[id] = info.cost;
        inst.weights = view.weights;
        inst.budget = cfg_.bandwidth_hz;
        inst.topo = topo;
        return inst;
    }

    std::vector<scheduler::Preselected> user_preselect(const FrameView& view) const {
        if (view.user_id < 0) return {};
        return {scheduler::Preselected{view.user_id, 0.0}};
    }

    void run_algorithm(const FrameView& view, const topology::PerceptionTopology& truth,
                       const world::FrameState& frame, long t,
                       topology::EmpiricalState& emp, scheduler::ScheduleDecision& decision,
                       std::set<ObjId>& detected) {
        std::vector<CovId> fused;
        switch (cfg_.algorithm) {
            case Algorithm::Cmass:
            case Algorithm::CmassFirstOrder: {
                std::set<CovId> live(view.covs.begin(), view.covs.end());
                if (view.user_id >= 0) live.insert(view.user_id);
                topology::sync_population(emp, live, view.objects);
                scheduler::Instance inst = make_instance(view, emp.topo);
                if (cfg_.algorithm == Algorithm::CmassFirstOrder) inst.topo.second.clear();
                decision =
                    scheduler::cmass_schedule(emp, inst, cfg_.scheduler, t, user_preselect(view));
                fused = decision.scheduled;
                break;
            }
            case Algorithm::Closest: {
                std::vector<baselines::CovSite> sites;
                for (CovId i : view.covs) {
                    sites.push_back({i, frame.find(i)->pos, view.links.at(i).cost});
                }
                decision = baselines::closest_first(sites, view.user.pos, cfg_.bandwidth_hz);
                fused = decision.scheduled;
                break;
            }
            case Algorithm::Area: {
                std::vector<baselines::CovSite> sites;
                for (CovId i : view.covs) {
                    sites.push_back({i, frame.find(i)->pos, view.links.at(i).cost});
                }
                const baselines::CoverageGrid grid =
                    baselines::make_coverage_grid(view.region, cfg_.area_cell_m);
                decision = baselines::greedy_area(sites, grid, map_.buildings,
                                                  cfg_.lidar.max_range_m, cfg_.bandwidth_hz);
                fused = decision.scheduled;
                break;
            }
            case Algorithm::Cpm: {
                std::vector<CovId> all = view.covs;
                if (view.user_id >= 0) all.push_back(view.user_id);
                detected = baselines::cpm_baseline(truth, all);
                return;  // CPMs are broadcast; nothing scheduled or charged
            }
            case Algorithm::Optimal: {
                const scheduler::Instance inst = make_instance(view, truth);
                const auto pre = user_preselect(view);
                const baselines::OptimalResult best =
                    baselines::offline_optimal(inst, pre, cfg_.optimal_cap);
                for (CovId i : best.covs) {
                    const auto it = view.links.find(i);
                    const double c = it != view.links.end() ? it->second.cost : 0.0;
                    decision.scheduled.push_back(i);
                    decision.cost[i] = c;
                    decision.spent += c;
                }
                fused = best.covs;
                break;
            }
        }
        if (view.user_id >= 0 &&
            std::find(fused.begin(), fused.end(), view.user_id) == fused.end()) {
            fused.push_back(view.user_id);
        }
        detected = topology::compose(truth, fused);
    }

    void maintain_empirical(const FrameView& view, const topology::PerceptionTopology& truth,
                            long t, const world::FrameState& frame,
                            const std::map<CovId, sensing::ScanResult>& scans,
                            const scheduler::ScheduleDecision& decision,
                            topology::EmpiricalState& emp, sensing::PredictionState& pred,
                            const std::set<ObjId>& detected) {
        std::vector<CovId> replayed = decision.scheduled;
        if (view.user_id >= 0 &&
            std::find(replayed.begin(), replayed.end(), view.user_id) == replayed.end()) {
            replayed.push_back(view.user_id);
        }
        topology::replay(emp, replayed, truth, t);

        std::map<CovId, std::set<ObjId>> los_now;
        for (const auto& [cov, scan] : scans) {
            auto& s = los_now[cov];
            for (ObjId n : scan.visible) {
                if (view.objects.count(n)) s.insert(n);
            }
        }

        for (ObjId n : detected) {
            const Agent* a = frame.find(n);
            if (a) pred.observe(n, a->pos, t);
        }
        std::vector<CovId> participants;
        for (const auto& [cov, scan] : scans) participants.push_back(cov);
        pred = sensing::predict_los(pred, frame, map_, participants, cfg_.lidar);

        if (cfg_.refinement) topology::refine(emp, pred.predicted_los);
        topology::update_uncertainty(emp, replayed, los_now, pred.predicted_los, view.objects);
        emp.prev_los = std::move(los_now);
    }

    static std::string dump_empirical_line(long t, const topology::EmpiricalState& emp) {
        json j;
        j["t"] = t;
        json first;
        for (const auto& [cov, objs] : emp.topo.first) {
            first[std::to_string(cov)] = std::vector<ObjId>(objs.begin(), objs.end());
        }
        j["first"] = std::move(first);
        json second = json::array();
        for (const auto& [pair, objs] : emp.topo.second) {
            if (objs.empty()) continue;
            second.push_back({{"i", pair.a},
                              {"j", pair.b},
                              {"objects", std::vector<ObjId>(objs.begin(), objs.end())}});
        }
        j["second"] = std::move(second);
        json tau;
        for (const auto& [cov, when] : emp.last_seen_single) tau[std::to_string(cov)] = when;
        j["tau"] = std::move(tau);
        json unc;
        for (const auto& [cov, objs] : emp.uncertainty) {
            if (!objs.empty()) {
                unc[std::to_string(cov)] = std::vector<ObjId>(objs.begin(), objs.end());
            }
        }
        j["uncertainty"] = std::move(unc);
        return j.dump();
    }

    const ExperimentConfig& cfg_;
    world::MapGeometry map_;
    Vec2 edge_anchor_;
    AgentId user_id_ = -1;
    std::vector<world::FrameState> trace_frames_;
    std::map<ObjId, double> difficulties_;
    std::map<CovId, double> shadow_state_;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Experiment exp(cfg);
    return exp.run();
}

std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<double>& values, int seeds, int threads) {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    if (seeds < 1) throw std::invalid_argument("sweep: seeds must be >= 1");

    struct Task {
        std::size_t cell;
        int seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < values.size(); ++c) {
        for (int s = 0; s < seeds; ++s) tasks.push_back({c, s});
    }
    std::vector<double> recalls(tasks.size(), 0.0);
    std::vector<std::string> errors(tasks.size());

    std::atomic<std::size_t> next{0};
    const int n_threads =
        threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) break;
            ExperimentConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(tasks[k].seed_index);
            switch (axis) {
                case SweepAxis::Mpr: cfg.world.mpr = values[tasks[k].cell]; break;
                case SweepAxis::Bandwidth: cfg.bandwidth_hz = values[tasks[k].cell]; break;
                case SweepAxis::Alpha: cfg.scheduler.alpha = values[tasks[k].cell]; break;
                case SweepAxis::Beta: cfg.scheduler.beta = values[tasks[k].cell]; break;
            }
            try {
                recalls[k] = run_experiment(cfg).summary.weighted_recall;
            } catch (const std::exception& e) {
                errors[k] = "cell value=" + std::to_string(values[tasks[k].cell]) +
                            " seed=" + std::to_string(cfg.seed) + ": " + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const std::string& e : errors) {
        if (!e.empty()) throw std::runtime_error("sweep: " + e);
    }

    std::vector<SweepCell> cells;
    for (std::size_t c = 0; c < values.size(); ++c) {
        SweepCell cell;
        cell.value = values[c];
        cell.seeds = seeds;
        double sum = 0.0;
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (tasks[k].cell == c) sum += recalls[k];
        }
        cell.mean_recall = sum / seeds;
        double var = 0.0;
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (tasks[k].cell == c) {
                var += (recalls[k] - cell.mean_recall) * (recalls[k] - cell.mean_recall);
            }
        }
        cell.std_recall = seeds > 1 ? std::sqrt(var / (seeds - 1)) : 0.0;
        cells.push_back(cell);
    }
    return cells;
}

void emit_outputs(const ExperimentConfig& cfg, const RunResult& result,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "frames.jsonl");
        if (!out) throw std::runtime_error("cannot write frames.jsonl");
        for (const FrameRecord& r : result.records) {
            json j;
            j["t"] = r.t;
            j["algo"] = r.algorithm;
            json sched = json::array();
            for (const auto& [id, cost] : r.scheduled) {
                sched.push_back(json{{"id", id}, {"cost_hz", cost}});
            }
            j["scheduled"] = std::move(sched);
            j["bandwidth_used_hz"] = r.bandwidth_used;
            j["detected"] = r.detected;
            j["utility"] = r.utility;
            j["total_weight"] = r.total_weight;
            j["cum_recall"] = r.cum_recall;
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "summary.csv");
        if (!out) throw std::runtime_error("cannot write summary.csv");
        out << "mode,algorithm,seed,frames,weighted_recall,mean_candidates,mean_scheduled\n";
        const RunSummary& s = result.summary;
        out << (s.mode == Mode::Edge ? "edge" : "distributed") << ','
            << to_string(s.algorithm) << ',' << s.seed << ',' << s.frames << ','
            << json(s.weighted_recall).dump() << ',' << json(s.mean_candidates).dump()
            << ',' << json(s.mean_scheduled).dump() << "\n";
    }
    {
        std::ofstream out(dir / "config.resolved.json");
        if (!out) throw std::runtime_error("cannot write config.resolved.json");
        out << config_to_json(cfg) << "\n";
    }
    if (!result.empirical_dump.empty()) {
        std::ofstream out(dir / "empirical.jsonl");
        if (!out) throw std::runtime_error("cannot write empirical.jsonl");
        for (const std::string& line : result.empirical_dump) out << line << "\n";
    }
}

namespace {

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it != j.end()) it->get_to(out);
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    const json j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    ExperimentConfig cfg;

    std::string mode = "edge";
    get_to_if(j, "mode", mode);
    if (mode == "edge") {
        cfg.mode = Mode::Edge;
    } else if (mode == "distributed") {
        cfg.mode = Mode::Distributed;
    } else {
        throw std::invalid_argument("config: unknown mode '" + mode + "'");
    }
    get_to_if(j, "frames", cfg.frames);
    get_to_if(j, "seed", cfg.seed);
    std::string algo = to_string(cfg.algorithm);
    get_to_if(j, "algorithm", algo);
    const auto parsed = algorithm_from_string(algo);
    if (!parsed) throw std::invalid_argument("config: unknown algorithm '" + algo + "'");
    cfg.algorithm = *parsed;
    get_to_if(j, "bandwidth_hz", cfg.bandwidth_hz);
    get_to_if(j, "out_dir", cfg.out_dir);
    get_to_if(j, "optimal_cap", cfg.optimal_cap);
    get_to_if(j, "area_cell_m", cfg.area_cell_m);
    get_to_if(j, "dump_empirical", cfg.dump_empirical);

    if (j.contains("world")) {
        const json& w = j["world"];
        get_to_if(w, "blocks", cfg.world.blocks);
        get_to_if(w, "block_side_m", cfg.world.block_side_m);
        get_to_if(w, "street_width_m", cfg.world.street_width_m);
        get_to_if(w, "lane_width_m", cfg.world.lane_width_m);
        get_to_if(w, "building_inset_m", cfg.world.building_inset_m);
        get_to_if(w, "building_height_m", cfg.world.building_height_m);
        get_to_if(w, "vehicles", cfg.world.vehicles);
        get_to_if(w, "mpr", cfg.world.mpr);
        get_to_if(w, "speed_limit_kmh", cfg.world.speed_limit_kmh);
        get_to_if(w, "headway_s", cfg.world.headway_s);
        get_to_if(w, "pedestrian_rate_per_s", cfg.world.pedestrian_rate_per_s);
        get_to_if(w, "pedestrian_speed_ms", cfg.world.pedestrian_speed_ms);
        get_to_if(w, "vehicle_length_m", cfg.world.vehicle_length_m);
        get_to_if(w, "vehicle_width_m", cfg.world.vehicle_width_m);
        get_to_if(w, "object_height_m", cfg.world.object_height_m);
        get_to_if(w, "pedestrian_diameter_m", cfg.world.pedestrian_diameter_m);
        get_to_if(w, "frame_dt_s", cfg.world.frame_dt_s);
        std::string trace;
        get_to_if(w, "trace", trace);
        cfg.trace_path = trace;
        std::string fmt = "jsonl";
        get_to_if(w, "trace_format", fmt);
        cfg.trace_format = fmt == "csv" ? world::TraceFormat::Csv : world::TraceFormat::Jsonl;
    }
    if (j.contains("lidar")) {
        const json& l = j["lidar"];
        get_to_if(l, "lasers", cfg.lidar.n_lasers);
        get_to_if(l, "vertical_fov_deg", cfg.lidar.vertical_fov_deg);
        get_to_if(l, "azimuth_res_deg", cfg.lidar.azimuth_res_deg);
        get_to_if(l, "max_range_m", cfg.lidar.max_range_m);
        get_to_if(l, "mount_height_m", cfg.lidar.mount_height_m);
    }
    cfg.lidar.building_height_m = cfg.world.building_height_m;
    if (j.contains("detection")) {
        const json& d = j["detection"];
        get_to_if(d, "p_norm", cfg.detection.p);
        get_to_if(d, "difficulty_scale", cfg.detection.difficulty_scale);
        get_to_if(d, "difficulty_bias", cfg.detection.difficulty_bias);
    }
    if (j.contains("channel")) {
        const json& c = j["channel"];
        get_to_if(c, "carrier_ghz", cfg.channel.carrier_ghz);
        get_to_if(c, "tx_power_dbm", cfg.channel.tx_power_dbm);
        get_to_if(c, "noise_psd_dbm_hz", cfg.channel.noise_psd_dbm_hz);
        get_to_if(c, "noise_figure_db", cfg.channel.noise_figure_db);
        get_to_if(c, "shadowing_std_los_db", cfg.channel.shadowing_std_los_db);
        get_to_if(c, "shadowing_std_nlosv_db", cfg.channel.shadowing_std_nlosv_db);
        get_to_if(c, "shadowing_std_nlos_db", cfg.channel.shadowing_std_nlos_db);
        get_to_if(c, "shadowing_ar1_rho", cfg.channel.shadowing_ar1_rho);
        get_to_if(c, "blocker_loss_mean_db", cfg.channel.blocker_loss_mean_db);
        get_to_if(c, "blocker_loss_var_db2", cfg.channel.blocker_loss_var_db2);
        get_to_if(c, "rician_k_db", cfg.channel.rician_k_db);
        get_to_if(c, "fading", cfg.channel.fading);
        get_to_if(c, "max_comm_distance_m", cfg.channel.max_comm_distance_m);
        get_to_if(c, "feature_mb_full_region", cfg.channel.feature_mb_full_region);
        get_to_if(c, "feature_floor_mb", cfg.channel.feature_floor_mb);
        get_to_if(c, "mb_bytes", cfg.channel.mb_bytes);
        if (c.contains("pathloss_los")) {
            const json& p = c["pathloss_los"];
            get_to_if(p, "a", cfg.channel.pathloss_los.a);
            get_to_if(p, "b", cfg.channel.pathloss_los.b);
            get_to_if(p, "c", cfg.channel.pathloss_los.c);
        }
        if (c.contains("pathloss_nlos")) {
            const json& p = c["pathloss_nlos"];
            get_to_if(p, "a", cfg.channel.pathloss_nlos.a);
            get_to_if(p, "b", cfg.channel.pathloss_nlos.b);
            get_to_if(p, "c", cfg.channel.pathloss_nlos.c);
        }
    }
    if (j.contains("region")) {
        const json& r = j["region"];
        get_to_if(r, "edge_radius_m", cfg.edge_radius_m);
        get_to_if(r, "rect_half_long_m", cfg.rect_half_long_m);
        get_to_if(r, "rect_half_lat_m", cfg.rect_half_lat_m);
    }
    if (j.contains("scheduler")) {
        const json& s = j["scheduler"];
        if (s.contains("mix_weight")) {
            if (s["mix_weight"].is_string()) {
                if (s["mix_weight"].get<std::string>() != "auto") {
                    throw std::invalid_argument("config: mix_weight is a number or \"auto\"");
                }
                cfg.scheduler.mix_weight = std::nullopt;
            } else {
                cfg.scheduler.mix_weight = s["mix_weight"].get<double>();
            }
        }
        get_to_if(s, "alpha", cfg.scheduler.alpha);
        get_to_if(s, "beta", cfg.scheduler.beta);
        get_to_if(s, "refinement", cfg.refinement);
    }
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["mode"] = cfg.mode == Mode::Edge ? "edge" : "distributed";
    j["frames"] = cfg.frames;
    j["seed"] = cfg.seed;
    j["algorithm"] = to_string(cfg.algorithm);
    j["bandwidth_hz"] = cfg.bandwidth_hz;
    j["out_dir"] = cfg.out_dir;
    j["optimal_cap"] = cfg.optimal_cap;
    j["area_cell_m"] = cfg.area_cell_m;
    j["dump_empirical"] = cfg.dump_empirical;
    j["world"] = {{"blocks", cfg.world.blocks},
                  {"block_side_m", cfg.world.block_side_m},
                  {"street_width_m", cfg.world.street_width_m},
                  {"lane_width_m", cfg.world.lane_width_m},
                  {"building_inset_m", cfg.world.building_inset_m},
                  {"building_height_m", cfg.world.building_height_m},
                  {"vehicles", cfg.world.vehicles},
                  {"mpr", cfg.world.mpr},
                  {"speed_limit_kmh", cfg.world.speed_limit_kmh},
                  {"headway_s", cfg.world.headway_s},
                  {"pedestrian_rate_per_s", cfg.world.pedestrian_rate_per_s},
                  {"pedestrian_speed_ms", cfg.world.pedestrian_speed_ms},
                  {"vehicle_length_m", cfg.world.vehicle_length_m},
                  {"vehicle_width_m", cfg.world.vehicle_width_m},
                  {"object_height_m", cfg.world.object_height_m},
                  {"pedestrian_diameter_m", cfg.world.pedestrian_diameter_m},
                  {"frame_dt_s", cfg.world.frame_dt_s},
                  {"trace", cfg.trace_path},
                  {"trace_format",
                   cfg.trace_format == world::TraceFormat::Csv ? "csv" : "jsonl"}};
    j["lidar"] = {{"lasers", cfg.lidar.n_lasers},
                  {"vertical_fov_deg", cfg.lidar.vertical_fov_deg},
                  {"azimuth_res_deg", cfg.lidar.azimuth_res_deg},
                  {"max_range_m", cfg.lidar.max_range_m},
                  {"mount_height_m", cfg.lidar.mount_height_m}};
    j["detection"] = {{"p_norm", cfg.detection.p},
                      {"difficulty_scale", cfg.detection.difficulty_scale},
                      {"difficulty_bias", cfg.detection.difficulty_bias}};
    j["channel"] = {{"carrier_ghz", cfg.channel.carrier_ghz},
                    {"tx_power_dbm", cfg.channel.tx_power_dbm},
                    {"noise_psd_dbm_hz", cfg.channel.noise_psd_dbm_hz},
                    {"noise_figure_db", cfg.channel.noise_figure_db},
                    {"shadowing_std_los_db", cfg.channel.shadowing_std_los_db},
                    {"shadowing_std_nlosv_db", cfg.channel.shadowing_std_nlosv_db},
                    {"shadowing_std_nlos_db", cfg.channel.shadowing_std_nlos_db},
                    {"shadowing_ar1_rho", cfg.channel.shadowing_ar1_rho},
                    {"blocker_loss_mean_db", cfg.channel.blocker_loss_mean_db},
                    {"blocker_loss_var_db2", cfg.channel.blocker_loss_var_db2},
                    {"rician_k_db", cfg.channel.rician_k_db},
                    {"fading", cfg.channel.fading},
                    {"max_comm_distance_m", cfg.channel.max_comm_distance_m},
                    {"feature_mb_full_region", cfg.channel.feature_mb_full_region},
                    {"feature_floor_mb", cfg.channel.feature_floor_mb},
                    {"mb_bytes", cfg.channel.mb_bytes},
                    {"pathloss_los",
                     {{"a", cfg.channel.pathloss_los.a},
                      {"b", cfg.channel.pathloss_los.b},
                      {"c", cfg.channel.pathloss_los.c}}},
                    {"pathloss_nlos",
                     {{"a", cfg.channel.pathloss_nlos.a},
                      {"b", cfg.channel.pathloss_nlos.b},
                      {"c", cfg.channel.pathloss_nlos.c}}}};
    j["region"] = {{"edge_radius_m", cfg.edge_radius_m},
                   {"rect_half_long_m", cfg.rect_half_long_m},
                   {"rect_half_lat_m", cfg.rect_half_lat_m}};
    json mix;
    if (cfg.scheduler.mix_weight) {
        mix = *cfg.scheduler.mix_weight;
    } else {
        mix = "auto";
    }
    j["scheduler"] = {{"mix_weight", mix},
                      {"alpha", cfg.scheduler.alpha},
                      {"beta", cfg.scheduler.beta},
                      {"refinement", cfg.refinement}};
    return j.dump(2);
}

}  // namespace cmass::harness
