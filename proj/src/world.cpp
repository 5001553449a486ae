#include "cmass/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cmass::world {

namespace {

constexpr AgentId kPedestrianIdBase = 1000000;

int heading_to_dir4(double heading) {
    // 0:+x 1:+y 2:-x 3:-y
    const double two_pi = 2.0 * M_PI;
    double h = std::fmod(heading, two_pi);
    if (h < 0) h += two_pi;
    return static_cast<int>(std::floor(h / (M_PI / 2.0) + 0.5)) % 4;
}

double dir4_to_heading(int d) { return d * (M_PI / 2.0); }

Vec2 dir4_vec(int d) {
    switch (d & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// Signed lateral offset of the travel lane (right-hand traffic): facing +x
// the lane sits at -offset in y, facing +y at +offset in x, and so on.
double lane_side(int d) { return (d == 0 || d == 3) ? -1.0 : 1.0; }

int nearest_index(const std::vector<double>& v, double x) {
    int best = 0;
    double bd = std::abs(v[0] - x);
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        const double di = std::abs(v[i] - x);
        if (di < bd) {
            bd = di;
            best = i;
        }
    }
    return best;
}

struct GridWalk {
    int dir;            // dir4
    int street;         // index into ys (horizontal travel) or xs (vertical)
    double along;       // coordinate along the travel axis
    double lateral;     // full lateral coordinate
};

GridWalk derive_walk(const MapGeometry& map, Vec2 pos, double heading, double offset) {
    GridWalk w;
    w.dir = heading_to_dir4(heading);
    const bool horizontal = (w.dir == 0 || w.dir == 2);
    if (horizontal) {
        w.street = nearest_index(map.ys, pos.y - lane_side(w.dir) * offset);
        w.along = pos.x;
        w.lateral = pos.y;
    } else {
        w.street = nearest_index(map.xs, pos.x - lane_side(w.dir) * offset);
        w.along = pos.y;
        w.lateral = pos.x;
    }
    return w;
}

// Advances one agent along the street grid with random turns at
// intersections; shared by vehicles (lane offset) and pedestrians (sidewalk
// offset). Positions snap onto the destination line when turning.
void advance_on_grid(Agent& a, const MapGeometry& map, double offset, double dist, Rng& rng) {
    if (dist <= 0.0) return;
    GridWalk w = derive_walk(map, a.pos, a.heading, offset);
    const bool horizontal = (w.dir == 0 || w.dir == 2);
    const std::vector<double>& crossings = horizontal ? map.xs : map.ys;
    const std::vector<double>& own = horizontal ? map.ys : map.xs;
    const double sgn = (w.dir == 0 || w.dir == 1) ? 1.0 : -1.0;
    const int n_cross = static_cast<int>(crossings.size());
    const int n_own = static_cast<int>(own.size());

    // Next intersection center strictly ahead.
    int next = -1;
    for (int i = 0; i < n_cross; ++i) {
        const int idx = sgn > 0 ? i : n_cross - 1 - i;
        if ((crossings[idx] - w.along) * sgn > 1e-9) {
            next = idx;
            break;
        }
    }

    const double to_next = next >= 0 ? (crossings[next] - w.along) * sgn
                                     : std::numeric_limits<double>::infinity();
    if (dist < to_next) {
        a.pos = a.pos + dir4_vec(w.dir) * dist;
        return;
    }

    // Reached an intersection: pick among continuations that stay on the grid
    // (never the reverse direction).
    const double remaining = dist - to_next;
    const int ci = next;                     // crossing street index
    const int oi = w.street;                 // own street index
    std::vector<int> options;
    const int straight_ok = sgn > 0 ? (ci + 1 < n_cross) : (ci - 1 >= 0);
    if (straight_ok) options.push_back(w.dir);
    // Turns onto the crossing street.
    const int up = horizontal ? 1 : 0;    // +y from a horizontal street, +x from vertical
    const int down = horizontal ? 3 : 2;
    if (oi + 1 < n_own) options.push_back(up);
    if (oi - 1 >= 0) options.push_back(down);

    int chosen = options[rng.uniform_int(options.size())];
    if (chosen == w.dir) {
        a.pos = a.pos + dir4_vec(w.dir) * dist;
        return;
    }
    // Snap to the crossing point of the two travel lines and continue.
    const double new_line = crossings[ci] + lane_side(chosen) * offset;
    Vec2 p;
    if (horizontal) {
        p = {new_line, w.lateral};
    } else {
        p = {w.lateral, new_line};
    }
    a.heading = dir4_to_heading(chosen);
    a.pos = p + dir4_vec(chosen) * remaining;
}

}  // namespace

MapGeometry make_map(const WorldConfig& cfg) {
    MapGeometry map;
    map.street_half_width = cfg.street_width_m / 2.0;
    map.lane_offset = cfg.lane_width_m / 2.0;
    map.sidewalk_offset = map.street_half_width - 0.25;
    const int n_streets = cfg.blocks + 1;
    const double pitch = cfg.block_side_m + cfg.street_width_m;
    for (int i = 0; i < n_streets; ++i) {
        const double c = map.street_half_width + i * pitch;
        map.xs.push_back(c);
        map.ys.push_back(c);
    }
    const double extent = (n_streets - 1) * pitch + cfg.street_width_m;
    map.bounds = {{0.0, 0.0}, {extent, extent}};
    const double inset = map.street_half_width + cfg.building_inset_m;
    for (int i = 0; i + 1 < n_streets; ++i) {
        for (int j = 0; j + 1 < n_streets; ++j) {
            map.buildings.push_back(Rect{{map.xs[i] + inset, map.ys[j] + inset},
                                         {map.xs[i + 1] - inset, map.ys[j + 1] - inset}});
        }
    }
    return map;
}

const Agent* FrameState::find(AgentId id) const {
    auto it = std::lower_bound(agents.begin(), agents.end(), id,
                               [](const Agent& a, AgentId v) { return a.id < v; });
    if (it != agents.end() && it->id == id) return &*it;
    return nullptr;
}

FrameState init_world(const WorldConfig& cfg, const MapGeometry& map, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, 0x5eedu, 1);
    FrameState frame;
    frame.t = 0;
    frame.dt = cfg.frame_dt_s;

    struct Lane {
        bool horizontal;
        int street;
        int dir;
    };
    std::vector<Lane> lanes;
    const int n = static_cast<int>(map.xs.size());
    for (int s = 0; s < n; ++s) {
        lanes.push_back({true, s, 0});
        lanes.push_back({true, s, 2});
        lanes.push_back({false, s, 1});
        lanes.push_back({false, s, 3});
    }

    const double lane_len = map.bounds.hi.x - 2.0 * map.street_half_width;
    const double spacing = cfg.headway_s * cfg.speed_limit_ms() + cfg.vehicle_length_m;
    std::vector<std::vector<double>> occupied(lanes.size());

    AgentId next_id = 1;
    int placed = 0;
    int attempts = 0;
    const int max_attempts = cfg.vehicles * 200;
    while (placed < cfg.vehicles && attempts < max_attempts) {
        ++attempts;
        const std::size_t li = rng.uniform_int(lanes.size());
        const Lane& lane = lanes[li];
        const double along = map.street_half_width + rng.uniform() * lane_len;
        bool clash = false;
        for (double o : occupied[li]) {
            if (std::abs(o - along) < spacing) {
                clash = true;
                break;
            }
        }
        if (clash) continue;
        occupied[li].push_back(along);

        Agent a;
        a.id = next_id++;
        a.kind = rng.uniform() < cfg.mpr ? AgentKind::Cov : AgentKind::Vehicle;
        a.heading = dir4_to_heading(lane.dir);
        a.speed = cfg.speed_limit_ms();
        a.bbox = {cfg.vehicle_length_m, cfg.vehicle_width_m, cfg.object_height_m};
        const double line = (lane.horizontal ? map.ys[lane.street] : map.xs[lane.street]) +
                            lane_side(lane.dir) * map.lane_offset;
        a.pos = lane.horizontal ? Vec2{along, line} : Vec2{line, along};
        frame.agents.push_back(a);
        ++placed;
    }
    if (placed < cfg.vehicles) {
        throw std::invalid_argument("init_world: map too small for requested vehicle count");
    }
    std::sort(frame.agents.begin(), frame.agents.end(),
              [](const Agent& a, const Agent& b) { return a.id < b.id; });
    return frame;
}

FrameState step_mobility(const FrameState& frame, const MapGeometry& map,
                         const WorldConfig& cfg, std::uint64_t seed) {
    FrameState out;
    out.t = frame.t + 1;
    out.dt = frame.dt;
    out.agents.reserve(frame.agents.size() + 2);

    // Gap keeping against pre-move positions: a follower holds still this
    // frame when the bumper gap ahead is below the headway distance.
    const double min_gap = cfg.headway_s * cfg.speed_limit_ms();

    for (const Agent& a : frame.agents) {
        Agent moved = a;
        if (a.kind == AgentKind::Pedestrian) {
            Rng rng = Rng::substream(seed, 0x9edu, static_cast<std::uint64_t>(frame.t),
                                     static_cast<std::uint64_t>(a.id));
            advance_on_grid(moved, map, map.sidewalk_offset, a.speed * frame.dt, rng);
        } else {
            bool blocked = false;
            if (a.speed > 0.0) {
                const int adir = heading_to_dir4(a.heading);
                const Vec2 fwd = dir4_vec(adir);
                for (const Agent& b : frame.agents) {
                    if (b.id == a.id || b.kind == AgentKind::Pedestrian) continue;
                    if (heading_to_dir4(b.heading) != adir) continue;  // follow same-direction leaders only
                    const Vec2 d = b.pos - a.pos;
                    const double ahead = d.dot(fwd);
                    const double lateral = std::abs(d.cross(fwd));
                    if (ahead > 0.0 && lateral < cfg.lane_width_m * 0.5 &&
                        ahead - cfg.vehicle_length_m < min_gap) {
                        blocked = true;
                        break;
                    }
                }
            }
            if (!blocked && a.speed > 0.0) {
                Rng rng = Rng::substream(seed, 0xcaau, static_cast<std::uint64_t>(frame.t),
                                         static_cast<std::uint64_t>(a.id));
                advance_on_grid(moved, map, map.lane_offset, a.speed * frame.dt, rng);
            }
        }
        if (map.bounds.contains(moved.pos)) out.agents.push_back(moved);
    }

    // Pedestrian arrivals.
    Rng arrival_rng = Rng::substream(seed, 0xa11u, static_cast<std::uint64_t>(frame.t));
    const int arrivals = arrival_rng.poisson(cfg.pedestrian_rate_per_s * frame.dt);
    AgentId next_ped = kPedestrianIdBase;
    for (const Agent& a : out.agents) {
        if (a.id >= next_ped) next_ped = a.id + 1;
    }
    const int n_streets = static_cast<int>(map.xs.size());
    const double walk_len = map.bounds.hi.x - 2.0 * map.street_half_width;
    for (int k = 0; k < arrivals; ++k) {
        Agent p;
        p.id = next_ped++;
        p.kind = AgentKind::Pedestrian;
        p.speed = cfg.pedestrian_speed_ms;
        p.bbox = {cfg.pedestrian_diameter_m, cfg.pedestrian_diameter_m, cfg.object_height_m};
        const bool horizontal = arrival_rng.uniform() < 0.5;
        const int street = static_cast<int>(arrival_rng.uniform_int(n_streets));
        const int dir = horizontal ? (arrival_rng.uniform() < 0.5 ? 0 : 2)
                                   : (arrival_rng.uniform() < 0.5 ? 1 : 3);
        const double along = map.street_half_width + arrival_rng.uniform() * walk_len;
        const double line = (horizontal ? map.ys[street] : map.xs[street]) +
                            lane_side(dir) * map.sidewalk_offset;
        p.heading = dir4_to_heading(dir);
        p.pos = horizontal ? Vec2{along, line} : Vec2{line, along};
        out.agents.push_back(p);
    }

    std::sort(out.agents.begin(), out.agents.end(),
              [](const Agent& a, const Agent& b) { return a.id < b.id; });
    return out;
}

namespace {

AgentKind parse_kind(const std::string& s, long line) {
    if (s == "cov") return AgentKind::Cov;
    if (s == "vehicle") return AgentKind::Vehicle;
    if (s == "pedestrian") return AgentKind::Pedestrian;
    if (s == "user") return AgentKind::User;
    throw TraceError("trace line " + std::to_string(line) + ": unknown kind '" + s + "'");
}

BBox bbox_for(AgentKind kind, const WorldConfig& cfg) {
    if (kind == AgentKind::Pedestrian) {
        return {cfg.pedestrian_diameter_m, cfg.pedestrian_diameter_m, cfg.object_height_m};
    }
    return {cfg.vehicle_length_m, cfg.vehicle_width_m, cfg.object_height_m};
}

}  // namespace

std::vector<FrameState> ingest_trace(const std::string& path, TraceFormat format,
                                     const WorldConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file: " + path);

    std::vector<FrameState> frames;
    std::map<long, std::size_t> frame_index;
    long line_no = 0;
    std::string line;
    bool header_skipped = false;

    auto add_record = [&](long t, AgentId id, AgentKind kind, double x, double y,
                          double heading, double speed) {
        if (!frames.empty() && t < frames.back().t) {
            throw TraceError("trace line " + std::to_string(line_no) +
                             ": non-monotone frame index " + std::to_string(t));
        }
        auto [it, inserted] = frame_index.try_emplace(t, frames.size());
        if (inserted) {
            FrameState f;
            f.t = t;
            f.dt = cfg.frame_dt_s;
            frames.push_back(f);
        }
        FrameState& f = frames[it->second];
        for (const Agent& a : f.agents) {
            if (a.id == id) {
                throw TraceError("trace line " + std::to_string(line_no) +
                                 ": duplicate record for (t=" + std::to_string(t) +
                                 ", id=" + std::to_string(id) + ")");
            }
        }
        Agent a;
        a.id = id;
        a.kind = kind;
        a.pos = {x, y};
        a.heading = heading;
        a.speed = speed;
        a.bbox = bbox_for(kind, cfg);
        f.agents.push_back(a);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            if (format == TraceFormat::Jsonl) {
                const auto j = nlohmann::json::parse(line);
                add_record(j.at("t").get<long>(), j.at("id").get<AgentId>(),
                           parse_kind(j.at("kind").get<std::string>(), line_no),
                           j.at("x").get<double>(), j.at("y").get<double>(),
                           j.at("heading").get<double>(), j.at("speed").get<double>());
            } else {
                if (!header_skipped && line.find("t,") == 0) {
                    header_skipped = true;
                    continue;
                }
                std::stringstream ss(line);
                std::string tok;
                std::vector<std::string> toks;
                while (std::getline(ss, tok, ',')) toks.push_back(tok);
                if (toks.size() != 7) {
                    throw TraceError("trace line " + std::to_string(line_no) +
                                     ": expected 7 fields, got " + std::to_string(toks.size()));
                }
                add_record(std::stol(toks[0]), std::stoll(toks[1]),
                           parse_kind(toks[2], line_no), std::stod(toks[3]),
                           std::stod(toks[4]), std::stod(toks[5]), std::stod(toks[6]));
            }
        } catch (const TraceError&) {
            throw;
        } catch (const std::exception& e) {
            throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    for (FrameState& f : frames) {
        std::sort(f.agents.begin(), f.agents.end(),
                  [](const Agent& a, const Agent& b) { return a.id < b.id; });
    }
    return frames;
}

double importance_weight(const Agent& object, const InterestRegion& region,
                         const UserPose& user) {
    if (region.mode == InterestRegion::Mode::EdgeCircle) {
        return distance(object.pos, region.anchor) <= region.radius ? 1.0 : 0.0;
    }
    // Object position in the user's longitudinal/lateral frame.
    const Vec2 d = object.pos - user.pos;
    const double c = std::cos(user.heading), s = std::sin(user.heading);
    const double x = d.x * c + d.y * s;
    const double y = -d.x * s + d.y * c;
    if (std::abs(x) > region.half_long || std::abs(y) > region.half_lat) return 0.0;
    const double rho = std::sqrt((x / region.half_long) * (x / region.half_long) +
                                 (y / region.half_lat) * (y / region.half_lat));
    if (rho <= 0.0) return 1.0;
    const double w = -std::log10(rho);
    return std::min(std::max(w, 0.0), 1.0);
}

}  // namespace cmass::world
