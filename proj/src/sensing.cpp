#include "cmass/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace cmass::sensing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Surface {
    double top;      // height of the occluding body
    AgentId id;      // -1 for buildings
    bool is_rect;
    const Rect* rect = nullptr;
    OrientedBox box;
    Vec2 ref;        // a point inside, for the subtended-angle window
    double radius;   // bounding radius around ref
};

struct Hit {
    double dist;
    const Surface* surf;
};

double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a < 0) a += two_pi;
    return a;
}

}  // namespace

ScanResult scan(const Agent& cov, const FrameState& frame, const MapGeometry& map,
                const LidarConfig& cfg) {
    ScanResult result;
    const Vec2 origin = cov.pos;
    const int n_az = cfg.azimuth_steps();
    const double az_step = 2.0 * M_PI / n_az;

    // Gather candidate surfaces with their angular windows.
    std::vector<Surface> surfaces;
    surfaces.reserve(frame.agents.size() + map.buildings.size());
    for (const Rect& b : map.buildings) {
        Surface s;
        s.top = cfg.building_height_m;
        s.id = -1;
        s.is_rect = true;
        s.rect = &b;
        s.ref = b.center();
        s.radius = 0.5 * std::hypot(b.width(), b.height());
        surfaces.push_back(s);
    }
    for (const Agent& a : frame.agents) {
        if (a.id == cov.id) continue;
        Surface s;
        s.top = a.bbox.height;
        s.id = a.id;
        s.is_rect = false;
        s.box = a.body();
        s.ref = a.pos;
        s.radius = 0.5 * std::hypot(a.bbox.length, a.bbox.width);
        surfaces.push_back(s);
    }

    // Azimuth z-buffer: rasterize each surface's subtended window, then walk
    // the per-bin stacks in distance order for every laser elevation.
    std::vector<std::vector<Hit>> bins(n_az);
    for (const Surface& s : surfaces) {
        const Vec2 d = s.ref - origin;
        const double dist = d.norm();
        if (dist - s.radius > cfg.max_range_m) continue;
        int lo, hi;
        if (dist <= s.radius) {
            lo = 0;
            hi = n_az - 1;
        } else {
            const double center = wrap_angle(std::atan2(d.y, d.x));
            const double half = std::asin(std::min(1.0, s.radius / dist)) + az_step;
            lo = static_cast<int>(std::floor((center - half) / az_step));
            hi = static_cast<int>(std::ceil((center + half) / az_step));
        }
        for (int k = lo; k <= hi; ++k) {
            const int bin = ((k % n_az) + n_az) % n_az;
            const double theta = bin * az_step;
            const Vec2 dir{std::cos(theta), std::sin(theta)};
            const double t = s.is_rect ? ray_rect_distance(origin, dir, *s.rect)
                                       : ray_obb_distance(origin, dir, s.box);
            if (t <= cfg.max_range_m) bins[bin].push_back({t, &s});
        }
    }

    // Laser elevation tangents, uniformly spaced over the FOV around the horizon.
    std::vector<double> tans(cfg.n_lasers);
    const double half_fov = cfg.vertical_fov_deg * 0.5 * M_PI / 180.0;
    for (int i = 0; i < cfg.n_lasers; ++i) {
        const double elev = cfg.n_lasers == 1
                                ? 0.0
                                : -half_fov + 2.0 * half_fov * i / (cfg.n_lasers - 1);
        tans[i] = std::tan(elev);
    }
    const double h0 = cfg.mount_height_m;

    for (int bin = 0; bin < n_az; ++bin) {
        auto& stack = bins[bin];
        if (stack.empty()) continue;
        std::sort(stack.begin(), stack.end(),
                  [](const Hit& a, const Hit& b) { return a.dist < b.dist; });
        // 2D-front agent counts as LoS even when every laser misses it.
        if (stack.front().surf->id >= 0) result.visible.insert(stack.front().surf->id);
        for (double tn : tans) {
            // First surface tall enough to intercept this laser.
            for (const Hit& h : stack) {
                const double ray_h = h0 + h.dist * tn;
                if (ray_h < 0.0) break;  // into the ground before this surface
                if (ray_h <= h.surf->top) {
                    if (h.surf->id >= 0) {
                        result.points[h.surf->id] += 1;
                        result.visible.insert(h.surf->id);
                    }
                    break;
                }
            }
        }
    }
    return result;
}

bool los_visible(Vec2 a, Vec2 b, const Occluders& occ, AgentId exclude_a,
                 AgentId exclude_b) {
    for (const Rect& r : occ.buildings) {
        if (segment_intersects_rect_open(a, b, r)) return false;
    }
    for (std::size_t i = 0; i < occ.bodies.size(); ++i) {
        const AgentId id = i < occ.body_ids.size() ? occ.body_ids[i] : -1;
        if (id >= 0 && (id == exclude_a || id == exclude_b)) continue;
        if (segment_intersects_obb_open(a, b, occ.bodies[i])) return false;
    }
    return true;
}

void PredictionState::observe(AgentId obj, Vec2 pos, long t) {
    Track& tr = history[obj];
    if (tr.n > 0 && tr.t[tr.n - 1] == t) {
        tr.pos[tr.n - 1] = pos;
        return;
    }
    if (tr.n < 2) {
        tr.pos[tr.n] = pos;
        tr.t[tr.n] = t;
        ++tr.n;
    } else {
        tr.pos[0] = tr.pos[1];
        tr.t[0] = tr.t[1];
        tr.pos[1] = pos;
        tr.t[1] = t;
    }
}

Vec2 PredictionState::extrapolate(AgentId obj, long t) const {
    const auto it = history.find(obj);
    if (it == history.end()) return {};
    const Track& tr = it->second;
    if (tr.n == 1) return tr.pos[0];
    const double span = static_cast<double>(tr.t[1] - tr.t[0]);
    if (span <= 0) return tr.pos[1];
    const double k = static_cast<double>(t - tr.t[1]) / span;
    return tr.pos[1] + (tr.pos[1] - tr.pos[0]) * k;
}

PredictionState predict_los(const PredictionState& state, const FrameState& frame,
                            const MapGeometry& map, std::span<const AgentId> covs,
                            const LidarConfig& cfg) {
    PredictionState out = state;
    out.predicted_los.clear();

    const long t_next = frame.t + 1;

    // Predicted occluder bodies: tracked objects at extrapolated positions,
    // CoVs advanced kinematically.
    std::vector<OrientedBox> bodies;
    std::vector<AgentId> body_ids;
    std::vector<std::pair<AgentId, Vec2>> tracked;
    for (const auto& [id, tr] : state.history) {
        const Agent* a = frame.find(id);
        if (!a) continue;  // departed
        const Vec2 p = state.extrapolate(id, t_next);
        OrientedBox box = a->body();
        box.center = p;
        bodies.push_back(box);
        body_ids.push_back(id);
        tracked.emplace_back(id, p);
    }
    std::vector<std::pair<AgentId, Vec2>> cov_pos;
    for (AgentId cid : covs) {
        const Agent* a = frame.find(cid);
        if (!a) continue;
        const Vec2 dir{std::cos(a->heading), std::sin(a->heading)};
        const Vec2 p = a->pos + dir * (a->speed * frame.dt);
        OrientedBox box = a->body();
        box.center = p;
        bodies.push_back(box);
        body_ids.push_back(cid);
        cov_pos.emplace_back(cid, p);
    }

    const Occluders occ{map.buildings, bodies, body_ids};
    for (const auto& [cid, cpos] : cov_pos) {
        std::set<AgentId>& los = out.predicted_los[cid];
        for (const auto& [oid, opos] : tracked) {
            if (oid == cid) continue;
            if (distance(cpos, opos) > cfg.max_range_m) continue;
            if (los_visible(cpos, opos, occ, cid, oid)) los.insert(oid);
        }
    }
    return out;
}

}  // namespace cmass::sensing
