#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "cmass/geometry.hpp"
#include "cmass/world.hpp"

// LiDAR emulation: rays are cast in 2D azimuth and each laser's elevation is
// tested analytically against the occluder heights along the ray; objects are
// vertical boxes. Also hosts the LoS predicate and the one-step-ahead LoS
// prediction used to refine the empirical perception topology.
namespace cmass::sensing {

using world::Agent;
using world::AgentId;
using world::FrameState;
using world::MapGeometry;

struct LidarConfig {
    int n_lasers = 32;
    double vertical_fov_deg = 40.0;
    double azimuth_res_deg = 0.1;
    double max_range_m = 100.0;
    double mount_height_m = 1.9;
    double building_height_m = 20.0;

    int azimuth_steps() const {
        return static_cast<int>(std::lround(360.0 / azimuth_res_deg));
    }
};

struct ScanResult {
    std::map<AgentId, int> points;  // per-object point counts (> 0 entries only)
    std::set<AgentId> visible;      // objects that are the nearest surface on
                                    // some azimuth ray within range
};

// Full sweep from one CoV. Deterministic; no sensor noise.
ScanResult scan(const Agent& cov, const FrameState& frame, const MapGeometry& map,
                const LidarConfig& cfg);

// Occluding bodies for a segment query; `exclude_a`/`exclude_b` drop the
// endpoints' own bodies.
struct Occluders {
    std::span<const Rect> buildings;
    std::span<const OrientedBox> bodies;
    std::span<const AgentId> body_ids;  // parallel to bodies
};

// True iff the open segment a-b crosses no occluder. Grazing a corner or
// sliding along an edge does not block (occluders are open sets).
bool los_visible(Vec2 a, Vec2 b, const Occluders& occ, AgentId exclude_a = -1,
                 AgentId exclude_b = -1);

// Tracking state for one-step-ahead prediction: the last two detected
// positions per object, plus the predicted LoS sets of each CoV.
struct PredictionState {
    struct Track {
        Vec2 pos[2];
        long t[2] = {-1, -1};
        int n = 0;
    };
    std::map<AgentId, Track> history;
    std::map<AgentId, std::set<AgentId>> predicted_los;  // CoV -> objects

    void observe(AgentId obj, Vec2 pos, long t);
    // Linear extrapolation to `t` from the last two detections; holds the
    // last position when only one detection exists.
    Vec2 extrapolate(AgentId obj, long t) const;
};

// Recomputes predicted_los for every CoV in `covs` against tracked objects at
// their extrapolated next-frame positions. CoVs extrapolate kinematically
// (their motion is broadcast); tracked objects and CoV bodies act as
// occluders at their predicted positions. Objects beyond the sensing range
// are not predicted visible.
PredictionState predict_los(const PredictionState& state, const FrameState& frame,
                            const MapGeometry& map, std::span<const AgentId> covs,
                            const LidarConfig& cfg);

}  // namespace cmass::sensing
