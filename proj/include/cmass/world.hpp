#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmass/geometry.hpp"
#include "cmass/rng.hpp"

// Scene ownership: Manhattan-grid map geometry, vehicle/pedestrian mobility,
// CoV designation, interest regions and importance weights. The built-in
// mobility generator stands in for an external microscopic traffic simulator;
// recorded traces can be ingested instead.
namespace cmass::world {

using AgentId = std::int64_t;

enum class AgentKind { Cov, Vehicle, Pedestrian, User };

struct BBox {
    double length = 4.5;
    double width = 1.8;
    double height = 1.7;
};

struct Agent {
    AgentId id = 0;
    AgentKind kind = AgentKind::Vehicle;
    Vec2 pos;
    double heading = 0.0;  // radians, 0 = +x
    double speed = 0.0;    // m/s
    BBox bbox;

    OrientedBox body() const {
        return {pos, bbox.length * 0.5, bbox.width * 0.5, heading};
    }
};

struct WorldConfig {
    int blocks = 2;
    double block_side_m = 200.0;
    double street_width_m = 8.0;
    double lane_width_m = 3.5;
    double building_inset_m = 5.0;
    double building_height_m = 20.0;
    int vehicles = 60;
    double mpr = 0.5;
    double speed_limit_kmh = 50.0;
    double headway_s = 2.0;
    double pedestrian_rate_per_s = 0.02;
    double pedestrian_speed_ms = 1.2;
    double vehicle_length_m = 4.5;
    double vehicle_width_m = 1.8;
    double object_height_m = 1.7;
    double pedestrian_diameter_m = 0.5;
    double frame_dt_s = 0.1;

    double speed_limit_ms() const { return speed_limit_kmh / 3.6; }
};

struct MapGeometry {
    std::vector<Rect> buildings;
    std::vector<double> xs;  // centerlines of north-south streets
    std::vector<double> ys;  // centerlines of east-west streets
    Rect bounds;
    double street_half_width = 4.0;
    double lane_offset = 1.75;      // driving lane center from street centerline
    double sidewalk_offset = 3.75;  // sidewalk line from street centerline
};

MapGeometry make_map(const WorldConfig& cfg);

struct FrameState {
    long t = 0;
    double dt = 0.1;
    std::vector<Agent> agents;  // sorted by id

    const Agent* find(AgentId id) const;
};

// Initial population: vehicles placed on lanes with headway spacing, CoV flag
// drawn i.i.d. per vehicle with probability MPR. Deterministic in the seed.
FrameState init_world(const WorldConfig& cfg, const MapGeometry& map, std::uint64_t seed);

// One mobility step: vehicles follow lanes at the speed limit with 2 s
// headway keeping and random turns at intersections; pedestrians arrive as a
// Poisson process and walk the sidewalk grid. Deterministic given
// (frame, seed).
FrameState step_mobility(const FrameState& frame, const MapGeometry& map,
                         const WorldConfig& cfg, std::uint64_t seed);

struct TraceError : std::runtime_error {
    explicit TraceError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class TraceFormat { Jsonl, Csv };

// Parses an external mobility trace (one record per agent per frame with
// fields t, id, kind, x, y, heading, speed) into frames sorted by t.
// Malformed records, non-monotone t, and duplicate (t, id) raise TraceError
// with the offending line number.
std::vector<FrameState> ingest_trace(const std::string& path, TraceFormat format,
                                     const WorldConfig& cfg);

struct InterestRegion {
    enum class Mode { EdgeCircle, DistributedRect };
    Mode mode = Mode::EdgeCircle;
    double radius = 70.0;       // edge circle
    double half_long = 100.0;   // distributed rectangle, along user heading
    double half_lat = 40.0;
    Vec2 anchor;                // fixed anchor (edge mode)
};

struct UserPose {
    Vec2 pos;
    double heading = 0.0;
};

// Importance weight of one object. Edge mode: 1 inside the circle, else 0.
// Distributed mode: min{max{-log10 sqrt((x/100)^2 + (y/40)^2), 0}, 1} in the
// user's longitudinal/lateral frame, 0 outside the rectangle.
double importance_weight(const Agent& object, const InterestRegion& region,
                         const UserPose& user);

}  // namespace cmass::world
