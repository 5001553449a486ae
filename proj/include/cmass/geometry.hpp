#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace cmass {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Axis-aligned rectangle, used for building footprints and map bounds.
struct Rect {
    Vec2 lo;
    Vec2 hi;

    bool contains(Vec2 p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
};

// Oriented box footprint (vehicle/pedestrian body).
struct OrientedBox {
    Vec2 center;
    double half_len = 0.0;   // along heading
    double half_wid = 0.0;   // perpendicular
    double heading = 0.0;    // radians, 0 = +x

    // Point in box-local coordinates.
    Vec2 to_local(Vec2 p) const {
        const Vec2 d = p - center;
        const double c = std::cos(heading), s = std::sin(heading);
        return {d.x * c + d.y * s, -d.x * s + d.y * c};
    }
};

// Open-set segment/rect intersection: touches at the boundary only (corner
// grazing, edge sliding) do not count. This keeps visibility decisions stable
// under floating-point ordering.
bool segment_intersects_rect_open(Vec2 a, Vec2 b, const Rect& r);
bool segment_intersects_obb_open(Vec2 a, Vec2 b, const OrientedBox& box);

// Ray from `origin` along unit `dir`: distance to first boundary crossing, or
// +inf on a miss. The interior of the shape counts; grazing hits do not.
double ray_rect_distance(Vec2 origin, Vec2 dir, const Rect& r);
double ray_obb_distance(Vec2 origin, Vec2 dir, const OrientedBox& box);

// Exact area of circle(center c, radius r) ∩ axis-aligned rectangle.
double circle_rect_intersection_area(Vec2 c, double r, const Rect& rect);

// Exact lens area of two discs.
double circle_circle_intersection_area(Vec2 c0, double r0, Vec2 c1, double r1);

}  // namespace cmass
