#include "cmass/geometry.hpp"

namespace cmass {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Liang-Barsky style clipping of a segment against a slab [lo, hi] on one
// axis. Returns false when the parametric interval becomes empty.
bool clip_axis(double p0, double p1, double lo, double hi, double& t0, double& t1) {
    const double d = p1 - p0;
    if (std::abs(d) < 1e-300) {
        return p0 > lo && p0 < hi;  // parallel: inside the open slab or never
    }
    double ta = (lo - p0) / d;
    double tb = (hi - p0) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return t0 < t1;
}

}  // namespace

bool segment_intersects_rect_open(Vec2 a, Vec2 b, const Rect& r) {
    double t0 = 0.0, t1 = 1.0;
    if (!clip_axis(a.x, b.x, r.lo.x, r.hi.x, t0, t1)) return false;
    if (!clip_axis(a.y, b.y, r.lo.y, r.hi.y, t0, t1)) return false;
    // Open semantics: require a positive-length interior overlap.
    return t1 - t0 > 1e-12;
}

bool segment_intersects_obb_open(Vec2 a, Vec2 b, const OrientedBox& box) {
    const Vec2 la = box.to_local(a);
    const Vec2 lb = box.to_local(b);
    const Rect local{{-box.half_len, -box.half_wid}, {box.half_len, box.half_wid}};
    return segment_intersects_rect_open(la, lb, local);
}

double ray_rect_distance(Vec2 origin, Vec2 dir, const Rect& r) {
    double t0 = 0.0, t1 = kInf;
    for (int axis = 0; axis < 2; ++axis) {
        const double o = axis == 0 ? origin.x : origin.y;
        const double d = axis == 0 ? dir.x : dir.y;
        const double lo = axis == 0 ? r.lo.x : r.lo.y;
        const double hi = axis == 0 ? r.hi.x : r.hi.y;
        if (std::abs(d) < 1e-300) {
            if (o <= lo || o >= hi) return kInf;
            continue;
        }
        double ta = (lo - o) / d;
        double tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) return kInf;
    }
    if (t1 <= 1e-12) return kInf;  // behind the origin
    return std::max(t0, 0.0);
}

double ray_obb_distance(Vec2 origin, Vec2 dir, const OrientedBox& box) {
    const Vec2 lo = box.to_local(origin);
    const double c = std::cos(box.heading), s = std::sin(box.heading);
    const Vec2 ld{dir.x * c + dir.y * s, -dir.x * s + dir.y * c};
    const Rect local{{-box.half_len, -box.half_wid}, {box.half_len, box.half_wid}};
    return ray_rect_distance(lo, ld, local);
}

namespace {

// Indefinite area of the circular region x^2+y^2 <= r^2 below height y,
// between x=0 and x=x1, clamped to the circle. Helper for the exact
// circle/rectangle overlap (corner decomposition).
double circle_quadrant_area(double x, double y, double r) {
    // Area of {(u,v): 0<=u<=x, 0<=v<=y, u^2+v^2<=r^2} for x,y >= 0.
    if (x <= 0.0 || y <= 0.0) return 0.0;
    x = std::min(x, r);
    y = std::min(y, r);
    if (x * x + y * y <= r * r) return x * y;  // corner inside the circle
    // Clip the rectangle corner by the arc.
    const double xa = std::sqrt(std::max(0.0, r * r - y * y));  // arc at v=y
    const double xb = std::min(x, r);
    // Rectangle part [0,xa]x[0,y] + integral of sqrt(r^2-u^2) over [xa,xb].
    auto antideriv = [r](double u) {
        u = std::clamp(u, -r, r);
        return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) +
                      r * r * std::asin(u / r));
    };
    return xa * y + (antideriv(xb) - antideriv(xa));
}

// Signed quadrant area supporting negative corner coordinates.
double signed_quadrant(double x, double y, double r) {
    const double sx = x < 0 ? -1.0 : 1.0;
    const double sy = y < 0 ? -1.0 : 1.0;
    return sx * sy * circle_quadrant_area(std::abs(x), std::abs(y), r);
}

}  // namespace

double circle_rect_intersection_area(Vec2 c, double r, const Rect& rect) {
    if (r <= 0.0) return 0.0;
    // Shift so the circle sits at the origin; inclusion-exclusion on corners.
    const double x0 = rect.lo.x - c.x, x1 = rect.hi.x - c.x;
    const double y0 = rect.lo.y - c.y, y1 = rect.hi.y - c.y;
    return signed_quadrant(x1, y1, r) - signed_quadrant(x0, y1, r) -
           signed_quadrant(x1, y0, r) + signed_quadrant(x0, y0, r);
}

double circle_circle_intersection_area(Vec2 c0, double r0, Vec2 c1, double r1) {
    const double d = distance(c0, c1);
    if (d >= r0 + r1) return 0.0;
    const double rmin = std::min(r0, r1);
    if (d <= std::abs(r0 - r1)) return M_PI * rmin * rmin;
    const double a0 = std::acos(std::clamp((d * d + r0 * r0 - r1 * r1) / (2 * d * r0), -1.0, 1.0));
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r0 * r0) / (2 * d * r1), -1.0, 1.0));
    return r0 * r0 * (a0 - std::sin(2 * a0) * 0.5) + r1 * r1 * (a1 - std::sin(2 * a1) * 0.5);
}

}  // namespace cmass
