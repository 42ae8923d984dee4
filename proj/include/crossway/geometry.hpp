#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace crossway {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    // 90 degree counterclockwise rotation (left normal of a direction).
    Vec2 perp() const { return {-y, x}; }
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Axis-aligned-in-body-frame rectangle with an arbitrary heading.
struct OrientedRect {
    Vec2 center;
    double half_length = 0.0;  // along heading
    double half_width = 0.0;   // across heading
    double heading = 0.0;

    std::array<Vec2, 4> corners() const;
};

// Separating-axis overlap test over the 4 face normals. Touching counts
// as overlap.
bool rects_overlap(const OrientedRect& a, const OrientedRect& b);

// Point-in-polygon via crossing number; points on the boundary (within
// a small tolerance) count as inside.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

// Distance from a point to a segment.
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Distance from a point to a polyline.
double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& pts);

double polyline_length(const std::vector<Vec2>& pts);

// Signed curvature of the circle through three points, positive for a
// left turn. Returns 0 for collinear points.
double three_point_curvature(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace crossway
