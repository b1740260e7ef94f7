#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace vismas {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr Vec2 plan() const { return {x, y}; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) {
        r += 2.0 * std::numbers::pi;
    }
    return r;
}

constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Closed polygon in the plane; the last vertex connects back to the first.
using Polygon = std::vector<Vec2>;

double signed_area(std::span<const Vec2> poly);
double perimeter(std::span<const Vec2> poly);

/// True when no two non-adjacent edges touch and adjacent edges share only their vertex.
bool is_simple(std::span<const Vec2> poly);

enum class Containment { outside, boundary, inside };

/// Classifies p against a simple polygon of either orientation.
/// Points within `tolerance` of an edge are reported as boundary.
Containment locate(Vec2 p, std::span<const Vec2> poly, double tolerance = 1e-12);

/// Length scale used to pick geometric tolerances for a set of polygons.
double coordinate_scale(std::span<const Vec2> poly);

} // namespace vismas
