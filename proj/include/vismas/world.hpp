#pragma once

#include "vismas/geometry.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace vismas {

/// Closed height interval [lo, hi] in meters.
struct ZRange {
    double lo = 0.0;
    double hi = 0.0;

    /// Open-interval overlap: ranges that only touch do not overlap.
    constexpr bool overlaps(const ZRange& o) const { return lo < o.hi && o.lo < hi; }
    constexpr bool operator==(const ZRange&) const = default;
};

/// Planar footprint extruded over a height range.
struct Prism {
    std::string name;
    Polygon footprint;
    ZRange z;
};

struct Bounds {
    Vec2 min;
    Vec2 max;

    constexpr bool contains(Vec2 p) const
    {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

struct Scene {
    std::vector<Prism> obstacles;
    Vec3 target;
    Bounds bounds;
};

/// Returns a list of invariant violations (empty when the scene is valid).
std::vector<std::string> validate_scene(const Scene& scene);

/// Checks one polygon; `what` names it in the messages.
std::vector<std::string> validate_polygon(std::span<const Vec2> poly, const std::string& what);

/// Returns a counter-clockwise copy of a simple polygon.
Polygon counter_clockwise(std::span<const Vec2> poly);

struct PlanarPose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    constexpr bool operator==(const PlanarPose&) const = default;
};

/// Finite-difference steps for x/y and theta.
struct GradientStep {
    double delta_xy = 1e-3;
    double delta_theta = 1e-3;
};

struct PoseGradient {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// Perimeter of the interpenetration region of two simple polygons, summed over
/// all connected components. Shared boundary with disjoint interiors counts as 0.
/// Throws InputError on degenerate polygons.
double collision_length(std::span<const Vec2> a, std::span<const Vec2> b);

/// Sum of collision_length against every obstacle whose height range overlaps `z`.
double total_collision_length(std::span<const Vec2> footprint, const Scene& scene, ZRange z);

/// Length of the part of segment [s, t] lying strictly inside any prism.
/// Symmetric in its endpoints.
double segment_occluded(Vec3 s, Vec3 t, const Scene& scene);

/// Unit direction of ray `index` of a fan of `n_rays` inside a cone.
/// Ray 0 is the axis; the rest are laid out on rings of eight.
Vec3 cone_ray_direction(Vec3 axis, double half_angle, int n_rays, int index);

/// Mean occluded length over a deterministic ray fan inside the cone.
/// Each ray has length `range`.
double cone_occlusion(Vec3 apex, Vec3 axis, double half_angle, double range, int n_rays,
                      const Scene& scene);

using PoseCriterion = std::function<double(const PlanarPose&)>;

/// Central-difference gradient of `criterion` at `pose`. Perturbed headings
/// are wrapped into (-pi, pi]. Throws NumericalError on non-finite values.
PoseGradient fd_gradient(const PoseCriterion& criterion, const PlanarPose& pose,
                         const GradientStep& step);

/// The six perturbed poses used by fd_gradient, in the order
/// x+, x-, y+, y-, theta+, theta-.
std::array<PlanarPose, 6> perturbed_poses(const PlanarPose& pose, const GradientStep& step);

/// Gradient from criterion values at the poses of perturbed_poses().
PoseGradient central_difference(const std::array<double, 6>& values, const GradientStep& step);

} // namespace vismas
