#include "vismas/world.hpp"

#include "vismas/errors.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace vismas {

namespace {

using Interval = std::pair<double, double>;

struct Box {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void add(Vec2 p)
    {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
};

Box bounding_box(std::span<const Vec2> poly)
{
    Box box;
    for (const Vec2& p : poly) {
        box.add(p);
    }
    return box;
}

// Open overlap of the two boxes; touching boxes cannot share interior.
bool boxes_overlap(const Box& a, const Box& b)
{
    return a.lo.x < b.hi.x && b.lo.x < a.hi.x && a.lo.y < b.hi.y && b.lo.y < a.hi.y;
}

void require_non_degenerate(std::span<const Vec2> poly, const char* which)
{
    if (poly.size() < 3) {
        throw InputError(std::string("collision_length: polygon ") + which +
                         " has fewer than 3 vertices");
    }
    const double area = signed_area(poly);
    const double scale = coordinate_scale(poly);
    if (!(std::abs(area) > 1e-14 * scale * scale)) {
        throw InputError(std::string("collision_length: polygon ") + which + " has zero area");
    }
}

// Length of the boundary of `p` that lies on the boundary of int(p) ∩ int(q).
// Boundary shared with `q` in the same direction is counted half, so that
// the sum over both polygons counts it once and stays exactly symmetric.
double boundary_inside(std::span<const Vec2> p, std::span<const Vec2> q, double tol)
{
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    double total = 0.0;
    std::vector<double> params;
    std::vector<Interval> shared;

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = p[i];
        const Vec2 d = p[(i + 1) % n] - a;
        const double len = norm(d);
        if (len == 0.0) {
            continue;
        }
        const double len2 = len * len;
        params.assign({0.0, 1.0});
        shared.clear();

        for (std::size_t j = 0; j < m; ++j) {
            const Vec2 c = q[j];
            const Vec2 f = q[(j + 1) % m] - c;
            const Vec2 e = c + f;
            const double dist_c = cross(d, c - a) / len;
            const double dist_e = cross(d, e - a) / len;
            if (std::abs(dist_c) <= tol && std::abs(dist_e) <= tol) {
                const double tc = dot(c - a, d) / len2;
                const double te = dot(e - a, d) / len2;
                const double lo = std::max(0.0, std::min(tc, te));
                const double hi = std::min(1.0, std::max(tc, te));
                if (hi > lo) {
                    params.push_back(lo);
                    params.push_back(hi);
                    if (dot(d, f) > 0.0) {
                        shared.emplace_back(lo, hi);
                    }
                }
                continue;
            }
            const double denom = cross(d, f);
            if (denom == 0.0) {
                continue;
            }
            const double t = cross(c - a, f) / denom;
            const double u = cross(c - a, d) / denom;
            const double u_eps = tol / norm(f);
            if (t > 0.0 && t < 1.0 && u >= -u_eps && u <= 1.0 + u_eps) {
                params.push_back(t);
            }
        }

        std::sort(params.begin(), params.end());
        for (std::size_t k = 0; k + 1 < params.size(); ++k) {
            const double t0 = params[k];
            const double t1 = params[k + 1];
            if (!(t1 > t0)) {
                continue;
            }
            const double mid = 0.5 * (t0 + t1);
            const double piece = (t1 - t0) * len;
            const bool on_shared = std::any_of(shared.begin(), shared.end(), [mid](const Interval& s) {
                return s.first <= mid && mid <= s.second;
            });
            if (on_shared) {
                total += 0.5 * piece;
            } else if (locate(a + d * mid, q, tol) == Containment::inside) {
                total += piece;
            }
        }
    }
    return total;
}

// Parameters in [0, 1] along s->t where the point is strictly inside `prism`.
void prism_intervals(Vec3 s, Vec3 t, const Prism& prism, std::vector<Interval>& out)
{
    double z_lo = 0.0;
    double z_hi = 1.0;
    const double dz = t.z - s.z;
    if (dz == 0.0) {
        if (!(prism.z.lo < s.z && s.z < prism.z.hi)) {
            return;
        }
    } else {
        const double ta = (prism.z.lo - s.z) / dz;
        const double tb = (prism.z.hi - s.z) / dz;
        z_lo = std::max(0.0, std::min(ta, tb));
        z_hi = std::min(1.0, std::max(ta, tb));
        if (!(z_hi > z_lo)) {
            return;
        }
    }

    const std::span<const Vec2> poly = prism.footprint;
    const Vec2 a = s.plan();
    const Vec2 d = t.plan() - a;
    const double len = norm(d);
    const double tol = 1e-12 * coordinate_scale(poly);

    if (len <= tol) {
        if (locate(a, poly, tol) == Containment::inside) {
            out.emplace_back(z_lo, z_hi);
        }
        return;
    }

    std::vector<double> params{z_lo, z_hi};
    const std::size_t m = poly.size();
    for (std::size_t j = 0; j < m; ++j) {
        const Vec2 c = poly[j];
        const Vec2 f = poly[(j + 1) % m] - c;
        const double denom = cross(d, f);
        if (denom == 0.0) {
            // Parallel edge: collinear overlap endpoints are breakpoints.
            if (std::abs(cross(d, c - a)) / len <= tol) {
                for (Vec2 v : {c, c + f}) {
                    const double tv = dot(v - a, d) / (len * len);
                    if (tv > z_lo && tv < z_hi) {
                        params.push_back(tv);
                    }
                }
            }
            continue;
        }
        const double tp = cross(c - a, f) / denom;
        const double u = cross(c - a, d) / denom;
        if (tp > z_lo && tp < z_hi && u >= 0.0 && u <= 1.0) {
            params.push_back(tp);
        }
    }
    std::sort(params.begin(), params.end());
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
        const double t0 = params[k];
        const double t1 = params[k + 1];
        if (!(t1 > t0)) {
            continue;
        }
        if (locate(a + d * (0.5 * (t0 + t1)), poly, tol) == Containment::inside) {
            if (!out.empty() && out.back().second == t0) {
                out.back().second = t1;
            } else {
                out.emplace_back(t0, t1);
            }
        }
    }
}

bool lexicographically_less(Vec3 a, Vec3 b)
{
    if (a.x != b.x) {
        return a.x < b.x;
    }
    if (a.y != b.y) {
        return a.y < b.y;
    }
    return a.z < b.z;
}

} // namespace

std::vector<std::string> validate_polygon(std::span<const Vec2> poly, const std::string& what)
{
    std::vector<std::string> errors;
    if (poly.size() < 3) {
        errors.push_back(what + ": polygon needs at least 3 vertices, got " +
                         std::to_string(poly.size()));
        return errors;
    }
    for (const Vec2& v : poly) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            errors.push_back(what + ": polygon has a non-finite vertex");
            return errors;
        }
    }
    const double scale = coordinate_scale(poly);
    if (!(std::abs(signed_area(poly)) > 1e-14 * scale * scale)) {
        errors.push_back(what + ": polygon has zero area");
        return errors;
    }
    if (!is_simple(poly)) {
        errors.push_back(what + ": polygon is not simple (edges intersect)");
    }
    return errors;
}

std::vector<std::string> validate_scene(const Scene& scene)
{
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const Prism& prism = scene.obstacles[i];
        const std::string what =
            "obstacle '" + (prism.name.empty() ? std::to_string(i) : prism.name) + "'";
        auto poly_errors = validate_polygon(prism.footprint, what);
        errors.insert(errors.end(), poly_errors.begin(), poly_errors.end());
        if (!(prism.z.lo < prism.z.hi)) {
            errors.push_back(what + ": z_min must be below z_max");
        }
    }
    if (!(scene.bounds.min.x < scene.bounds.max.x && scene.bounds.min.y < scene.bounds.max.y)) {
        errors.push_back("scene bounds are empty");
    } else if (!scene.bounds.contains(scene.target.plan())) {
        errors.push_back("target lies outside the scene bounds");
    }
    return errors;
}

Polygon counter_clockwise(std::span<const Vec2> poly)
{
    Polygon out(poly.begin(), poly.end());
    if (signed_area(poly) < 0.0) {
        std::reverse(out.begin(), out.end());
    }
    return out;
}

double collision_length(std::span<const Vec2> a, std::span<const Vec2> b)
{
    require_non_degenerate(a, "A");
    require_non_degenerate(b, "B");
    if (!boxes_overlap(bounding_box(a), bounding_box(b))) {
        return 0.0;
    }
    const Polygon ccw_a = counter_clockwise(a);
    const Polygon ccw_b = counter_clockwise(b);
    const double tol = 1e-12 * std::max(coordinate_scale(a), coordinate_scale(b));
    const double from_a = boundary_inside(ccw_a, ccw_b, tol);
    const double from_b = boundary_inside(ccw_b, ccw_a, tol);
    return from_a + from_b;
}

double total_collision_length(std::span<const Vec2> footprint, const Scene& scene, ZRange z)
{
    double total = 0.0;
    for (const Prism& prism : scene.obstacles) {
        if (prism.z.overlaps(z)) {
            total += collision_length(footprint, prism.footprint);
        }
    }
    return total;
}

double segment_occluded(Vec3 s, Vec3 t, const Scene& scene)
{
    if (lexicographically_less(t, s)) {
        std::swap(s, t);
    }
    std::vector<Interval> intervals;
    Box seg_box;
    seg_box.add(s.plan());
    seg_box.add(t.plan());
    for (const Prism& prism : scene.obstacles) {
        const Box box = bounding_box(prism.footprint);
        if (box.hi.x < seg_box.lo.x || seg_box.hi.x < box.lo.x || box.hi.y < seg_box.lo.y ||
            seg_box.hi.y < box.lo.y) {
            continue;
        }
        prism_intervals(s, t, prism, intervals);
    }
    if (intervals.empty()) {
        return 0.0;
    }
    std::sort(intervals.begin(), intervals.end());
    double covered = 0.0;
    double cur_lo = intervals.front().first;
    double cur_hi = intervals.front().second;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        if (intervals[i].first <= cur_hi) {
            cur_hi = std::max(cur_hi, intervals[i].second);
        } else {
            covered += cur_hi - cur_lo;
            cur_lo = intervals[i].first;
            cur_hi = intervals[i].second;
        }
    }
    covered += cur_hi - cur_lo;
    return covered * norm(t - s);
}

Vec3 cone_ray_direction(Vec3 axis, double half_angle, int n_rays, int index)
{
    if (index == 0 || n_rays <= 1) {
        return axis;
    }
    // Frame perpendicular to the axis: e1 horizontal (z x axis), e2 = axis x e1.
    Vec3 e1{-axis.y, axis.x, 0.0};
    const double e1_norm = norm(e1);
    if (e1_norm < 1e-9) {
        e1 = {0.0, 1.0, 0.0};
    } else {
        e1 = e1 * (1.0 / e1_norm);
    }
    const Vec3 e2 = cross(axis, e1);

    const int rings = (n_rays - 1 + 7) / 8;
    const int ring = (index - 1) / 8 + 1;
    const int slot = (index - 1) % 8;
    const int in_ring = std::min(8, n_rays - 1 - (ring - 1) * 8);
    const double polar = half_angle * static_cast<double>(ring) / static_cast<double>(rings);
    const double azimuth =
        (static_cast<double>(slot) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(in_ring);
    const Vec3 radial = e1 * std::cos(azimuth) + e2 * std::sin(azimuth);
    return axis * std::cos(polar) + radial * std::sin(polar);
}

double cone_occlusion(Vec3 apex, Vec3 axis, double half_angle, double range, int n_rays,
                      const Scene& scene)
{
    if (n_rays < 1) {
        throw InputError("cone_occlusion: n_rays must be at least 1");
    }
    if (scene.obstacles.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (int i = 0; i < n_rays; ++i) {
        const Vec3 dir = cone_ray_direction(axis, half_angle, n_rays, i);
        total += segment_occluded(apex, apex + dir * range, scene);
    }
    return total / static_cast<double>(n_rays);
}

std::array<PlanarPose, 6> perturbed_poses(const PlanarPose& pose, const GradientStep& step)
{
    const double dxy = step.delta_xy;
    const double dth = step.delta_theta;
    return {{
        {pose.x + dxy, pose.y, pose.theta},
        {pose.x - dxy, pose.y, pose.theta},
        {pose.x, pose.y + dxy, pose.theta},
        {pose.x, pose.y - dxy, pose.theta},
        {pose.x, pose.y, normalize_angle(pose.theta + dth)},
        {pose.x, pose.y, normalize_angle(pose.theta - dth)},
    }};
}

PoseGradient central_difference(const std::array<double, 6>& values, const GradientStep& step)
{
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericalError("fd_gradient: criterion returned a non-finite value");
        }
    }
    return {
        (values[0] - values[1]) / (2.0 * step.delta_xy),
        (values[2] - values[3]) / (2.0 * step.delta_xy),
        (values[4] - values[5]) / (2.0 * step.delta_theta),
    };
}

PoseGradient fd_gradient(const PoseCriterion& criterion, const PlanarPose& pose,
                         const GradientStep& step)
{
    if (!(step.delta_xy > 0.0) || !(step.delta_theta > 0.0)) {
        throw InputError("fd_gradient: steps must be strictly positive");
    }
    const auto poses = perturbed_poses(pose, step);
    std::array<double, 6> values{};
    for (std::size_t i = 0; i < poses.size(); ++i) {
        values[i] = criterion(poses[i]);
    }
    return central_difference(values, step);
}

} // namespace vismas
