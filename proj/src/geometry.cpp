#include "vismas/geometry.hpp"

#include <algorithm>

namespace vismas {

double signed_area(std::span<const Vec2> poly)
{
    const std::size_t n = poly.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * twice;
}

double perimeter(std::span<const Vec2> poly)
{
    const std::size_t n = poly.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += norm(poly[(i + 1) % n] - poly[i]);
    }
    return total;
}

double coordinate_scale(std::span<const Vec2> poly)
{
    double scale = 1.0;
    for (const Vec2& p : poly) {
        scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    }
    return scale;
}

namespace {

int orientation_sign(Vec2 a, Vec2 b, Vec2 c, double eps)
{
    const double v = cross(b - a, c - a);
    if (v > eps) {
        return 1;
    }
    if (v < -eps) {
        return -1;
    }
    return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p, double eps)
{
    return std::min(a.x, b.x) - eps <= p.x && p.x <= std::max(a.x, b.x) + eps &&
           std::min(a.y, b.y) - eps <= p.y && p.y <= std::max(a.y, b.y) + eps;
}

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps)
{
    const int o1 = orientation_sign(a, b, c, eps);
    const int o2 = orientation_sign(a, b, d, eps);
    const int o3 = orientation_sign(c, d, a, eps);
    const int o4 = orientation_sign(c, d, b, eps);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    return (o1 == 0 && on_segment(a, b, c, eps)) || (o2 == 0 && on_segment(a, b, d, eps)) ||
           (o3 == 0 && on_segment(c, d, a, eps)) || (o4 == 0 && on_segment(c, d, b, eps));
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return norm(p - a);
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + ab * t));
}

} // namespace

bool is_simple(std::span<const Vec2> poly)
{
    const std::size_t n = poly.size();
    if (n < 3) {
        return false;
    }
    const double eps = 1e-12 * coordinate_scale(poly) * coordinate_scale(poly);
    for (std::size_t i = 0; i < n; ++i) {
        if (poly[i] == poly[(i + 1) % n]) {
            return false;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Vec2 c = poly[j];
            const Vec2 d = poly[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex; a fold-back
                // makes them overlap collinearly.
                const Vec2 shared = (j == i + 1) ? b : a;
                const Vec2 other_i = (j == i + 1) ? a : b;
                const Vec2 other_j = (j == i + 1) ? d : c;
                if (orientation_sign(shared, other_i, other_j, eps) == 0 &&
                    dot(other_i - shared, other_j - shared) > 0.0) {
                    return false;
                }
                continue;
            }
            if (segments_touch(a, b, c, d, eps)) {
                return false;
            }
        }
    }
    return true;
}

Containment locate(Vec2 p, std::span<const Vec2> poly, double tolerance)
{
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j];
        const Vec2 b = poly[i];
        if (point_segment_distance(p, a, b) <= tolerance) {
            return Containment::boundary;
        }
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside ? Containment::inside : Containment::outside;
}

} // namespace vismas
