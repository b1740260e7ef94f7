#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: convex clipping, crossing-number membership, plain sampling.

#include "vismas/geometry.hpp"
#include "vismas/world.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using vismas::Polygon;
using vismas::Vec2;
using vismas::Vec3;

inline Polygon square(Vec2 c, double side, double rot = 0.0)
{
    const double h = side / 2.0;
    const double cs = std::cos(rot);
    const double sn = std::sin(rot);
    Polygon p;
    for (Vec2 v : {Vec2{-h, -h}, Vec2{h, -h}, Vec2{h, h}, Vec2{-h, h}}) {
        p.push_back({c.x + cs * v.x - sn * v.y, c.y + sn * v.x + cs * v.y});
    }
    return p;
}

inline Polygon rect(double x0, double y0, double x1, double y1)
{
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

inline double area(const Polygon& p)
{
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 u = p[i];
        const Vec2 v = p[(i + 1) % p.size()];
        a += u.x * v.y - v.x * u.y;
    }
    return a / 2.0;
}

inline double perimeter(const Polygon& p)
{
    double l = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 d = p[(i + 1) % p.size()] - p[i];
        l += std::hypot(d.x, d.y);
    }
    return l;
}

// Sutherland-Hodgman; `clip` must be convex and counter-clockwise.
inline Polygon clip_convex(const Polygon& subject, const Polygon& clip)
{
    Polygon out = subject;
    for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Vec2 a = clip[i];
        const Vec2 b = clip[(i + 1) % clip.size()];
        auto side = [&](Vec2 p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); };
        Polygon in = std::move(out);
        out.clear();
        for (std::size_t j = 0; j < in.size(); ++j) {
            const Vec2 p = in[j];
            const Vec2 q = in[(j + 1) % in.size()];
            const double sp = side(p);
            const double sq = side(q);
            if (sp >= 0) {
                out.push_back(p);
            }
            if ((sp >= 0) != (sq >= 0)) {
                const double t = sp / (sp - sq);
                out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
            }
        }
    }
    return out;
}

// Perimeter of the intersection of two convex CCW polygons.
inline double convex_overlap_perimeter(const Polygon& a, const Polygon& b)
{
    const Polygon c = clip_convex(a, b);
    if (c.size() < 3 || std::abs(area(c)) < 1e-14) {
        return 0.0;
    }
    return perimeter(c);
}

// Crossing-number point-in-polygon.
inline bool inside(Vec2 p, const Polygon& poly)
{
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            in = !in;
        }
    }
    return in;
}

// Monte-Carlo estimate of the intersection area over the bounding box of `a`.
inline double sampled_overlap_area(const Polygon& a, const Polygon& b, int samples, std::mt19937_64& rng)
{
    double x0 = a[0].x, x1 = a[0].x, y0 = a[0].y, y1 = a[0].y;
    for (Vec2 v : a) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        hits += inside(p, a) && inside(p, b);
    }
    return (x1 - x0) * (y1 - y0) * hits / samples;
}

// Occluded length of [s, t] by dense midpoint sampling.
inline double sampled_chord(Vec3 s, Vec3 t, const vismas::Scene& scene, int samples)
{
    const Vec3 d = t - s;
    const double len = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        const double u = (i + 0.5) / samples;
        const Vec3 p = s + d * u;
        for (const auto& o : scene.obstacles) {
            if (p.z > o.z.lo && p.z < o.z.hi && inside(p.plan(), o.footprint)) {
                ++hits;
                break;
            }
        }
    }
    return len * hits / samples;
}

struct Grad {
    double x, y, theta;
};

// Forward secant with step h on each pose coordinate.
inline Grad secant(const std::function<double(const vismas::PlanarPose&)>& f, vismas::PlanarPose p, double h)
{
    const double f0 = f(p);
    auto shifted = [&](double dx, double dy, double dt) {
        return f({p.x + dx, p.y + dy, p.theta + dt});
    };
    return {(shifted(h, 0, 0) - f0) / h, (shifted(0, h, 0) - f0) / h, (shifted(0, 0, h) - f0) / h};
}

// True when the secant slope (step h) varies smoothly across p +- delta on
// every coordinate: a kink in the stencil shows up as an O(1) second
// difference of the slope, a smooth function gives O(delta^2).
inline bool smooth_near(const std::function<double(const vismas::PlanarPose&)>& f, vismas::PlanarPose p,
                        double delta, double h, double tol = 1e-6)
{
    auto component = [](const Grad& g, int axis) { return axis == 0 ? g.x : axis == 1 ? g.y : g.theta; };
    const Grad g0 = secant(f, p, h);
    for (int axis = 0; axis < 3; ++axis) {
        double side[2];
        for (int k = 0; k < 2; ++k) {
            vismas::PlanarPose q = p;
            (axis == 0 ? q.x : axis == 1 ? q.y : q.theta) += (k ? 1.0 : -1.0) * delta;
            side[k] = component(secant(f, q, h), axis);
        }
        const double mid = component(g0, axis);
        if (std::abs(side[0] - 2.0 * mid + side[1]) > tol * std::max(1.0, std::abs(mid))) {
            return false;
        }
    }
    return true;
}

// Rigid placement of a local polygon, written out by hand.
inline Polygon place(const Polygon& local, double x, double y, double theta)
{
    Polygon out;
    for (Vec2 v : local) {
        out.push_back({x + std::cos(theta) * v.x - std::sin(theta) * v.y,
                       y + std::sin(theta) * v.x + std::cos(theta) * v.y});
    }
    return out;
}

// 3x3 rotation matrices applied to a vector.
inline Vec3 rz(double a, Vec3 v)
{
    return {std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y, v.z};
}
inline Vec3 ry(double a, Vec3 v)
{
    return {std::cos(a) * v.x + std::sin(a) * v.z, v.y, -std::sin(a) * v.x + std::cos(a) * v.z};
}

} // namespace oracle
