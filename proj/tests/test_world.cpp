#include "oracles.hpp"

#include "vismas/body.hpp"
#include "vismas/errors.hpp"
#include "vismas/world.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace vismas;

namespace {

Scene scene_with(std::vector<Prism> obstacles)
{
    Scene s;
    s.obstacles = std::move(obstacles);
    s.target = {5, 0, 1};
    s.bounds = {{-10, -10}, {10, 10}};
    return s;
}

Prism unit_cube_at(double x, double y, double z = 0.0)
{
    return {"cube", oracle::rect(x, y, x + 1, y + 1), {z, z + 1}};
}

} // namespace

TEST_CASE("geometry helpers")
{
    CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(normalize_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
    CHECK(signed_area(oracle::rect(0, 0, 2, 1)) == doctest::Approx(2.0));
    CHECK(perimeter(oracle::rect(0, 0, 2, 1)) == doctest::Approx(6.0));
    CHECK(is_simple(oracle::rect(0, 0, 1, 1)));
    const Polygon bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_FALSE(is_simple(bowtie));
    CHECK(locate({0.5, 0.5}, oracle::rect(0, 0, 1, 1)) == Containment::inside);
    CHECK(locate({1.0, 0.5}, oracle::rect(0, 0, 1, 1)) == Containment::boundary);
    CHECK(locate({1.5, 0.5}, oracle::rect(0, 0, 1, 1)) == Containment::outside);
}

TEST_CASE("counter_clockwise and validation")
{
    Polygon cw = oracle::rect(0, 0, 1, 1);
    std::reverse(cw.begin(), cw.end());
    CHECK(signed_area(counter_clockwise(cw)) > 0);
    CHECK(validate_polygon(Polygon{{0, 0}, {1, 0}}, "p").size() == 1);
    CHECK_FALSE(validate_polygon(Polygon{{0, 0}, {1, 0}, {2, 0}}, "p").empty());

    Scene s = scene_with({unit_cube_at(0, 0)});
    CHECK(validate_scene(s).empty());
    s.target = {20, 0, 0};
    CHECK_FALSE(validate_scene(s).empty());
    s = scene_with({{"flat", oracle::rect(0, 0, 1, 1), {1, 1}}});
    CHECK_FALSE(validate_scene(s).empty());
}

TEST_CASE("collision_length examples")
{
    const Polygon a = oracle::rect(0, 0, 1, 1);
    CHECK(collision_length(a, oracle::rect(3, 0, 4, 1)) == 0.0);
    CHECK(collision_length(a, a) == doctest::Approx(4.0).epsilon(1e-12));

    const Polygon shifted = oracle::rect(0.5, 0, 1.5, 1);
    const double l = collision_length(a, shifted);
    CHECK(l == doctest::Approx(oracle::convex_overlap_perimeter(a, shifted)).epsilon(1e-12));
    // Rasterized area check that the overlap really is the 0.5 x 1 strip.
    std::mt19937_64 rng(7);
    CHECK(oracle::sampled_overlap_area(a, shifted, 200000, rng) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(l == doctest::Approx(3.0).epsilon(1e-12));

    // Shared edge only, and a shared corner.
    CHECK(collision_length(a, oracle::rect(1, 0, 2, 1)) == 0.0);
    CHECK(collision_length(a, oracle::rect(1, 1, 2, 2)) == 0.0);
    // Containment counts the inner perimeter.
    CHECK(collision_length(a, oracle::rect(0.25, 0.25, 0.75, 0.75)) == doctest::Approx(2.0));
    // Clockwise input is accepted.
    Polygon cw = shifted;
    std::reverse(cw.begin(), cw.end());
    CHECK(collision_length(a, cw) == doctest::Approx(3.0));

    CHECK_THROWS_AS(collision_length(a, Polygon{{0, 0}, {1, 1}}), InputError);
    CHECK_THROWS_AS(collision_length(a, Polygon{{0, 0}, {1, 0}, {2, 0}}), InputError);
}

TEST_CASE("collision_length of a concave polygon sums all components")
{
    // U shape; a bar across both arms overlaps in two separate squares.
    const Polygon u{{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}};
    const Polygon bar = oracle::rect(-1, 2, 4, 2.5);
    CHECK(collision_length(u, bar) == doctest::Approx(2 * (1 + 0.5) * 2));
    CHECK(collision_length(bar, u) == doctest::Approx(collision_length(u, bar)).epsilon(1e-12));
}

TEST_CASE("collision_length matches the clipping oracle on random convex pairs")
{
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::uniform_real_distribution<double> side(0.2, 1.5);
    std::uniform_real_distribution<double> rot(-std::numbers::pi, std::numbers::pi);
    int overlapping = 0;
    int disjoint = 0;
    for (int i = 0; i < 10000; ++i) {
        const Polygon a = oracle::square({pos(rng), pos(rng)}, side(rng), rot(rng));
        const Polygon b = oracle::square({pos(rng), pos(rng)}, side(rng), rot(rng));
        const double l = collision_length(a, b);
        const Polygon c = oracle::clip_convex(a, b);
        const double area = c.size() >= 3 ? oracle::area(c) : 0.0;
        // zero length <=> disjoint interiors
        CHECK((l == 0.0) == (area < 1e-12));
        if (area >= 1e-12) {
            ++overlapping;
            CHECK(l == doctest::Approx(oracle::perimeter(c)).epsilon(1e-9));
        } else {
            ++disjoint;
        }
        CHECK(l == collision_length(b, a));
    }
    CHECK(overlapping > 1000);
    CHECK(disjoint > 1000);
}

TEST_CASE("total_collision_length filters by height")
{
    Scene s = scene_with({{"low", oracle::rect(0, 0, 1, 1), {0, 0.5}}, {"high", oracle::rect(0, 0, 1, 1), {2, 3}}});
    const Polygon body = oracle::rect(0.5, 0, 1.5, 1);
    CHECK(total_collision_length(body, s, {0, 1.8}) == doctest::Approx(3.0));
    CHECK(total_collision_length(body, s, {0, 3}) == doctest::Approx(6.0));
    // Touching height ranges do not collide.
    CHECK(total_collision_length(body, s, {0.5, 2}) == 0.0);
}

TEST_CASE("segment_occluded")
{
    const Scene s = scene_with({unit_cube_at(0, 0)});
    CHECK(segment_occluded({-1, 0.5, 0.5}, {2, 0.5, 0.5}, s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(segment_occluded({2, 0.5, 0.5}, {-1, 0.5, 0.5}, s) == segment_occluded({-1, 0.5, 0.5}, {2, 0.5, 0.5}, s));
    // Grazing along a face is not occluded.
    CHECK(segment_occluded({-1, 0.0, 0.5}, {2, 0.0, 0.5}, s) == 0.0);
    CHECK(segment_occluded({-1, 0.5, 1.0}, {2, 0.5, 1.0}, s) == 0.0);
    // Entirely above.
    CHECK(segment_occluded({-1, 0.5, 1.5}, {2, 0.5, 1.5}, s) == 0.0);
    // Endpoint inside.
    CHECK(segment_occluded({0.5, 0.5, 0.5}, {2, 0.5, 0.5}, s) == doctest::Approx(0.5));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::uniform_real_distribution<double> h(-0.5, 1.5);
    const Scene two = scene_with({unit_cube_at(0, 0), {"tri", {{0.5, 1.5}, {1.8, 1.2}, {1.0, 2.0}}, {0.2, 1.2}}});
    for (int i = 0; i < 200; ++i) {
        const Vec3 a{u(rng), u(rng), h(rng)};
        const Vec3 b{u(rng), u(rng), h(rng)};
        const double exact = segment_occluded(a, b, two);
        CHECK(exact == doctest::Approx(oracle::sampled_chord(a, b, two, 20000)).epsilon(0.01).scale(0.002));
        CHECK(exact == segment_occluded(b, a, two));
    }
}

TEST_CASE("cone ray fan layout")
{
    const double half = 0.3;
    for (const Vec3 axis : {Vec3{1, 0, 0}, Vec3{0.6, 0.0, 0.8}, Vec3{0, 0, 1}}) {
        CHECK(cone_ray_direction(axis, half, 25, 0) == axis);
        Vec3 sum{};
        for (int i = 1; i < 25; ++i) {
            const Vec3 d = cone_ray_direction(axis, half, 25, i);
            CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-12));
            const int ring = (i - 1) / 8 + 1;
            const double polar = std::acos(std::clamp(dot(d, axis), -1.0, 1.0));
            CHECK(polar == doctest::Approx(half * ring / 3.0).epsilon(1e-9));
            sum = sum + d;
        }
        // Rings are balanced around the axis.
        const Vec3 along = axis * dot(sum, axis);
        CHECK(norm(sum - along) < 1e-12);
        // Neighbors on a ring are 45 degrees apart in azimuth.
        const Vec3 r1 = cone_ray_direction(axis, half, 25, 1) - axis * std::cos(half / 3);
        const Vec3 r2 = cone_ray_direction(axis, half, 25, 2) - axis * std::cos(half / 3);
        CHECK(std::acos(dot(r1, r2) / (norm(r1) * norm(r2))) == doctest::Approx(std::numbers::pi / 4));
    }
    // A partial ring spreads its rays evenly.
    const Vec3 a{1, 0, 0};
    const Vec3 p = cone_ray_direction(a, half, 5, 1) - a * std::cos(half);
    const Vec3 q = cone_ray_direction(a, half, 5, 2) - a * std::cos(half);
    CHECK(std::acos(dot(p, q) / (norm(p) * norm(q))) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("cone_occlusion")
{
    const Scene empty = scene_with({});
    CHECK(cone_occlusion({0, 0, 0.5}, {1, 0, 0}, 0.2, 5.0, 25, empty) == 0.0);

    const Scene cube = scene_with({unit_cube_at(2, 0)});
    CHECK(cone_occlusion({0, 0.5, 0.5}, {1, 0, 0}, 0.2, 5.0, 1, cube) == doctest::Approx(1.0));

    // Mean of the per-ray chords.
    double sum = 0.0;
    for (int i = 0; i < 25; ++i) {
        const Vec3 d = cone_ray_direction({1, 0, 0}, 0.2, 25, i);
        sum += segment_occluded({0, 0.5, 0.5}, Vec3{0, 0.5, 0.5} + d * 5.0, cube);
    }
    CHECK(cone_occlusion({0, 0.5, 0.5}, {1, 0, 0}, 0.2, 5.0, 25, cube) == doctest::Approx(sum / 25));

    // Grows monotonically as the obstacle widens.
    double prev = 0.0;
    for (double w = 0.05; w <= 2.0; w += 0.05) {
        const Scene s = scene_with({{"w", oracle::rect(2, 0.5 - w / 2, 2.3, 0.5 + w / 2), {0, 1}}});
        const double v = cone_occlusion({0, 0.5, 0.5}, {1, 0, 0}, 0.2, 5.0, 25, s);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(prev > 0.0);
    CHECK_THROWS_AS(cone_occlusion({0, 0, 0}, {1, 0, 0}, 0.2, 5.0, 0, cube), InputError);
}

TEST_CASE("fd_gradient")
{
    const GradientStep step{};
    const PlanarPose p{0.3, -0.7, 0.4};
    auto affine = [](const PlanarPose& q) { return 2.0 * q.x - 3.0 * q.y + 0.5 * q.theta + 1.0; };
    const PoseGradient g = fd_gradient(affine, p, step);
    CHECK(std::abs(g.x - 2.0) < 1e-12);
    CHECK(std::abs(g.y + 3.0) < 1e-12);
    CHECK(std::abs(g.theta - 0.5) < 1e-12);

    const PoseGradient zero = fd_gradient([](const PlanarPose&) { return 4.0; }, p, step);
    CHECK(zero.x == 0.0);
    CHECK(zero.y == 0.0);
    CHECK(zero.theta == 0.0);

    CHECK_THROWS_AS(fd_gradient([](const PlanarPose&) { return std::nan(""); }, p, step), NumericalError);

    // Heading perturbations wrap around pi.
    const auto poses = perturbed_poses({0, 0, std::numbers::pi}, step);
    CHECK(poses[4].theta == doctest::Approx(-std::numbers::pi + 1e-3));
}

TEST_CASE("fd_gradient of collision length against the secant oracle")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> off(-0.6, 0.6);
    std::uniform_real_distribution<double> rot(-0.7, 0.7);
    const Polygon wall = oracle::square({0, 0}, 1.0, 0.0);
    const Polygon body = oracle::square({0, 0}, 0.8, 0.0);
    int checked = 0;
    while (checked < 50) {
        const PlanarPose p{off(rng), off(rng), rot(rng)};
        auto l = [&](const PlanarPose& q) { return collision_length(world_footprint(body, q), wall); };
        auto o = [&](const PlanarPose& q) {
            return oracle::convex_overlap_perimeter(oracle::place(body, q.x, q.y, q.theta), wall);
        };
        if (o(p) == 0.0 || !oracle::smooth_near(o, p, 1e-3, 1e-6, 1e-4)) {
            continue;
        }
        const PoseGradient g = fd_gradient(l, p, GradientStep{});
        const oracle::Grad s = oracle::secant(o, p, 1e-6);
        const double scale = std::max({1.0, std::abs(s.x), std::abs(s.y), std::abs(s.theta)});
        CHECK(std::abs(g.x - s.x) <= 1e-3 * scale);
        CHECK(std::abs(g.y - s.y) <= 1e-3 * scale);
        CHECK(std::abs(g.theta - s.theta) <= 1e-3 * scale);
        ++checked;
    }
}
