#include "vismas/body.hpp"

#include "vismas/errors.hpp"

#include <algorithm>

namespace vismas {

std::string_view to_string(Embodiment e)
{
    return e == Embodiment::robot ? "robot" : "manikin";
}

JointLimits JointLimits::manikin_defaults()
{
    return {
        {deg_to_rad(-45.0), deg_to_rad(45.0)},
        {deg_to_rad(-40.0), deg_to_rad(40.0)},
        {deg_to_rad(-60.0), deg_to_rad(60.0)},
    };
}

JointLimits JointLimits::robot_defaults()
{
    return {
        {deg_to_rad(-90.0), deg_to_rad(90.0)},
        {0.0, 0.0},
        {deg_to_rad(-170.0), deg_to_rad(170.0)},
    };
}

JointLimits JointLimits::defaults_for(Embodiment e)
{
    return e == Embodiment::robot ? robot_defaults() : manikin_defaults();
}

Vec3 eye_point(const BodyState& state)
{
    const PlanarPose& p = state.trunk;
    const double off = state.eye_forward_offset;
    return {p.x + off * std::cos(p.theta), p.y + off * std::sin(p.theta), state.eye_height};
}

Vec3 vision_axis(const BodyState& state)
{
    const double yaw = state.trunk.theta + state.head.theta;
    const double pitch = state.head.alpha;
    const double c = std::cos(pitch);
    return {c * std::cos(yaw), c * std::sin(yaw), std::sin(pitch)};
}

Vec3 target_direction(const BodyState& state, Vec3 target)
{
    const Vec3 diff = target - eye_point(state);
    const double len = norm(diff);
    if (!(len > 0.0)) {
        throw DegenerateDirectionError("target coincides with the eye point");
    }
    return diff * (1.0 / len);
}

Vec3 target_direction(const BodyState& state, const Scene& scene)
{
    return target_direction(state, scene.target);
}

double misalignment(const BodyState& state, Vec3 target)
{
    const Vec3 u = target_direction(state, target);
    return std::acos(std::clamp(dot(vision_axis(state), u), -1.0, 1.0));
}

double misalignment(const BodyState& state, const Scene& scene)
{
    return misalignment(state, scene.target);
}

GazeAngles gaze_angles_for(Vec3 u, double trunk_theta, double current_yaw)
{
    const double horizontal = std::hypot(u.x, u.y);
    GazeAngles out;
    out.alpha = std::atan2(u.z, horizontal);
    out.theta = horizontal < 1e-9 ? current_yaw
                                  : normalize_angle(std::atan2(u.y, u.x) - trunk_theta);
    return out;
}

HeadJoints clamp_to_limits(const HeadJoints& head, const JointLimits& limits)
{
    return {limits.alpha.clamp(head.alpha), limits.beta.clamp(head.beta),
            limits.theta.clamp(head.theta)};
}

Polygon world_footprint(std::span<const Vec2> local, const PlanarPose& pose)
{
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    Polygon out;
    out.reserve(local.size());
    for (const Vec2& v : local) {
        out.push_back({pose.x + c * v.x - s * v.y, pose.y + s * v.x + c * v.y});
    }
    return out;
}

Polygon world_footprint(const BodyState& state)
{
    return world_footprint(state.footprint, state.trunk);
}

std::vector<std::string> validate_body(const BodyState& state)
{
    std::vector<std::string> errors = validate_polygon(state.footprint, "body footprint");
    const auto check_range = [&errors](const JointRange& r, const char* name) {
        if (!(r.min <= r.max)) {
            errors.push_back(std::string("joint limit ") + name + ": min exceeds max");
        } else if (!r.contains(0.0)) {
            errors.push_back(std::string("joint limit ") + name +
                             ": neutral posture (0) must lie inside the range");
        }
    };
    check_range(state.limits.alpha, "alpha");
    check_range(state.limits.beta, "beta");
    check_range(state.limits.theta, "theta");
    if (!state.limits.alpha.contains(state.head.alpha) || !state.limits.beta.contains(state.head.beta) ||
        !state.limits.theta.contains(state.head.theta)) {
        errors.push_back("initial head joints lie outside their limits");
    }
    if (!(state.cone.min > 0.0 && state.cone.min <= state.cone.max &&
          state.cone.max < std::numbers::pi / 2)) {
        errors.push_back("cone limits must satisfy 0 < min <= max < 90 deg");
    } else if (state.cone_half_angle < state.cone.min || state.cone_half_angle > state.cone.max) {
        errors.push_back("initial cone half-angle lies outside the cone limits");
    }
    if (!(state.cone.step > 0.0)) {
        errors.push_back("cone step must be positive");
    }
    if (!(state.z_range.lo < state.z_range.hi)) {
        errors.push_back("body height range is empty");
    }
    if (!std::isfinite(state.eye_height) || !std::isfinite(state.eye_forward_offset)) {
        errors.push_back("eye geometry must be finite");
    }
    return errors;
}

} // namespace vismas
