#pragma once

#include "vismas/geometry.hpp"
#include "vismas/world.hpp"

#include <string_view>

namespace vismas {

enum class Embodiment { manikin, robot };

std::string_view to_string(Embodiment e);

/// Closed joint interval in radians. min == max locks the joint.
struct JointRange {
    double min = 0.0;
    double max = 0.0;

    constexpr double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
    constexpr bool contains(double v) const { return v >= min && v <= max; }
};

struct JointLimits {
    JointRange alpha; ///< pitch
    JointRange beta;  ///< roll
    JointRange theta; ///< yaw

    /// Plausible adult neck ranges: yaw +-60 deg, pitch +-45 deg, roll +-40 deg.
    static JointLimits manikin_defaults();
    /// Pan/tilt camera mast: pan +-170 deg, tilt +-90 deg, no roll.
    static JointLimits robot_defaults();
    static JointLimits defaults_for(Embodiment e);
};

/// Head (or camera) joints relative to the trunk frame.
struct HeadJoints {
    double alpha = 0.0; ///< pitch, positive looks up
    double beta = 0.0;  ///< roll about the vision axis
    double theta = 0.0; ///< yaw

    constexpr bool operator==(const HeadJoints&) const = default;
};

/// Bounds and adaptation step of the visibility cone half-angle.
struct ConeLimits {
    double min = deg_to_rad(2.0);
    double max = deg_to_rad(25.0);
    double step = deg_to_rad(0.5);
};

struct BodyState {
    PlanarPose trunk;
    HeadJoints head;
    double cone_half_angle = deg_to_rad(2.0);
    Embodiment embodiment = Embodiment::manikin;
    Polygon footprint;          ///< trunk outline in the trunk frame
    ZRange z_range{0.0, 1.8};   ///< heights swept by the body
    double eye_height = 1.6;
    double eye_forward_offset = 0.1;
    JointLimits limits = JointLimits::manikin_defaults();
    ConeLimits cone;
};

/// Eye (camera) point: trunk point lifted to eye height and pushed forward along the heading.
Vec3 eye_point(const BodyState& state);

/// Unit gaze direction Rz(theta_m + theta_b) * Ry(-alpha_b) * x. Roll does not move it.
Vec3 vision_axis(const BodyState& state);

/// Unit direction from the eye to `target`. Throws DegenerateDirectionError when they coincide.
Vec3 target_direction(const BodyState& state, Vec3 target);
Vec3 target_direction(const BodyState& state, const Scene& scene);

/// Angle in [0, pi] between the vision axis and the eye-to-target direction.
double misalignment(const BodyState& state, Vec3 target);
double misalignment(const BodyState& state, const Scene& scene);

/// Pitch and yaw (trunk-relative) that point the vision axis along `u`.
struct GazeAngles {
    double alpha = 0.0;
    double theta = 0.0;
};

/// Spherical decomposition of `u` relative to trunk heading `trunk_theta`.
/// When u is (numerically) vertical the yaw is taken from `current_yaw`.
GazeAngles gaze_angles_for(Vec3 u, double trunk_theta, double current_yaw);

HeadJoints clamp_to_limits(const HeadJoints& head, const JointLimits& limits);

/// Trunk footprint placed in the world by the trunk pose.
Polygon world_footprint(const BodyState& state);
Polygon world_footprint(std::span<const Vec2> local, const PlanarPose& pose);

/// Empty when all body invariants hold.
std::vector<std::string> validate_body(const BodyState& state);

} // namespace vismas
