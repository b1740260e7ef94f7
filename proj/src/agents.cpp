#include "vismas/agents.hpp"

#include "vismas/body.hpp"
#include "vismas/errors.hpp"

#include <algorithm>
#include <array>

namespace vismas {

namespace {

Contribution blank(const WorldState& snapshot)
{
    Contribution c;
    c.tick = snapshot.tick;
    return c;
}

bool all_zero(double center, const std::array<double, 6>& values)
{
    return center == 0.0 && std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double body_collision(const BodyState& body, const PlanarPose& pose, const Scene& scene)
{
    return total_collision_length(world_footprint(body.footprint, pose), scene, body.z_range);
}

double cone_criterion(const BodyState& body, Vec3 aim, const Scene& scene, int n_rays)
{
    const Vec3 eye = eye_point(body);
    const double range = norm(aim - eye);
    if (!(range > 0.0)) {
        return 0.0;
    }
    return cone_occlusion(eye, vision_axis(body), body.cone_half_angle, range, n_rays, scene);
}

} // namespace

std::string_view to_string(AgentKind kind)
{
    switch (kind) {
    case AgentKind::attraction:
        return "attraction";
    case AgentKind::repulsion:
        return "repulsion";
    case AgentKind::head_orientation:
        return "head";
    case AgentKind::visibility:
        return "visibility";
    case AgentKind::operator_input:
        return "operator";
    }
    return "unknown";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view name)
{
    for (AgentKind k : {AgentKind::attraction, AgentKind::repulsion, AgentKind::head_orientation,
                        AgentKind::visibility, AgentKind::operator_input}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

Contribution attraction_step(const WorldState& snapshot)
{
    Contribution c = blank(snapshot);
    const BodyState& body = snapshot.body;
    const Vec3 aim = snapshot.aim_point();

    const Vec2 to_aim = aim.plan() - Vec2{body.trunk.x, body.trunk.y};
    if (norm(to_aim) > translation_dead_band) {
        c.d_xy = to_aim;
    }
    // Bearing of the floor projection of u; undefined when the aim is overhead.
    const Vec2 u_floor = aim.plan() - eye_point(body).plan();
    if (norm(u_floor) > translation_dead_band) {
        c.d_theta = normalize_angle(std::atan2(u_floor.y, u_floor.x) - body.trunk.theta);
    }
    return c;
}

Contribution repulsion_step(const WorldState& snapshot, const GradientStep& step)
{
    Contribution c = blank(snapshot);
    const BodyState& body = snapshot.body;
    const double center = body_collision(body, body.trunk, snapshot.scene);
    const auto poses = perturbed_poses(body.trunk, step);
    std::array<double, 6> values{};
    for (std::size_t i = 0; i < poses.size(); ++i) {
        values[i] = body_collision(body, poses[i], snapshot.scene);
    }
    if (all_zero(center, values)) {
        return c;
    }
    const PoseGradient g = central_difference(values, step);
    c.d_xy = {-g.x, -g.y};
    c.d_theta = -g.theta;
    return c;
}

Contribution head_orientation_step(const WorldState& snapshot)
{
    Contribution c = blank(snapshot);
    const BodyState& body = snapshot.body;
    Vec3 u;
    try {
        u = target_direction(body, snapshot.aim_point());
    } catch (const DegenerateDirectionError&) {
        return c;
    }
    const GazeAngles wanted = gaze_angles_for(u, body.trunk.theta, body.head.theta);
    const double alpha = body.limits.alpha.clamp(wanted.alpha);
    const double theta = body.limits.theta.clamp(wanted.theta);
    c.d_head = {alpha - body.head.alpha, theta - body.head.theta};
    return c;
}

Contribution visibility_step(const WorldState& snapshot, const GradientStep& step, int n_rays)
{
    Contribution c = blank(snapshot);
    const Vec3 aim = snapshot.aim_point();
    const Scene& scene = snapshot.scene;
    BodyState probe = snapshot.body;
    const double center = cone_criterion(probe, aim, scene, n_rays);

    const auto poses = perturbed_poses(snapshot.body.trunk, step);
    std::array<double, 6> trunk_values{};
    for (std::size_t i = 0; i < poses.size(); ++i) {
        probe.trunk = poses[i];
        trunk_values[i] = cone_criterion(probe, aim, scene, n_rays);
    }
    probe.trunk = snapshot.body.trunk;
    if (!all_zero(center, trunk_values)) {
        const PoseGradient g = central_difference(trunk_values, step);
        c.d_xy = {-g.x, -g.y};
        c.d_theta = -g.theta;
    }

    const double dh = step.delta_theta;
    const HeadJoints head = snapshot.body.head;
    std::array<double, 4> head_values{};
    const std::array<HeadJoints, 4> heads{{
        {head.alpha + dh, head.beta, head.theta},
        {head.alpha - dh, head.beta, head.theta},
        {head.alpha, head.beta, head.theta + dh},
        {head.alpha, head.beta, head.theta - dh},
    }};
    for (std::size_t i = 0; i < heads.size(); ++i) {
        probe.head = heads[i];
        head_values[i] = cone_criterion(probe, aim, scene, n_rays);
    }
    const bool head_flat = center == 0.0 && std::all_of(head_values.begin(), head_values.end(),
                                                        [](double v) { return v == 0.0; });
    if (!head_flat) {
        for (double v : head_values) {
            if (!std::isfinite(v)) {
                throw NumericalError("visibility: non-finite cone occlusion");
            }
        }
        c.d_head.alpha = -(head_values[0] - head_values[1]) / (2.0 * dh);
        c.d_head.theta = -(head_values[2] - head_values[3]) / (2.0 * dh);
    }
    return c;
}

Contribution adapt_cone(const WorldState& snapshot)
{
    Contribution c = blank(snapshot);
    const BodyState& body = snapshot.body;
    double error = 0.0;
    try {
        error = misalignment(body, snapshot.aim_point());
    } catch (const DegenerateDirectionError&) {
        error = 0.0;
    }
    c.d_cone = error < body.cone_half_angle ? body.cone.step : -body.cone.step;
    return c;
}

Contribution operator_step(const WorldState& snapshot, const OperatorInput& input)
{
    Contribution c = blank(snapshot);
    if (auto sample = input.sample_at(snapshot.tick)) {
        c.d_xy = {sample->vx, sample->vy};
        c.d_theta = sample->omega;
    }
    return c;
}

Contribution Agent::act(const WorldState& snapshot) const
{
    Contribution c = propose(snapshot);
    c.agent_id = id_;
    c.tick = snapshot.tick;
    return c;
}

Contribution VisibilityAgent::propose(const WorldState& s) const
{
    Contribution c = visibility_step(s, step_, n_rays_);
    c.d_cone = adapt_cone(s).d_cone;
    return c;
}

Contribution OperatorAgent::propose(const WorldState& s) const
{
    if (!input_) {
        Contribution c;
        c.tick = s.tick;
        return c;
    }
    return operator_step(s, *input_);
}

std::unique_ptr<Agent> make_agent(AgentKind kind, std::string id, const GradientStep& step,
                                  std::shared_ptr<const OperatorInput> input, int n_rays)
{
    switch (kind) {
    case AgentKind::attraction:
        return std::make_unique<AttractionAgent>(std::move(id));
    case AgentKind::repulsion:
        return std::make_unique<RepulsionAgent>(std::move(id), step);
    case AgentKind::head_orientation:
        return std::make_unique<HeadOrientationAgent>(std::move(id));
    case AgentKind::visibility:
        return std::make_unique<VisibilityAgent>(std::move(id), step, n_rays);
    case AgentKind::operator_input:
        return std::make_unique<OperatorAgent>(std::move(id), std::move(input));
    }
    throw InputError("unknown agent kind");
}

} // namespace vismas
