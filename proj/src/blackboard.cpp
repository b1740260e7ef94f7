#include "vismas/blackboard.hpp"

#include "vismas/errors.hpp"

#include <algorithm>

namespace vismas {

namespace {

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw NumericalError(std::string("normalize: non-finite ") + what);
    }
}

double clamp_symmetric(double v, double bound)
{
    return std::clamp(v, -bound, bound);
}

// Sorting before summing makes the total independent of contribution order.
double order_free_sum(std::vector<double>& values)
{
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

} // namespace

Contribution normalize(const Contribution& raw, const NormalizationConstants& k)
{
    require_finite(raw.d_xy.x, "d_x");
    require_finite(raw.d_xy.y, "d_y");
    require_finite(raw.d_theta, "d_theta");
    require_finite(raw.d_head.alpha, "d_alpha");
    require_finite(raw.d_head.theta, "d_theta_b");
    require_finite(raw.d_cone, "d_cone");

    Contribution out = raw;
    const double len = norm(raw.d_xy);
    if (len <= translation_dead_band) {
        out.d_xy = {};
    } else if (std::abs(len - k.delta_pos) > 1e-12 * k.delta_pos) {
        out.d_xy = raw.d_xy * (k.delta_pos / len);
    }
    out.d_theta = clamp_symmetric(raw.d_theta, k.delta_or);
    out.d_head.alpha = clamp_symmetric(raw.d_head.alpha, k.delta_or);
    out.d_head.theta = clamp_symmetric(raw.d_head.theta, k.delta_or);
    return out;
}

Blackboard::Blackboard(WorldState initial, std::vector<std::string> agent_ids)
    : state_(std::make_shared<const WorldState>(std::move(initial))),
      agent_ids_(agent_ids.begin(), agent_ids.end())
{
}

std::shared_ptr<const WorldState> Blackboard::snapshot() const
{
    std::lock_guard lock(mutex_);
    return state_;
}

std::shared_ptr<const WorldState> Blackboard::apply(std::span<const Contribution> contributions)
{
    std::shared_ptr<const WorldState> current = snapshot();
    const std::size_t n = contributions.size();
    std::vector<double> dx, dy, dth, dal, dhb, dcone;
    for (auto* v : {&dx, &dy, &dth, &dal, &dhb, &dcone}) {
        v->reserve(n);
    }
    for (const Contribution& c : contributions) {
        if (!agent_ids_.contains(c.agent_id)) {
            throw ProtocolError("contribution from unknown agent '" + c.agent_id + "'");
        }
        if (c.tick != current->tick) {
            throw ProtocolError("contribution from '" + c.agent_id + "' stamped for tick " +
                                std::to_string(c.tick) + " applied at tick " +
                                std::to_string(current->tick));
        }
        dx.push_back(c.d_xy.x);
        dy.push_back(c.d_xy.y);
        dth.push_back(c.d_theta);
        dal.push_back(c.d_head.alpha);
        dhb.push_back(c.d_head.theta);
        dcone.push_back(c.d_cone);
    }

    WorldState next = *current;
    BodyState& body = next.body;
    body.trunk.x += order_free_sum(dx);
    body.trunk.y += order_free_sum(dy);
    body.trunk.theta = normalize_angle(body.trunk.theta + order_free_sum(dth));
    body.head.alpha += order_free_sum(dal);
    body.head.theta += order_free_sum(dhb);
    body.head = clamp_to_limits(body.head, body.limits);
    body.cone_half_angle =
        std::clamp(body.cone_half_angle + order_free_sum(dcone), body.cone.min, body.cone.max);
    next.tick += 1;

    auto published = std::make_shared<const WorldState>(std::move(next));
    std::lock_guard lock(mutex_);
    state_ = published;
    return published;
}

void Blackboard::set_intermediate_target(std::optional<Vec3> point)
{
    std::lock_guard lock(mutex_);
    auto next = std::make_shared<WorldState>(*state_);
    next->intermediate_target = point;
    state_ = std::move(next);
}

} // namespace vismas
