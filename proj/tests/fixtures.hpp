#pragma once

#include "oracles.hpp"

#include "vismas/agents.hpp"
#include "vismas/blackboard.hpp"
#include "vismas/scheduler.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fixture {

using namespace vismas;

inline Scene open_scene(Vec3 target, std::vector<Prism> obstacles = {})
{
    Scene s;
    s.obstacles = std::move(obstacles);
    s.target = target;
    s.bounds = {{-20, -20}, {20, 20}};
    return s;
}

inline BodyState body(PlanarPose pose = {}, double eye_height = 1.6, double offset = 0.0)
{
    BodyState b;
    b.trunk = pose;
    b.footprint = oracle::rect(-0.2, -0.15, 0.2, 0.15);
    b.eye_height = eye_height;
    b.eye_forward_offset = offset;
    return b;
}

inline WorldState state(BodyState b, Scene s, std::uint64_t tick = 0)
{
    WorldState w;
    w.body = std::move(b);
    w.scene = std::move(s);
    w.tick = tick;
    return w;
}

struct Agents {
    std::vector<std::unique_ptr<Agent>> agents;
    std::vector<AgentConfig> configs;
    std::vector<std::string> ids;

    Agents& add(AgentKind kind, int rate, std::string id = {},
                std::shared_ptr<const OperatorInput> input = nullptr)
    {
        if (id.empty()) {
            id = std::string(to_string(kind));
        }
        agents.push_back(make_agent(kind, id, GradientStep{}, std::move(input)));
        configs.push_back({id, rate, true});
        ids.push_back(id);
        return *this;
    }
};

inline std::unique_ptr<Scheduler> scheduler(WorldState initial, Agents a, RunConfig config = {},
                                            std::shared_ptr<LiveInput> live = nullptr)
{
    auto board = std::make_shared<Blackboard>(std::move(initial), a.ids);
    return std::make_unique<Scheduler>(board, std::move(a.agents), std::move(a.configs), config,
                                       std::move(live));
}

} // namespace fixture
