#pragma once

#include "vismas/blackboard.hpp"
#include "vismas/operator_input.hpp"
#include "vismas/world.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace vismas {

enum class AgentKind { attraction, repulsion, head_orientation, visibility, operator_input };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from_string(std::string_view name);

inline constexpr int default_cone_rays = 25;

// Raw contributions. Each is a pure function of the snapshot and the
// agent-local parameters; normalization happens on the blackboard side.

/// Toward the aim point in plan view, and turn the trunk toward the floor
/// projection of the eye-to-aim direction.
Contribution attraction_step(const WorldState& snapshot);

/// Descent on the total collision length of the body footprint.
Contribution repulsion_step(const WorldState& snapshot, const GradientStep& step);

/// Pitch/yaw increments that bring the vision axis onto the aim direction.
Contribution head_orientation_step(const WorldState& snapshot);

/// Descent on cone occlusion, over the trunk pose and over head pitch/yaw.
Contribution visibility_step(const WorldState& snapshot, const GradientStep& step,
                             int n_rays = default_cone_rays);

/// Widens the cone while the aim point lies strictly inside it, else narrows it.
Contribution adapt_cone(const WorldState& snapshot);

/// Operator command in force at the snapshot tick, as a raw contribution.
Contribution operator_step(const WorldState& snapshot, const OperatorInput& input);

/// An elementary agent: observes a snapshot and proposes a raw contribution.
/// Agents never see each other; the blackboard is their only medium.
class Agent {
public:
    explicit Agent(std::string id) : id_(std::move(id)) {}
    virtual ~Agent() = default;

    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

    const std::string& id() const { return id_; }
    virtual AgentKind kind() const = 0;

    /// Raw contribution stamped with this agent's id and the snapshot tick.
    Contribution act(const WorldState& snapshot) const;

protected:
    virtual Contribution propose(const WorldState& snapshot) const = 0;

private:
    std::string id_;
};

class AttractionAgent final : public Agent {
public:
    using Agent::Agent;
    AgentKind kind() const override { return AgentKind::attraction; }

protected:
    Contribution propose(const WorldState& s) const override { return attraction_step(s); }
};

class RepulsionAgent final : public Agent {
public:
    RepulsionAgent(std::string id, GradientStep step) : Agent(std::move(id)), step_(step) {}
    AgentKind kind() const override { return AgentKind::repulsion; }

protected:
    Contribution propose(const WorldState& s) const override { return repulsion_step(s, step_); }

private:
    GradientStep step_;
};

class HeadOrientationAgent final : public Agent {
public:
    using Agent::Agent;
    AgentKind kind() const override { return AgentKind::head_orientation; }

protected:
    Contribution propose(const WorldState& s) const override { return head_orientation_step(s); }
};

/// Occlusion descent plus cone adaptation.
class VisibilityAgent final : public Agent {
public:
    VisibilityAgent(std::string id, GradientStep step, int n_rays = default_cone_rays)
        : Agent(std::move(id)), step_(step), n_rays_(n_rays)
    {
    }
    AgentKind kind() const override { return AgentKind::visibility; }

protected:
    Contribution propose(const WorldState& s) const override;

private:
    GradientStep step_;
    int n_rays_;
};

class OperatorAgent final : public Agent {
public:
    OperatorAgent(std::string id, std::shared_ptr<const OperatorInput> input)
        : Agent(std::move(id)), input_(std::move(input))
    {
    }
    AgentKind kind() const override { return AgentKind::operator_input; }

protected:
    Contribution propose(const WorldState& s) const override;

private:
    std::shared_ptr<const OperatorInput> input_;
};

/// Builds an agent of `kind`. `input` is only used by the operator kind
/// (a null input makes it emit zero).
std::unique_ptr<Agent> make_agent(AgentKind kind, std::string id, const GradientStep& step,
                                  std::shared_ptr<const OperatorInput> input = nullptr,
                                  int n_rays = default_cone_rays);

} // namespace vismas
