#pragma once

#include "vismas/body.hpp"
#include "vismas/world.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace vismas {

/// Everything the agents may observe. Immutable once published.
struct WorldState {
    BodyState body;
    Scene scene;
    std::uint64_t tick = 0;
    std::optional<Vec3> intermediate_target;

    /// Point the attraction and visibility agents currently aim at.
    Vec3 aim_point() const { return intermediate_target.value_or(scene.target); }
};

struct HeadDelta {
    double alpha = 0.0;
    double theta = 0.0;

    constexpr bool operator==(const HeadDelta&) const = default;
};

/// An agent's proposed increment on the body state.
struct Contribution {
    std::string agent_id;
    Vec2 d_xy;
    double d_theta = 0.0;
    HeadDelta d_head;
    double d_cone = 0.0;
    std::uint64_t tick = 0;

    bool is_zero() const
    {
        return d_xy == Vec2{} && d_theta == 0.0 && d_head == HeadDelta{} && d_cone == 0.0;
    }
    bool operator==(const Contribution&) const = default;
};

struct NormalizationConstants {
    double delta_pos = 0.05;  ///< meters per firing
    double delta_or = 0.05;   ///< radians per firing
};

/// Raw translations below this magnitude are treated as zero.
inline constexpr double translation_dead_band = 1e-9;

/// Rescales the translation to exactly delta_pos and clamps every angular
/// component to [-delta_or, delta_or]. d_cone passes through unchanged.
Contribution normalize(const Contribution& raw, const NormalizationConstants& k);

/// Shared state of the simulation. Single writer, any number of readers.
class Blackboard {
public:
    Blackboard(WorldState initial, std::vector<std::string> agent_ids);

    /// Immutable view of the current state; never reflects a partial update.
    std::shared_ptr<const WorldState> snapshot() const;

    /// Sums the contributions component-wise, then applies pose update, joint
    /// and cone clamping, and advances the tick. Throws ProtocolError for an
    /// unknown agent id or a contribution stamped with another tick.
    std::shared_ptr<const WorldState> apply(std::span<const Contribution> contributions);

    void set_intermediate_target(std::optional<Vec3> point);

    bool knows_agent(const std::string& id) const { return agent_ids_.contains(id); }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const WorldState> state_;
    std::set<std::string> agent_ids_;
};

} // namespace vismas
