#pragma once

#include "vismas/agents.hpp"
#include "vismas/blackboard.hpp"
#include "vismas/operator_input.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace vismas {

/// Firing schedule of one agent: it fires on ticks where tick % rate == 0.
struct AgentConfig {
    std::string agent_id;
    int rate = 1;
    bool active = true;

    bool fires_at(std::uint64_t tick) const
    {
        return active && tick % static_cast<std::uint64_t>(rate) == 0;
    }
    bool operator==(const AgentConfig&) const = default;
};

struct ConvergenceCriteria {
    double d_tol = 0.05;          ///< plan distance trunk-target, meters
    double visibility_tol = 1e-6; ///< occluded length of the eye-target segment, meters
    double align_tol = 0.01;      ///< misalignment, radians
    std::uint64_t stall_ticks = 200;
    double stall_radius = 0.1;    ///< trunk confinement radius for stall detection, meters
};

struct RunConfig {
    NormalizationConstants normalization;
    GradientStep gradient;
    ConvergenceCriteria convergence;
    std::uint64_t max_ticks = 5000;
    unsigned threads = 1; ///< worker threads for agent evaluation within a tick
};

// Commands drained at tick boundaries.
struct SetRate {
    std::string agent_id;
    int rate = 1;
};
struct SetActive {
    std::string agent_id;
    bool active = true;
};
struct SetNormalization {
    std::optional<double> delta_pos;
    std::optional<double> delta_or;
};
struct SetIntermediateTarget {
    std::optional<Vec3> point;
};
struct Steer {
    OperatorSample sample;
};
using Command = std::variant<SetRate, SetActive, SetNormalization, SetIntermediateTarget, Steer>;

/// Live commands come from an operator at run time; scheduled ones are part of
/// the scenario setup and are re-created rather than re-injected on replay.
enum class CommandOrigin { live, scheduled };

struct TimedCommand {
    Command command;
    CommandOrigin origin = CommandOrigin::live;
};

struct Firing {
    std::string agent_id;
    Contribution raw;
    Contribution normalized;
    std::string failure; ///< empty unless the agent threw
};

/// Convergence quantities of a state, all measured against the scene target.
struct Assessment {
    double distance = 0.0;
    double occluded = 0.0;
    double misalignment = 0.0;
    double collision = 0.0;
    bool converged = false;
};

struct TickRecord {
    std::uint64_t tick = 0; ///< tick that was executed
    std::vector<TimedCommand> commands;
    std::vector<Firing> firings;
    PlanarPose trunk;       ///< resulting state
    HeadJoints head;
    double cone_half_angle = 0.0;
    std::optional<Vec3> intermediate_target;
    Assessment assessment;
    std::uint64_t digest = 0;
};

enum class Outcome { converged, stalled, max_ticks };

std::string_view to_string(Outcome o);
std::optional<Outcome> outcome_from_string(std::string_view s);

struct RunResult {
    Outcome outcome = Outcome::max_ticks;
    std::uint64_t ticks = 0; ///< ticks executed
    Assessment final_assessment;
};

/// 64-bit FNV-1a hash of the canonical text form of the state (fixed-width
/// 17-significant-digit floats).
std::uint64_t state_digest(const WorldState& state);
std::string canonical_state_text(const WorldState& state);

Assessment assess(const WorldState& state, const ConvergenceCriteria& criteria);

/// Detects local minima. The run is stalled once, for `window` consecutive
/// ticks, either every state (rounded to 1e-9) was already visited, or the
/// trunk stayed within `radius` of where that stretch began. A radius <= 0
/// disables the second test. Commands reset the memory since they change the
/// dynamics.
class StallDetector {
public:
    explicit StallDetector(std::uint64_t window, double radius = 0.0) : window_(window), radius_(radius) {}

    /// Returns true when stalled after observing `state`.
    bool observe(const WorldState& state, bool commands_applied);
    void reset();
    std::uint64_t repeats() const { return repeats_; }

    static std::uint64_t fingerprint(const WorldState& state);

private:
    std::uint64_t window_;
    double radius_;
    std::uint64_t repeats_ = 0;
    std::uint64_t confined_ = 0;
    std::optional<Vec2> anchor_;
    std::unordered_set<std::uint64_t> seen_;
};

/// Deterministic tick loop over the registered agents.
class Scheduler {
public:
    Scheduler(std::shared_ptr<Blackboard> board, std::vector<std::unique_ptr<Agent>> agents,
              std::vector<AgentConfig> configs, RunConfig config,
              std::shared_ptr<LiveInput> live_input = nullptr);

    /// Drains pending commands, fires due agents against one snapshot,
    /// normalizes and applies their contributions, and records the tick.
    const TickRecord& tick();

    /// Runs until convergence, stall or max_ticks.
    RunResult run();

    /// Thread-safe; takes effect at the next tick boundary. Throws
    /// ProtocolError for unknown agents and InputError for invalid values.
    void post(Command command, CommandOrigin origin = CommandOrigin::live);
    /// Queues `command` for the boundary before tick `at`.
    void schedule(std::uint64_t at, Command command, CommandOrigin origin = CommandOrigin::scheduled);

    void set_rate(const std::string& agent_id, int rate) { post(SetRate{agent_id, rate}); }
    void set_active(const std::string& agent_id, bool active) { post(SetActive{agent_id, active}); }
    void set_normalization(const NormalizationConstants& k) { post(SetNormalization{k.delta_pos, k.delta_or}); }

    const Blackboard& board() const { return *board_; }
    std::shared_ptr<Blackboard> board_ptr() const { return board_; }
    const std::vector<TickRecord>& trace() const { return trace_; }
    const RunConfig& config() const { return config_; }
    std::vector<AgentConfig> agent_configs() const;
    const std::vector<std::unique_ptr<Agent>>& agents() const { return agents_; }
    std::shared_ptr<LiveInput> live_input() const { return live_; }

private:
    void validate(const Command& command) const;
    void apply_command(const TimedCommand& command, std::uint64_t tick);
    std::vector<Firing> evaluate(const WorldState& snapshot, const std::vector<std::size_t>& due) const;

    std::shared_ptr<Blackboard> board_;
    std::vector<std::unique_ptr<Agent>> agents_;
    std::vector<AgentConfig> configs_;
    RunConfig config_;
    std::shared_ptr<LiveInput> live_;

    mutable std::mutex queue_mutex_;
    std::deque<TimedCommand> live_queue_;
    std::map<std::uint64_t, std::vector<TimedCommand>> scheduled_;

    std::vector<TickRecord> trace_;
};

struct Divergence {
    std::uint64_t tick = 0;
    std::string reason;
};

struct ReplayVerdict {
    bool identical = true;
    std::optional<Divergence> first_divergence;
    std::uint64_t compared_ticks = 0;
};

/// Re-executes `fresh` (built from the same scenario) with the live commands of
/// `recorded` re-injected, and compares every per-tick digest. With
/// `recorded_span_only` (an unfinished live session) exactly the recorded ticks
/// are re-executed; otherwise the run goes to completion, so a trace cut short
/// diverges where it ends.
ReplayVerdict replay(const std::vector<TickRecord>& recorded, std::optional<Outcome> recorded_outcome,
                     Scheduler& fresh, bool recorded_span_only = false);

} // namespace vismas
