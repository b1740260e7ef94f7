#include "vismas/scheduler.hpp"

#include "vismas/errors.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <future>
#include <thread>

namespace vismas {

namespace {

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ull;
constexpr std::uint64_t fnv_prime = 0x100000001b3ull;

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = fnv_offset)
{
    for (unsigned char c : text) {
        h ^= c;
        h *= fnv_prime;
    }
    return h;
}

void append_fixed(std::string& out, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%+.16e;", v);
    out += buf;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string_view to_string(Outcome o)
{
    switch (o) {
    case Outcome::converged:
        return "converged";
    case Outcome::stalled:
        return "stalled";
    case Outcome::max_ticks:
        return "max_ticks";
    }
    return "unknown";
}

std::optional<Outcome> outcome_from_string(std::string_view s)
{
    for (Outcome o : {Outcome::converged, Outcome::stalled, Outcome::max_ticks}) {
        if (to_string(o) == s) {
            return o;
        }
    }
    return std::nullopt;
}

std::string canonical_state_text(const WorldState& state)
{
    std::string out = "t=" + std::to_string(state.tick) + ";";
    const BodyState& b = state.body;
    for (double v : {b.trunk.x, b.trunk.y, b.trunk.theta, b.head.alpha, b.head.beta, b.head.theta,
                     b.cone_half_angle}) {
        append_fixed(out, v);
    }
    if (state.intermediate_target) {
        out += "it=";
        for (double v : {state.intermediate_target->x, state.intermediate_target->y,
                         state.intermediate_target->z}) {
            append_fixed(out, v);
        }
    } else {
        out += "it=none;";
    }
    return out;
}

std::uint64_t state_digest(const WorldState& state)
{
    return fnv1a(canonical_state_text(state));
}

Assessment assess(const WorldState& state, const ConvergenceCriteria& criteria)
{
    Assessment a;
    const BodyState& body = state.body;
    const Vec3 target = state.scene.target;
    a.distance = norm(target.plan() - Vec2{body.trunk.x, body.trunk.y});
    const Vec3 eye = eye_point(body);
    a.occluded = eye == target ? 0.0 : segment_occluded(eye, target, state.scene);
    try {
        a.misalignment = misalignment(body, target);
    } catch (const DegenerateDirectionError&) {
        a.misalignment = 0.0;
    }
    a.collision = total_collision_length(world_footprint(body), state.scene, body.z_range);
    a.converged = a.distance <= criteria.d_tol && a.occluded <= criteria.visibility_tol &&
                  a.misalignment <= criteria.align_tol && a.collision == 0.0;
    return a;
}

std::uint64_t StallDetector::fingerprint(const WorldState& state)
{
    std::string text;
    const BodyState& b = state.body;
    std::vector<double> values{b.trunk.x, b.trunk.y, b.trunk.theta, b.head.alpha,
                               b.head.beta, b.head.theta, b.cone_half_angle};
    if (state.intermediate_target) {
        values.insert(values.end(), {state.intermediate_target->x, state.intermediate_target->y,
                                     state.intermediate_target->z});
    }
    for (double v : values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld;", static_cast<long long>(std::llround(v * 1e9)));
        text += buf;
    }
    return fnv1a(text);
}

bool StallDetector::observe(const WorldState& state, bool commands_applied)
{
    if (commands_applied) {
        reset();
    }
    const bool fresh = seen_.insert(fingerprint(state)).second;
    repeats_ = fresh ? 0 : repeats_ + 1;

    const Vec2 here{state.body.trunk.x, state.body.trunk.y};
    if (radius_ > 0.0) {
        if (!anchor_ || norm(here - *anchor_) > radius_) {
            anchor_ = here;
            confined_ = 0;
        } else {
            ++confined_;
        }
    }
    return repeats_ >= window_ || (radius_ > 0.0 && confined_ >= window_);
}

void StallDetector::reset()
{
    repeats_ = 0;
    confined_ = 0;
    anchor_.reset();
    seen_.clear();
}

Scheduler::Scheduler(std::shared_ptr<Blackboard> board, std::vector<std::unique_ptr<Agent>> agents,
                     std::vector<AgentConfig> configs, RunConfig config,
                     std::shared_ptr<LiveInput> live_input)
    : board_(std::move(board)), agents_(std::move(agents)), configs_(std::move(configs)),
      config_(config), live_(std::move(live_input))
{
    if (agents_.size() != configs_.size()) {
        throw InputError("scheduler: one config per agent is required");
    }
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (agents_[i]->id() != configs_[i].agent_id) {
            throw InputError("scheduler: config order must follow agent registration order");
        }
        if (configs_[i].rate < 1) {
            throw InputError("agent '" + configs_[i].agent_id + "': rate must be >= 1");
        }
        if (!board_->knows_agent(agents_[i]->id())) {
            throw ProtocolError("agent '" + agents_[i]->id() + "' is not registered on the blackboard");
        }
    }
    if (!(config_.normalization.delta_pos > 0.0) || !(config_.normalization.delta_or > 0.0)) {
        throw InputError("normalization constants must be positive");
    }
}

std::vector<AgentConfig> Scheduler::agent_configs() const
{
    std::lock_guard lock(queue_mutex_);
    return configs_;
}

void Scheduler::validate(const Command& command) const
{
    const auto require_agent = [this](const std::string& id) {
        const bool known = std::any_of(configs_.begin(), configs_.end(),
                                       [&id](const AgentConfig& c) { return c.agent_id == id; });
        if (!known) {
            throw ProtocolError("unknown agent '" + id + "'");
        }
    };
    std::visit(overloaded{
                   [&](const SetRate& c) {
                       require_agent(c.agent_id);
                       if (c.rate < 1) {
                           throw InputError("rate must be >= 1");
                       }
                   },
                   [&](const SetActive& c) { require_agent(c.agent_id); },
                   [&](const SetNormalization& c) {
                       if ((c.delta_pos && !(*c.delta_pos > 0.0 && std::isfinite(*c.delta_pos))) ||
                           (c.delta_or && !(*c.delta_or > 0.0 && std::isfinite(*c.delta_or)))) {
                           throw InputError("normalization constants must be positive and finite");
                       }
                   },
                   [&](const SetIntermediateTarget&) {},
                   [&](const Steer&) {},
               },
               command);
}

void Scheduler::post(Command command, CommandOrigin origin)
{
    validate(command);
    std::lock_guard lock(queue_mutex_);
    live_queue_.push_back({std::move(command), origin});
}

void Scheduler::schedule(std::uint64_t at, Command command, CommandOrigin origin)
{
    validate(command);
    std::lock_guard lock(queue_mutex_);
    scheduled_[at].push_back({std::move(command), origin});
}

void Scheduler::apply_command(const TimedCommand& command, std::uint64_t tick)
{
    std::visit(overloaded{
                   [&](const SetRate& c) {
                       for (AgentConfig& cfg : configs_) {
                           if (cfg.agent_id == c.agent_id) {
                               cfg.rate = c.rate;
                           }
                       }
                   },
                   [&](const SetActive& c) {
                       for (AgentConfig& cfg : configs_) {
                           if (cfg.agent_id == c.agent_id) {
                               cfg.active = c.active;
                           }
                       }
                   },
                   [&](const SetNormalization& c) {
                       if (c.delta_pos) {
                           config_.normalization.delta_pos = *c.delta_pos;
                       }
                       if (c.delta_or) {
                           config_.normalization.delta_or = *c.delta_or;
                       }
                   },
                   [&](const SetIntermediateTarget& c) { board_->set_intermediate_target(c.point); },
                   [&](const Steer& c) {
                       if (live_) {
                           live_->submit(c.sample, tick);
                       }
                   },
               },
               command.command);
}

std::vector<Firing> Scheduler::evaluate(const WorldState& snapshot,
                                        const std::vector<std::size_t>& due) const
{
    std::vector<Firing> firings(due.size());
    const NormalizationConstants k = config_.normalization;
    const auto fire = [&](std::size_t slot) {
        const Agent& agent = *agents_[due[slot]];
        Firing& f = firings[slot];
        f.agent_id = agent.id();
        try {
            f.raw = agent.act(snapshot);
            f.normalized = normalize(f.raw, k);
        } catch (const std::exception& e) {
            f.failure = e.what();
            f.raw = Contribution{};
            f.raw.agent_id = agent.id();
            f.raw.tick = snapshot.tick;
            f.normalized = f.raw;
        }
    };

    const unsigned workers = std::min<unsigned>(std::max(1u, config_.threads),
                                                static_cast<unsigned>(due.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < due.size(); ++i) {
            fire(i);
        }
        return firings;
    }
    std::vector<std::future<void>> pending;
    pending.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pending.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < due.size(); i += workers) {
                fire(i);
            }
        }));
    }
    for (auto& p : pending) {
        p.get();
    }
    return firings;
}

const TickRecord& Scheduler::tick()
{
    const std::uint64_t t = board_->snapshot()->tick;
    TickRecord record;
    record.tick = t;

    std::vector<TimedCommand> commands;
    {
        std::lock_guard lock(queue_mutex_);
        if (auto it = scheduled_.find(t); it != scheduled_.end()) {
            commands = std::move(it->second);
            scheduled_.erase(it);
        }
        while (!live_queue_.empty()) {
            commands.push_back(std::move(live_queue_.front()));
            live_queue_.pop_front();
        }
        for (const TimedCommand& c : commands) {
            apply_command(c, t);
        }
    }
    record.commands = std::move(commands);

    const std::shared_ptr<const WorldState> snapshot = board_->snapshot();
    std::vector<std::size_t> due;
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        if (configs_[i].fires_at(t)) {
            due.push_back(i);
        }
    }
    record.firings = evaluate(*snapshot, due);

    std::vector<Contribution> normalized;
    normalized.reserve(record.firings.size());
    for (const Firing& f : record.firings) {
        normalized.push_back(f.normalized);
    }
    const std::shared_ptr<const WorldState> next = board_->apply(normalized);

    record.trunk = next->body.trunk;
    record.head = next->body.head;
    record.cone_half_angle = next->body.cone_half_angle;
    record.intermediate_target = next->intermediate_target;
    record.assessment = assess(*next, config_.convergence);
    record.digest = state_digest(*next);
    trace_.push_back(std::move(record));
    return trace_.back();
}

RunResult Scheduler::run()
{
    RunResult result;
    StallDetector stall(config_.convergence.stall_ticks, config_.convergence.stall_radius);
    const std::shared_ptr<const WorldState> initial = board_->snapshot();
    result.final_assessment = assess(*initial, config_.convergence);
    if (result.final_assessment.converged) {
        result.outcome = Outcome::converged;
        return result;
    }
    stall.observe(*initial, false);
    while (true) {
        if (result.ticks >= config_.max_ticks) {
            result.outcome = Outcome::max_ticks;
            return result;
        }
        const TickRecord& record = tick();
        ++result.ticks;
        result.final_assessment = record.assessment;
        if (record.assessment.converged) {
            result.outcome = Outcome::converged;
            return result;
        }
        if (stall.observe(*board_->snapshot(), !record.commands.empty())) {
            result.outcome = Outcome::stalled;
            return result;
        }
    }
}

ReplayVerdict replay(const std::vector<TickRecord>& recorded, std::optional<Outcome> recorded_outcome,
                     Scheduler& fresh, bool recorded_span_only)
{
    for (const TickRecord& r : recorded) {
        for (const TimedCommand& c : r.commands) {
            if (c.origin == CommandOrigin::live) {
                fresh.schedule(r.tick, c.command, CommandOrigin::live);
            }
        }
    }
    RunResult result;
    if (!recorded_span_only) {
        result = fresh.run();
    } else {
        for (std::size_t i = 0; i < recorded.size(); ++i) {
            fresh.tick();
        }
    }
    const std::vector<TickRecord>& replayed = fresh.trace();

    ReplayVerdict verdict;
    const std::size_t common = std::min(recorded.size(), replayed.size());
    for (std::size_t i = 0; i < common; ++i) {
        ++verdict.compared_ticks;
        if (recorded[i].tick != replayed[i].tick || recorded[i].digest != replayed[i].digest) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "digest %016" PRIx64 " recorded, %016" PRIx64 " replayed",
                          recorded[i].digest, replayed[i].digest);
            verdict.identical = false;
            verdict.first_divergence = Divergence{replayed[i].tick, buf};
            return verdict;
        }
    }
    if (recorded.size() != replayed.size()) {
        verdict.identical = false;
        const std::uint64_t at = common == 0 ? 0 : recorded[common - 1].tick + 1;
        verdict.first_divergence =
            Divergence{at, recorded.size() < replayed.size()
                               ? "trace ends after " + std::to_string(recorded.size()) +
                                     " ticks, replay ran " + std::to_string(replayed.size())
                               : "replay ended after " + std::to_string(replayed.size()) +
                                     " ticks, trace has " + std::to_string(recorded.size())};
        return verdict;
    }
    if (recorded_outcome && *recorded_outcome != result.outcome) {
        verdict.identical = false;
        verdict.first_divergence =
            Divergence{common == 0 ? 0 : recorded[common - 1].tick,
                       "outcome " + std::string(to_string(*recorded_outcome)) + " recorded, " +
                           std::string(to_string(result.outcome)) + " replayed"};
    }
    return verdict;
}

} // namespace vismas
