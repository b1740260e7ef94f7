#pragma once

#include "vismas/scheduler.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

namespace vismas::protocol {

inline constexpr int version = 1;

// Client to server. Control messages map directly onto scheduler commands.
struct EndSession {};
using ClientMessage = std::variant<Command, EndSession>;

/// Throws ProtocolError for malformed JSON, a wrong `v`, an unknown type or
/// bad fields.
ClientMessage parse_client_message(const std::string& text);
std::string encode_client_message(const ClientMessage& message);

/// Everything a console needs to draw one frame.
struct StateView {
    std::string scenario;
    std::shared_ptr<const WorldState> state;
    std::vector<AgentConfig> agents;
    std::map<std::string, Contribution> last_contribution;
    NormalizationConstants delta;
    Assessment assessment;
    bool stalled = false;
    bool authority = false; ///< addressed client holds steering authority
};

nlohmann::json state_json(const StateView& view);
std::string encode_state(const StateView& view);
std::string encode_trace_event(const TickRecord& record);
std::string encode_ended(const std::string& reason, std::optional<Outcome> outcome, std::uint64_t ticks);

nlohmann::json contribution_json(const Contribution& c);

} // namespace vismas::protocol
