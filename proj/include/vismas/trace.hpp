#pragma once

#include "vismas/scheduler.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vismas {

/// A run as stored on disk: newline-delimited JSON, one header line, one
/// line per tick, and an end line once the run finished.
struct Trace {
    static constexpr int format_version = 1;

    std::string scenario;
    std::vector<AgentConfig> agents;
    std::vector<TickRecord> records;
    std::optional<RunResult> result; ///< absent for an unfinished or truncated trace
    bool live_operator = false;      ///< operator fed by a live session instead of a script
    bool truncated = false;          ///< the final line was incomplete and dropped
};

nlohmann::json command_to_json(const TimedCommand& command);
/// Throws ProtocolError on malformed input.
TimedCommand command_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const TickRecord& record);
TickRecord record_from_json(const nlohmann::json& j);

/// Streams records as they are produced.
class TraceWriter {
public:
    TraceWriter(std::ostream& out, const std::string& scenario, const std::vector<AgentConfig>& agents,
                bool live_operator = false);
    void write(const TickRecord& record);
    void finish(const RunResult& result);

private:
    std::ostream& out_;
};

void write_trace(std::ostream& out, const Trace& trace);
std::string digest_hex(std::uint64_t digest);

/// Throws InputError (with line number) on malformed lines. A missing end
/// line is accepted and leaves `result` empty.
Trace read_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);

} // namespace vismas
