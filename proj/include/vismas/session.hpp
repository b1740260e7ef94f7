#pragma once

#include "vismas/scenario.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace vismas {

struct ServeOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8765;  ///< 0 picks a free port
    double ticks_per_second = 30.0; ///< 0 runs unpaced
    bool handle_signals = false; ///< end the session on SIGINT/SIGTERM
    std::ostream* trace_out = nullptr;
};

struct SessionSummary {
    std::string reason; ///< converged, max_ticks, client, signal or stopped
    std::optional<Outcome> outcome;
    std::uint64_t ticks = 0;
};

/// Websocket endpoint around a live simulation. The scheduler runs paced on
/// the thread calling run(); the socket side runs on its own thread, forwards
/// commands of the authoritative client into the tick-boundary queue and fans
/// state out to every client.
class SessionServer {
public:
    /// Binds immediately; throws std::runtime_error when the port is unavailable.
    SessionServer(Simulation& simulation, std::string scenario_name, ServeOptions options);
    ~SessionServer();

    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    unsigned short port() const;

    /// Blocks until the session ends.
    SessionSummary run();

    /// Thread-safe request to end the session.
    void stop(const std::string& reason = "stopped");

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

} // namespace vismas
