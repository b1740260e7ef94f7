#include "vismas/trace.hpp"

#include "vismas/errors.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace vismas {

using nlohmann::json;

namespace {

json vec3_json(const std::optional<Vec3>& p)
{
    if (!p) {
        return nullptr;
    }
    return json::array({p->x, p->y, p->z});
}

std::optional<Vec3> vec3_from(const json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return Vec3{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json contribution_json(const Contribution& c)
{
    return json::array({c.d_xy.x, c.d_xy.y, c.d_theta, c.d_head.alpha, c.d_head.theta, c.d_cone});
}

Contribution contribution_from(const json& j, const std::string& agent, std::uint64_t tick)
{
    Contribution c;
    c.agent_id = agent;
    c.tick = tick;
    c.d_xy = {j.at(0).get<double>(), j.at(1).get<double>()};
    c.d_theta = j.at(2).get<double>();
    c.d_head = {j.at(3).get<double>(), j.at(4).get<double>()};
    c.d_cone = j.at(5).get<double>();
    return c;
}

json agents_json(const std::vector<AgentConfig>& agents)
{
    json out = json::array();
    for (const AgentConfig& a : agents) {
        out.push_back({{"id", a.agent_id}, {"rate", a.rate}, {"active", a.active}});
    }
    return out;
}

json header_json(const std::string& scenario, const std::vector<AgentConfig>& agents, bool live_operator)
{
    return {{"type", "header"},
            {"v", Trace::format_version},
            {"scenario", scenario},
            {"operator", live_operator ? "live" : "scripted"},
            {"agents", agents_json(agents)}};
}

json end_json(const RunResult& r)
{
    return {{"type", "end"}, {"outcome", std::string(to_string(r.outcome))}, {"ticks", r.ticks}};
}

std::uint64_t parse_digest(const std::string& hex)
{
    std::uint64_t v = 0;
    if (hex.size() != 16 || std::sscanf(hex.c_str(), "%" SCNx64, &v) != 1) {
        throw ProtocolError("malformed digest '" + hex + "'");
    }
    return v;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string digest_hex(std::uint64_t digest)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, digest);
    return buf;
}

json command_to_json(const TimedCommand& command)
{
    json j = std::visit(
        overloaded{
            [](const SetRate& c) -> json { return {{"type", "rate"}, {"agent", c.agent_id}, {"value", c.rate}}; },
            [](const SetActive& c) -> json {
                return {{"type", c.active ? "work" : "pause"}, {"agent", c.agent_id}};
            },
            [](const SetNormalization& c) -> json {
                json d = {{"type", "delta"}};
                if (c.delta_pos) {
                    d["pos"] = *c.delta_pos;
                }
                if (c.delta_or) {
                    d["or"] = *c.delta_or;
                }
                return d;
            },
            [](const SetIntermediateTarget& c) -> json {
                return {{"type", "intermediate-target"}, {"point", vec3_json(c.point)}};
            },
            [](const Steer& c) -> json {
                return {{"type", "steer"}, {"vx", c.sample.vx}, {"vy", c.sample.vy}, {"omega", c.sample.omega}};
            },
        },
        command.command);
    j["origin"] = command.origin == CommandOrigin::live ? "live" : "scheduled";
    return j;
}

TimedCommand command_from_json(const json& j)
{
    try {
        TimedCommand out;
        out.origin = j.value("origin", "live") == "scheduled" ? CommandOrigin::scheduled : CommandOrigin::live;
        const std::string type = j.at("type").get<std::string>();
        if (type == "rate") {
            out.command = SetRate{j.at("agent").get<std::string>(), j.at("value").get<int>()};
        } else if (type == "pause" || type == "work") {
            out.command = SetActive{j.at("agent").get<std::string>(), type == "work"};
        } else if (type == "delta") {
            SetNormalization c;
            if (j.contains("pos")) {
                c.delta_pos = j.at("pos").get<double>();
            }
            if (j.contains("or")) {
                c.delta_or = j.at("or").get<double>();
            }
            out.command = c;
        } else if (type == "intermediate-target") {
            out.command = SetIntermediateTarget{vec3_from(j.at("point"))};
        } else if (type == "steer") {
            out.command = Steer{{j.at("vx").get<double>(), j.at("vy").get<double>(), j.at("omega").get<double>()}};
        } else {
            throw ProtocolError("unknown command type '" + type + "'");
        }
        return out;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed command: ") + e.what());
    }
}

json record_to_json(const TickRecord& r)
{
    json commands = json::array();
    for (const TimedCommand& c : r.commands) {
        commands.push_back(command_to_json(c));
    }
    json firings = json::array();
    for (const Firing& f : r.firings) {
        json jf = {{"agent", f.agent_id}, {"raw", contribution_json(f.raw)},
                   {"norm", contribution_json(f.normalized)}};
        if (!f.failure.empty()) {
            jf["failure"] = f.failure;
        }
        firings.push_back(std::move(jf));
    }
    return {
        {"type", "tick"},
        {"tick", r.tick},
        {"commands", std::move(commands)},
        {"firings", std::move(firings)},
        {"state",
         {{"x", r.trunk.x}, {"y", r.trunk.y}, {"theta", r.trunk.theta}, {"alpha", r.head.alpha},
          {"beta", r.head.beta}, {"theta_b", r.head.theta}, {"cone", r.cone_half_angle},
          {"intermediate_target", vec3_json(r.intermediate_target)}}},
        {"assess",
         {{"distance", r.assessment.distance}, {"occluded", r.assessment.occluded},
          {"misalignment", r.assessment.misalignment}, {"collision", r.assessment.collision},
          {"converged", r.assessment.converged}}},
        {"digest", digest_hex(r.digest)},
    };
}

TickRecord record_from_json(const json& j)
{
    TickRecord r;
    r.tick = j.at("tick").get<std::uint64_t>();
    for (const json& c : j.at("commands")) {
        r.commands.push_back(command_from_json(c));
    }
    for (const json& jf : j.at("firings")) {
        Firing f;
        f.agent_id = jf.at("agent").get<std::string>();
        f.raw = contribution_from(jf.at("raw"), f.agent_id, r.tick);
        f.normalized = contribution_from(jf.at("norm"), f.agent_id, r.tick);
        f.failure = jf.value("failure", "");
        r.firings.push_back(std::move(f));
    }
    const json& s = j.at("state");
    r.trunk = {s.at("x").get<double>(), s.at("y").get<double>(), s.at("theta").get<double>()};
    r.head = {s.at("alpha").get<double>(), s.at("beta").get<double>(), s.at("theta_b").get<double>()};
    r.cone_half_angle = s.at("cone").get<double>();
    r.intermediate_target = vec3_from(s.at("intermediate_target"));
    const json& a = j.at("assess");
    r.assessment = {a.at("distance").get<double>(), a.at("occluded").get<double>(),
                    a.at("misalignment").get<double>(), a.at("collision").get<double>(),
                    a.at("converged").get<bool>()};
    r.digest = parse_digest(j.at("digest").get<std::string>());
    return r;
}

TraceWriter::TraceWriter(std::ostream& out, const std::string& scenario,
                         const std::vector<AgentConfig>& agents, bool live_operator)
    : out_(out)
{
    out_ << header_json(scenario, agents, live_operator).dump() << '\n';
}

void TraceWriter::write(const TickRecord& record)
{
    out_ << record_to_json(record).dump() << '\n';
}

void TraceWriter::finish(const RunResult& result)
{
    out_ << end_json(result).dump() << '\n';
    out_.flush();
}

void write_trace(std::ostream& out, const Trace& trace)
{
    TraceWriter writer(out, trace.scenario, trace.agents, trace.live_operator);
    for (const TickRecord& r : trace.records) {
        writer.write(r);
    }
    if (trace.result) {
        writer.finish(*trace.result);
    }
}

Trace read_trace(std::istream& in)
{
    Trace trace;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (j.at("v").get<int>() != Trace::format_version) {
                    throw InputError("unsupported trace version");
                }
                trace.scenario = j.at("scenario").get<std::string>();
                trace.live_operator = j.value("operator", std::string("scripted")) == "live";
                for (const json& a : j.at("agents")) {
                    trace.agents.push_back(
                        {a.at("id").get<std::string>(), a.at("rate").get<int>(), a.at("active").get<bool>()});
                }
                have_header = true;
            } else if (type == "tick") {
                trace.records.push_back(record_from_json(j));
            } else if (type == "end") {
                const auto outcome = outcome_from_string(j.at("outcome").get<std::string>());
                if (!outcome) {
                    throw InputError("unknown outcome");
                }
                RunResult r;
                r.outcome = *outcome;
                r.ticks = j.at("ticks").get<std::uint64_t>();
                if (!trace.records.empty()) {
                    r.final_assessment = trace.records.back().assessment;
                }
                trace.result = r;
            } else {
                throw InputError("unknown record type '" + type + "'");
            }
        } catch (const std::exception& e) {
            if (in.eof() && have_header) {
                // last line cut off mid-write: keep what was complete
                trace.truncated = true;
                break;
            }
            throw InputError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) {
        throw InputError("trace has no header line");
    }
    return trace;
}

Trace load_trace(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open trace " + path.string());
    }
    return read_trace(in);
}

} // namespace vismas
