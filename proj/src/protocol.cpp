#include "vismas/protocol.hpp"

#include "vismas/errors.hpp"
#include "vismas/trace.hpp"

#include <cmath>

namespace vismas::protocol {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number(const json& j, const char* key)
{
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw ProtocolError(std::string("'") + key + "' must be a number");
    }
    return v.get<double>();
}

std::string agent_field(const json& j)
{
    const json& v = j.at("agent");
    if (!v.is_string() || v.get<std::string>().empty()) {
        throw ProtocolError("'agent' must be a non-empty string");
    }
    return v.get<std::string>();
}

json point_json(const Vec3& p)
{
    return {{"x", p.x}, {"y", p.y}, {"z", p.z}};
}

json optional_point(const std::optional<Vec3>& p)
{
    return p ? point_json(*p) : json(nullptr);
}

json xy(const Vec2& p)
{
    return {{"x", p.x}, {"y", p.y}};
}

json polygon_json(const Polygon& poly)
{
    json out = json::array();
    for (const Vec2& v : poly) {
        out.push_back(json::array({v.x, v.y}));
    }
    return out;
}

json stamp(json j, const char* type)
{
    j["type"] = type;
    j["v"] = version;
    return j;
}

} // namespace

ClientMessage parse_client_message(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ProtocolError("message must be a JSON object");
    }
    if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != version) {
        throw ProtocolError("unsupported protocol version, expected v=" + std::to_string(version));
    }
    if (!j.contains("type") || !j["type"].is_string()) {
        throw ProtocolError("message has no type");
    }
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "steer") {
            return Command{Steer{{number(j, "vx"), number(j, "vy"), number(j, "omega")}}};
        }
        if (type == "pause" || type == "work") {
            return Command{SetActive{agent_field(j), type == "work"}};
        }
        if (type == "rate") {
            const json& v = j.at("value");
            if (!v.is_number_integer()) {
                throw ProtocolError("'value' must be an integer");
            }
            return Command{SetRate{agent_field(j), v.get<int>()}};
        }
        if (type == "delta") {
            SetNormalization c;
            if (j.contains("param")) {
                const std::string param = j["param"].get<std::string>();
                const double value = number(j, "value");
                if (param == "pos") {
                    c.delta_pos = value;
                } else if (param == "or") {
                    c.delta_or = value;
                } else {
                    throw ProtocolError("delta param must be 'pos' or 'or'");
                }
            } else {
                if (j.contains("pos")) {
                    c.delta_pos = number(j, "pos");
                }
                if (j.contains("or")) {
                    c.delta_or = number(j, "or");
                }
            }
            if (!c.delta_pos && !c.delta_or) {
                throw ProtocolError("delta needs 'pos' or 'or'");
            }
            return Command{c};
        }
        if (type == "intermediate-target") {
            const json& t = j.at("target");
            if (t.is_null()) {
                return Command{SetIntermediateTarget{}};
            }
            return Command{SetIntermediateTarget{Vec3{number(t, "x"), number(t, "y"), number(t, "z")}}};
        }
        if (type == "end") {
            return EndSession{};
        }
    } catch (const json::exception& e) {
        throw ProtocolError("malformed '" + type + "' message: " + e.what());
    }
    throw ProtocolError("unknown message type '" + type + "'");
}

std::string encode_client_message(const ClientMessage& message)
{
    if (std::holds_alternative<EndSession>(message)) {
        return stamp(json::object(), "end").dump();
    }
    const Command& command = std::get<Command>(message);
    json j = std::visit(
        overloaded{
            [](const SetRate& c) { return stamp({{"agent", c.agent_id}, {"value", c.rate}}, "rate"); },
            [](const SetActive& c) { return stamp({{"agent", c.agent_id}}, c.active ? "work" : "pause"); },
            [](const SetNormalization& c) {
                json d = json::object();
                if (c.delta_pos) {
                    d["pos"] = *c.delta_pos;
                }
                if (c.delta_or) {
                    d["or"] = *c.delta_or;
                }
                return stamp(d, "delta");
            },
            [](const SetIntermediateTarget& c) { return stamp({{"target", optional_point(c.point)}}, "intermediate-target"); },
            [](const Steer& c) {
                return stamp({{"vx", c.sample.vx}, {"vy", c.sample.vy}, {"omega", c.sample.omega}}, "steer");
            },
        },
        command);
    return j.dump();
}

json contribution_json(const Contribution& c)
{
    return {{"tick", c.tick},
            {"d_xy", xy(c.d_xy)},
            {"d_theta", c.d_theta},
            {"d_alpha", c.d_head.alpha},
            {"d_theta_b", c.d_head.theta},
            {"d_cone", c.d_cone}};
}

json state_json(const StateView& view)
{
    const WorldState& s = *view.state;
    const BodyState& b = s.body;
    json obstacles = json::array();
    for (const Prism& p : s.scene.obstacles) {
        obstacles.push_back({{"name", p.name}, {"footprint", polygon_json(p.footprint)}, {"z", {p.z.lo, p.z.hi}}});
    }
    json agents = json::array();
    for (const AgentConfig& a : view.agents) {
        json entry = {{"id", a.agent_id}, {"rate", a.rate}, {"active", a.active}, {"last", nullptr}};
        if (auto it = view.last_contribution.find(a.agent_id); it != view.last_contribution.end()) {
            entry["last"] = contribution_json(it->second);
        }
        agents.push_back(entry);
    }
    const Vec3 eye = eye_point(b);
    const Vec3 axis = vision_axis(b);
    return stamp(
        {{"scenario", view.scenario},
         {"tick", s.tick},
         {"scene",
          {{"target", point_json(s.scene.target)},
           {"bounds", {s.scene.bounds.min.x, s.scene.bounds.min.y, s.scene.bounds.max.x, s.scene.bounds.max.y}},
           {"obstacles", obstacles}}},
         {"body",
          {{"embodiment", std::string(to_string(b.embodiment))},
           {"trunk", {{"x", b.trunk.x}, {"y", b.trunk.y}, {"theta", b.trunk.theta}}},
           {"head", {{"alpha", b.head.alpha}, {"beta", b.head.beta}, {"theta", b.head.theta}}},
           {"footprint", polygon_json(world_footprint(b))},
           {"eye", point_json(eye)},
           {"axis", point_json(axis)},
           {"limits",
            {{"alpha", {b.limits.alpha.min, b.limits.alpha.max}},
             {"beta", {b.limits.beta.min, b.limits.beta.max}},
             {"theta", {b.limits.theta.min, b.limits.theta.max}}}}}},
         {"cone", {{"half_angle", b.cone_half_angle}, {"min", b.cone.min}, {"max", b.cone.max}}},
         {"intermediate_target", optional_point(s.intermediate_target)},
         {"agents", agents},
         {"delta", {{"pos", view.delta.delta_pos}, {"or", view.delta.delta_or}}},
         {"flags",
          {{"distance", view.assessment.distance},
           {"occluded", view.assessment.occluded},
           {"misalignment", view.assessment.misalignment},
           {"collision", view.assessment.collision},
           {"visible", view.assessment.occluded == 0.0},
           {"converged", view.assessment.converged},
           {"stalled", view.stalled}}},
         {"authority", view.authority}},
        "state");
}

std::string encode_state(const StateView& view)
{
    return state_json(view).dump();
}

std::string encode_trace_event(const TickRecord& record)
{
    return stamp({{"record", record_to_json(record)}}, "trace-event").dump();
}

std::string encode_ended(const std::string& reason, std::optional<Outcome> outcome, std::uint64_t ticks)
{
    return stamp({{"reason", reason},
                  {"outcome", outcome ? json(std::string(to_string(*outcome))) : json(nullptr)},
                  {"ticks", ticks}},
                 "ended")
        .dump();
}

} // namespace vismas::protocol
