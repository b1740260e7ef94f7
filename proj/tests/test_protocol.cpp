#include "fixtures.hpp"

#include "vismas/errors.hpp"
#include "vismas/protocol.hpp"

#include <doctest.h>

using namespace vismas;
using nlohmann::json;

namespace {

Command command(const std::string& text)
{
    const protocol::ClientMessage m = protocol::parse_client_message(text);
    REQUIRE(std::holds_alternative<Command>(m));
    return std::get<Command>(m);
}

} // namespace

TEST_CASE("client messages parse")
{
    const Steer steer = std::get<Steer>(command(R"({"v":1,"type":"steer","vx":0.5,"vy":-1,"omega":0})"));
    CHECK(steer.sample == OperatorSample{0.5, -1, 0});

    const SetActive pause = std::get<SetActive>(command(R"({"v":1,"type":"pause","agent":"repulsion"})"));
    CHECK(pause.agent_id == "repulsion");
    CHECK_FALSE(pause.active);
    CHECK(std::get<SetActive>(command(R"({"v":1,"type":"work","agent":"repulsion"})")).active);

    const SetRate rate = std::get<SetRate>(command(R"({"v":1,"type":"rate","agent":"attraction","value":3})"));
    CHECK(rate.agent_id == "attraction");
    CHECK(rate.rate == 3);

    const SetNormalization d1 = std::get<SetNormalization>(command(R"({"v":1,"type":"delta","param":"pos","value":0.02})"));
    CHECK(d1.delta_pos == 0.02);
    CHECK_FALSE(d1.delta_or);
    const SetNormalization d2 = std::get<SetNormalization>(command(R"({"v":1,"type":"delta","or":0.1})"));
    CHECK(d2.delta_or == 0.1);

    const auto it = std::get<SetIntermediateTarget>(command(R"({"v":1,"type":"intermediate-target","target":{"x":1,"y":2,"z":3}})"));
    CHECK(it.point == Vec3{1, 2, 3});
    CHECK_FALSE(std::get<SetIntermediateTarget>(command(R"({"v":1,"type":"intermediate-target","target":null})")).point);

    CHECK(std::holds_alternative<protocol::EndSession>(protocol::parse_client_message(R"({"v":1,"type":"end"})")));
}

TEST_CASE("malformed client messages are rejected")
{
    for (const char* text : {
             "not json",
             "[1,2]",
             R"({"type":"steer","vx":0,"vy":0,"omega":0})",
             R"({"v":2,"type":"steer","vx":0,"vy":0,"omega":0})",
             R"({"v":1})",
             R"({"v":1,"type":"fly"})",
             R"({"v":1,"type":"steer","vx":"fast","vy":0,"omega":0})",
             R"({"v":1,"type":"steer","vx":0})",
             R"({"v":1,"type":"rate","agent":"a","value":1.5})",
             R"({"v":1,"type":"pause","agent":""})",
             R"({"v":1,"type":"delta","param":"speed","value":1})",
             R"({"v":1,"type":"delta"})",
             R"({"v":1,"type":"intermediate-target","target":{"x":1}})",
         }) {
        CAPTURE(text);
        CHECK_THROWS_AS(protocol::parse_client_message(text), ProtocolError);
    }
}

TEST_CASE("client messages round-trip through the encoder")
{
    const std::vector<protocol::ClientMessage> all{
        Command{Steer{{0.25, -0.5, 1}}},
        Command{SetActive{"head", false}},
        Command{SetActive{"head", true}},
        Command{SetRate{"attraction", 9}},
        Command{SetNormalization{0.03, std::nullopt}},
        Command{SetNormalization{0.03, 0.07}},
        Command{SetIntermediateTarget{Vec3{1, -2, 0.5}}},
        Command{SetIntermediateTarget{}},
        protocol::EndSession{},
    };
    for (const auto& m : all) {
        const std::string text = protocol::encode_client_message(m);
        CAPTURE(text);
        CHECK(json::parse(text).at("v") == 1);
        CHECK(protocol::encode_client_message(protocol::parse_client_message(text)) == text);
    }
}

TEST_CASE("state message")
{
    const Prism wall{"wall", oracle::rect(1, -1, 1.2, 1), {0, 2}};
    WorldState w = fixture::state(fixture::body({0.5, 0.25, 0.1}), fixture::open_scene({3, 0, 1.5}, {wall}));
    w.tick = 42;
    w.intermediate_target = Vec3{1, 2, 1};
    protocol::StateView view;
    view.scenario = "demo";
    view.state = std::make_shared<const WorldState>(w);
    view.agents = {{"attraction", 3, true}, {"head", 1, false}};
    Contribution c;
    c.agent_id = "attraction";
    c.tick = 41;
    c.d_xy = {0.05, 0};
    view.last_contribution["attraction"] = c;
    view.assessment.occluded = 0.2;
    view.authority = true;

    const json j = json::parse(protocol::encode_state(view));
    CHECK(j["type"] == "state");
    CHECK(j["v"] == 1);
    CHECK(j["tick"] == 42);
    CHECK(j["scenario"] == "demo");
    CHECK(j["scene"]["obstacles"][0]["name"] == "wall");
    CHECK(j["scene"]["obstacles"][0]["footprint"].size() == 4);
    CHECK(j["body"]["trunk"]["x"] == 0.5);
    CHECK(j["body"]["embodiment"] == "manikin");
    CHECK(j["body"]["footprint"].size() == 4);
    CHECK(j["body"]["axis"]["x"].get<double>() == doctest::Approx(std::cos(0.1)));
    CHECK(j["cone"]["half_angle"].get<double>() == doctest::Approx(deg_to_rad(2.0)));
    CHECK(j["intermediate_target"]["y"] == 2.0);
    CHECK(j["agents"][0]["rate"] == 3);
    CHECK(j["agents"][0]["last"]["d_xy"]["x"] == 0.05);
    CHECK(j["agents"][1]["active"] == false);
    CHECK(j["agents"][1]["last"].is_null());
    CHECK(j["delta"]["pos"] == 0.05);
    CHECK(j["flags"]["visible"] == false);
    CHECK(j["flags"]["stalled"] == false);
    CHECK(j["authority"] == true);
}

TEST_CASE("trace-event and ended messages")
{
    TickRecord r;
    r.tick = 7;
    r.digest = 99;
    const json t = json::parse(protocol::encode_trace_event(r));
    CHECK(t["type"] == "trace-event");
    CHECK(t["record"]["tick"] == 7);

    const json e = json::parse(protocol::encode_ended("converged", Outcome::converged, 12));
    CHECK(e["type"] == "ended");
    CHECK(e["reason"] == "converged");
    CHECK(e["outcome"] == "converged");
    CHECK(e["ticks"] == 12);
    CHECK(json::parse(protocol::encode_ended("client", std::nullopt, 3))["outcome"].is_null());
}
