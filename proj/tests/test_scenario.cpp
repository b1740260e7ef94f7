#include "fixtures.hpp"

#include "vismas/cli.hpp"
#include "vismas/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace vismas;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(name: minimal
scene:
  target: [1, 0, 1.6]
agents:
  - {kind: attraction}
)";

std::vector<std::string> diagnostics_of(const std::string& text)
{
    try {
        parse_scenario(text, "s.yaml");
    } catch (const ScenarioError& e) {
        return e.diagnostics();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle)
{
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("vismas-test-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "vismas");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string bundled(const std::string& name)
{
    return (bundled_scenario_dir() / (name + ".yaml")).string();
}

} // namespace

TEST_CASE("minimal scenario loads with defaults")
{
    const ScenarioFile s = parse_scenario(minimal);
    CHECK(s.name == "minimal");
    CHECK(s.scene.obstacles.empty());
    REQUIRE(s.agents.size() == 1);
    CHECK(s.agents[0].id == "attraction");
    CHECK(s.agents[0].rate == 1);
    CHECK(s.run.delta_pos == 0.05);
    CHECK(deg_to_rad(s.run.delta_or_deg) == doctest::Approx(0.05));
    CHECK(s.run.stall_ticks == 200);
    CHECK(s.body.cone_min_deg == 2.0);
    CHECK(s.body.cone_max_deg == 25.0);
    CHECK(s.body.cone_step_deg == 0.5);

    const RunConfig cfg = build_run_config(s.run);
    CHECK(cfg.gradient.delta_xy == 1e-3);
    CHECK(cfg.gradient.delta_theta == doctest::Approx(1e-3));
    const BodyState b = build_body(s.body);
    CHECK(b.limits.theta.max == doctest::Approx(deg_to_rad(60)));
}

TEST_CASE("all validation errors are reported with positions")
{
    const auto d = diagnostics_of(R"(name: bad
scene:
  target: [1, 2]
  obstacles:
    - {name: slab, footprint: [[0,0],[1,1]], z: [2, 1]}
agents:
  - {kind: flying, rate: 0}
body: {colour: red}
)");
    CHECK(d.size() >= 5);
    CHECK(any_contains(d, "s.yaml:3:"));
    CHECK(any_contains(d, "target"));
    CHECK(any_contains(d, "'colour'"));
    CHECK(any_contains(d, "flying"));
    CHECK(any_contains(d, "rate must be >= 1"));
    CHECK(any_contains(d, "obstacle 'slab'"));
    CHECK(any_contains(d, "3 vertices"));
    CHECK(any_contains(d, "z_min"));

    CHECK(any_contains(diagnostics_of("name: [unclosed\n"), "s.yaml:"));
    CHECK(any_contains(diagnostics_of(std::string(minimal) + "  - {kind: head, rate: 0}\n"), "rate must be >= 1"));
    CHECK(any_contains(diagnostics_of("name: far\nscene: {bounds: [0, 0, 1, 1], target: [5, 5, 0]}\nagents: [{kind: head}]\n"),
                       "bounds"));
    CHECK(any_contains(diagnostics_of(std::string(minimal) + "  - {kind: head, id: attraction}\n"), "duplicate"));
    try {
        parse_scenario(std::string(minimal) + "operator_script: nowhere.ops\n", "s.yaml", fs::temp_directory_path());
        FAIL("missing script accepted");
    } catch (const ScenarioError& e) {
        CHECK(any_contains(e.diagnostics(), "nowhere.ops"));
    }
}

TEST_CASE("bundled scenarios load and round-trip")
{
    int count = 0;
    for (const auto& entry : fs::directory_iterator(bundled_scenario_dir())) {
        if (entry.path().extension() != ".yaml") {
            continue;
        }
        ++count;
        CAPTURE(entry.path().string());
        const ScenarioFile s = load_scenario(entry.path());
        ScenarioFile again = parse_scenario(save_scenario(s), "saved", s.base_dir);
        CHECK(again == s);
        CHECK(save_scenario(again) == save_scenario(s));
    }
    CHECK(count == 5);
}

TEST_CASE("random scenarios round-trip bit for bit")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> pos(0.001, 1.0);
    for (int i = 0; i < 50; ++i) {
        ScenarioFile s = parse_scenario(minimal);
        s.name = "random-" + std::to_string(i);
        s.scene.target = {u(rng), u(rng), pos(rng) * 2};
        for (int k = 0; k < 3; ++k) {
            const double x = u(rng), y = u(rng);
            s.scene.obstacles.push_back({"o" + std::to_string(k), {{x, y}, {x + pos(rng), y}, {x, y + pos(rng)}},
                                         pos(rng) - 1.0, pos(rng) + 1.0});
        }
        s.body.embodiment = i % 2 ? Embodiment::robot : Embodiment::manikin;
        s.body.x = u(rng);
        s.body.theta_deg = u(rng) * 50;
        s.body.theta_b_deg = u(rng);
        s.body.eye_height = 1 + pos(rng);
        s.run.delta_pos = pos(rng) / 10;
        s.run.delta_or_deg = pos(rng) * 5;
        s.run.d_tol = pos(rng);
        s.run.stall_radius = pos(rng);
        s.agents.push_back({"v", AgentKind::visibility, 1 + i % 5, i % 3 != 0});
        s.waypoints = {{3, Vec3{u(rng), u(rng), u(rng)}}, {9, std::nullopt}};
        const ScenarioFile back = parse_scenario(save_scenario(s));
        CHECK(back == s);
    }
}

TEST_CASE("waypoints")
{
    const auto w = parse_waypoints("# tick x y z\n0 1 2 3\n10 clear\n10 -1 0.5 2 # again\n");
    REQUIRE(w.size() == 3);
    CHECK(w[0] == WaypointEntry{0, Vec3{1, 2, 3}});
    CHECK_FALSE(w[1].point);
    CHECK(w[2].point == Vec3{-1, 0.5, 2});

    CHECK_THROWS_AS(parse_waypoints("5 1 2 3\n4 clear\n"), InputError);
    CHECK_THROWS_AS(parse_waypoints("5 1 2\n"), InputError);
    CHECK_THROWS_AS(parse_waypoints("x 1 2 3\n"), InputError);
    try {
        parse_waypoints("0 1 2 3\nbad\n", "w.txt");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("w.txt:2") != std::string::npos);
    }
}

TEST_CASE("overrides")
{
    ScenarioFile s = load_scenario(bundled("single-wall"));
    ScenarioOverrides o;
    o.rates["attraction"] = 1;
    o.paused.insert("visibility");
    o.delta_pos = 0.02;
    o.max_ticks = 10;
    o.waypoints = std::vector<WaypointEntry>{{1, Vec3{0, 1, 1}}};
    const ScenarioFile t = apply_overrides(s, o);
    auto find = [&](const std::string& id) {
        return *std::find_if(t.agents.begin(), t.agents.end(), [&](const AgentSpec& a) { return a.id == id; });
    };
    CHECK(find("attraction").rate == 1);
    CHECK_FALSE(find("visibility").active);
    CHECK(t.run.delta_pos == 0.02);
    CHECK(t.run.max_ticks == 10);
    CHECK(t.waypoints.size() == 1);

    ScenarioOverrides bad;
    bad.rates["ghost"] = 2;
    CHECK_THROWS_AS(apply_overrides(s, bad), ScenarioError);
    ScenarioOverrides zero;
    zero.rates["attraction"] = 0;
    CHECK_THROWS_AS(apply_overrides(s, zero), ScenarioError);
}

TEST_CASE("instantiate and metrics")
{
    const ScenarioFile s = load_scenario(bundled("empty-plane"));
    Simulation sim = instantiate(s);
    CHECK(sim.board->snapshot()->body.embodiment == Embodiment::robot);
    CHECK(sim.scheduler->agents().size() == 5);

    Trace empty;
    empty.scenario = s.name;
    const RunMetrics zero = metrics(empty, s);
    CHECK(zero.path_length == 0.0);
    CHECK(zero.ticks == 0);

    const RunResult r = sim.scheduler->run();
    REQUIRE(r.outcome == Outcome::converged);
    Trace t;
    t.scenario = s.name;
    t.records = sim.scheduler->trace();
    t.result = r;
    const RunMetrics m = metrics(t, s);
    CHECK(m.outcome == Outcome::converged);
    CHECK(m.ticks == r.ticks);
    // Straight attraction: 20 fixed steps of 0.05.
    CHECK(std::abs(m.path_length - 20 * 0.05) < 1e-9);
    CHECK(m.straight_line_distance == doctest::Approx(1.0));
    CHECK(m.path_length >= m.straight_line_distance - s.run.d_tol);
    CHECK(m.collision_ticks == 0);

    CHECK(format_metrics_text(m).find("path_length") != std::string::npos);
    const std::string tsv = format_metrics_tsv(m);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 2);

    // Head never driven: deviation stays at the initial one.
    ScenarioFile still = s;
    still.body.theta_b_deg = 10.0;
    ScenarioOverrides o;
    o.paused = {"head", "visibility"};
    o.max_ticks = 30;
    still = apply_overrides(still, o);
    Simulation sim2 = instantiate(still);
    Trace t2;
    t2.result = sim2.scheduler->run();
    t2.records = sim2.scheduler->trace();
    CHECK(metrics(t2, still).max_head_deviation.theta == doctest::Approx(deg_to_rad(10.0)));
}

TEST_CASE("cli usage and validation")
{
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"run"}).code == exit_usage);
    CHECK(cli({"--help"}).code == 0);

    TempDir dir;
    const fs::path bad = dir.write("bad.yaml", "name: bad\nscene: {target: [1, 2]}\nagents: [{kind: head, rate: 0}]\n");
    const CliResult v = cli({"validate", bad.string()});
    CHECK(v.code == exit_data);
    CHECK(v.err.find("bad.yaml:2:") != std::string::npos);
    CHECK(v.err.find("rate") != std::string::npos);
    CHECK(cli({"run", bad.string()}).code == exit_data);
    CHECK(cli({"run", (dir.path / "missing.yaml").string()}).code == exit_data);

    const CliResult ok = cli({"validate", "empty-plane", bundled("single-wall")});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("ok") != std::string::npos);

    CHECK(cli({"run", "empty-plane", "--rate", "ghost=3"}).code == exit_data);
    CHECK(cli({"run", "empty-plane", "--rate", "nonsense"}).code == exit_usage);
}

TEST_CASE("cli run, metrics and replay")
{
    TempDir dir;
    const std::string trace = (dir.path / "run.ndjson").string();
    const CliResult r = cli({"run", "empty-plane", "--trace", trace});
    CHECK(r.code == exit_converged);
    CHECK(r.out.find("outcome: converged") != std::string::npos);
    CHECK(r.out.find("path_length") != std::string::npos);

    const CliResult tsv = cli({"metrics", "empty-plane", trace, "--format", "tsv"});
    CHECK(tsv.code == 0);
    CHECK(tsv.out.find('\t') != std::string::npos);

    const CliResult same = cli({"replay", "empty-plane", trace});
    CHECK(same.code == 0);
    CHECK(same.out.find("identical") != std::string::npos);
    const CliResult diff = cli({"replay", "empty-plane", trace, "--delta-pos", "0.04"});
    CHECK(diff.code == exit_diverged);
    CHECK(diff.out.find("diverged at tick 0") != std::string::npos);

    // Cut off after a few ticks: divergence where the file ends.
    std::ifstream in(trace);
    std::ofstream cut(dir.path / "cut.ndjson");
    std::string line;
    for (int i = 0; i < 6 && std::getline(in, line); ++i) {
        cut << line << '\n';
    }
    cut.close();
    const CliResult trunc = cli({"replay", "empty-plane", (dir.path / "cut.ndjson").string()});
    CHECK(trunc.code == exit_diverged);
    CHECK(trunc.out.find("diverged at tick 5") != std::string::npos);

    CHECK(cli({"run", "empty-plane", "--max-ticks", "3"}).code == exit_max_ticks);
    CHECK(cli({"run", "concave-pocket"}).code == exit_stalled);
    CHECK(cli({"run", "concave-pocket", "--waypoint", "0:-1.5,0.3,1.6", "--waypoint", "110:-1.2,3,1.6",
               "--waypoint", "280:2,3,1.6", "--waypoint", "480:clear"})
              .code == exit_converged);
}
