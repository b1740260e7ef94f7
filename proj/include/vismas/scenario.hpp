#pragma once

#include "vismas/agents.hpp"
#include "vismas/body.hpp"
#include "vismas/errors.hpp"
#include "vismas/scheduler.hpp"
#include "vismas/trace.hpp"

#include <algorithm>
#include <filesystem>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <string>
#include <vector>

namespace vismas {

// File-level description of a scenario. Lengths are meters; angles are kept
// in degrees exactly as written so that load(save(s)) == s holds bit for bit.
// Conversion to radians happens in instantiate().

struct ObstacleSpec {
    std::string name;
    Polygon footprint;
    double z_min = 0.0;
    double z_max = 1.0;

    bool operator==(const ObstacleSpec&) const = default;
};

struct SceneSpec {
    double bounds[4] = {-10.0, -10.0, 10.0, 10.0}; ///< xmin, ymin, xmax, ymax
    Vec3 target;
    std::vector<ObstacleSpec> obstacles;

    bool operator==(const SceneSpec& o) const
    {
        return std::equal(std::begin(bounds), std::end(bounds), std::begin(o.bounds)) &&
               target == o.target && obstacles == o.obstacles;
    }
};

struct RangeDeg {
    double min = 0.0;
    double max = 0.0;

    bool operator==(const RangeDeg&) const = default;
};

struct BodySpec {
    Embodiment embodiment = Embodiment::manikin;
    Polygon footprint{{-0.2, -0.15}, {0.2, -0.15}, {0.2, 0.15}, {-0.2, 0.15}};
    double z_min = 0.0;
    double z_max = 1.8;
    double eye_height = 1.6;
    double eye_forward_offset = 0.1;
    double x = 0.0;
    double y = 0.0;
    double theta_deg = 0.0;
    double alpha_deg = 0.0;
    double beta_deg = 0.0;
    double theta_b_deg = 0.0;
    RangeDeg alpha_limit_deg{-45.0, 45.0};
    RangeDeg beta_limit_deg{-40.0, 40.0};
    RangeDeg theta_limit_deg{-60.0, 60.0};
    double cone_initial_deg = 2.0;
    double cone_min_deg = 2.0;
    double cone_max_deg = 25.0;
    double cone_step_deg = 0.5;

    bool operator==(const BodySpec&) const = default;
};

struct AgentSpec {
    std::string id;
    AgentKind kind = AgentKind::attraction;
    int rate = 1;
    bool active = true;

    bool operator==(const AgentSpec&) const = default;
};

struct RunSpec {
    double delta_pos = 0.05;
    double delta_or_deg = rad_to_deg(0.05);
    double gradient_xy = 1e-3;
    double gradient_theta_deg = rad_to_deg(1e-3);
    double d_tol = 0.05;
    double visibility_tol = 1e-6;
    double align_tol_deg = rad_to_deg(0.01);
    std::uint64_t stall_ticks = 200;
    double stall_radius = 0.1;
    std::uint64_t max_ticks = 5000;
    int cone_rays = default_cone_rays;

    bool operator==(const RunSpec&) const = default;
};

/// Scheduled intermediate target change (nullopt clears it).
struct WaypointEntry {
    std::uint64_t tick = 0;
    std::optional<Vec3> point;

    bool operator==(const WaypointEntry&) const = default;
};

struct ScenarioFile {
    std::string name;
    SceneSpec scene;
    BodySpec body;
    std::vector<AgentSpec> agents;
    RunSpec run;
    std::optional<std::string> operator_script; ///< path relative to base_dir
    std::vector<WaypointEntry> waypoints;
    std::filesystem::path base_dir;             ///< not serialized

    bool operator==(const ScenarioFile&) const = default;
};

/// Load failure carrying every problem found, each prefixed with its location.
class ScenarioError : public InputError {
public:
    explicit ScenarioError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

ScenarioFile parse_scenario(const std::string& text, const std::string& origin = "<scenario>",
                            const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical writer; parse_scenario(save_scenario(s)) == s for valid s.
std::string save_scenario(const ScenarioFile& scenario);

/// Semantic checks shared by the loader and instantiate().
std::vector<std::string> validate_scenario(const ScenarioFile& scenario);

/// `tick x y z` or `tick clear` per line, `#` comments.
std::vector<WaypointEntry> parse_waypoints(std::string_view text, const std::string& origin = "<waypoints>");
std::vector<WaypointEntry> load_waypoints(const std::filesystem::path& path);

Scene build_scene(const SceneSpec& spec);
BodyState build_body(const BodySpec& spec);
RunConfig build_run_config(const RunSpec& spec);

/// Command-line adjustments, mirroring the master-agent controls.
struct ScenarioOverrides {
    std::map<std::string, int> rates;
    std::set<std::string> paused;
    std::set<std::string> activated;
    std::optional<double> delta_pos;
    std::optional<double> delta_or_deg;
    std::optional<std::filesystem::path> operator_script;
    std::optional<std::vector<WaypointEntry>> waypoints;
    std::optional<std::uint64_t> max_ticks;
    std::optional<unsigned> threads;
};

/// Applies overrides to the file-level scenario. Throws ScenarioError for
/// unknown agents or invalid values.
ScenarioFile apply_overrides(ScenarioFile scenario, const ScenarioOverrides& overrides);

enum class OperatorMode { scripted, live };

struct Simulation {
    std::shared_ptr<Blackboard> board;
    std::shared_ptr<OperatorScript> script;
    std::shared_ptr<LiveInput> live;
    std::unique_ptr<Scheduler> scheduler;
};

/// Builds the blackboard, agents and scheduler for a validated scenario.
/// In live mode the operator agent listens to a LiveInput instead of the script.
Simulation instantiate(const ScenarioFile& scenario, OperatorMode mode = OperatorMode::scripted,
                       unsigned threads = 1);

struct HeadDeviation {
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;
};

struct RunMetrics {
    std::optional<Outcome> outcome; ///< empty for an unfinished trace
    std::uint64_t ticks = 0;
    double path_length = 0.0;
    HeadDeviation max_head_deviation;
    double final_cone_half_angle = 0.0;
    std::uint64_t collision_ticks = 0;
    double straight_line_distance = 0.0; ///< initial plan distance trunk-target
};

RunMetrics metrics(const Trace& trace, const ScenarioFile& scenario);

std::string format_metrics_text(const RunMetrics& m);
/// Header line plus one tab-separated row.
std::string format_metrics_tsv(const RunMetrics& m);

/// Directory of the scenarios shipped with the project.
std::filesystem::path bundled_scenario_dir();

} // namespace vismas
