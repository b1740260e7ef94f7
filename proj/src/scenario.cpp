#include "vismas/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef VISMAS_SCENARIO_DIR
#define VISMAS_SCENARIO_DIR "scenarios"
#endif

namespace vismas {

namespace {

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const std::string& l : lines) {
        if (!out.empty()) {
            out += '\n';
        }
        out += l;
    }
    return out;
}

// Collects every problem instead of stopping at the first one.
class Reader {
public:
    Reader(std::string origin, std::vector<std::string>& errors)
        : origin_(std::move(origin)), errors_(errors)
    {
    }

    std::string where(const YAML::Node& node) const
    {
        const YAML::Mark m = node.Mark();
        if (m.line < 0) {
            return origin_;
        }
        return origin_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
    }

    void error(const YAML::Node& node, const std::string& message)
    {
        errors_.push_back(where(node) + ": " + message);
    }

    void only_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& section)
    {
        if (!map.IsMap()) {
            error(map, section + " must be a mapping");
            return;
        }
        for (const auto& kv : map) {
            const std::string key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&key](const char* a) { return key == a; })) {
                error(kv.first, "unknown key '" + key + "' in " + section);
            }
        }
    }

    template <class T>
    void scalar(const YAML::Node& map, const char* key, T& out, bool required = false)
    {
        const YAML::Node n = map[key];
        if (!n) {
            if (required) {
                error(map, std::string("missing required key '") + key + "'");
            }
            return;
        }
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            error(n, std::string("'") + key + "' has the wrong type");
        }
    }

    bool numbers(const YAML::Node& n, std::size_t count, double* out, const std::string& what)
    {
        if (!n.IsSequence() || n.size() != count) {
            error(n, what + " must be a list of " + std::to_string(count) + " numbers");
            return false;
        }
        try {
            for (std::size_t i = 0; i < count; ++i) {
                out[i] = n[i].as<double>();
            }
        } catch (const YAML::Exception&) {
            error(n, what + " must contain numbers only");
            return false;
        }
        return true;
    }

    std::optional<Polygon> polygon(const YAML::Node& n, const std::string& what)
    {
        if (!n.IsSequence()) {
            error(n, what + " must be a list of [x, y] vertices");
            return std::nullopt;
        }
        Polygon poly;
        for (const YAML::Node& v : n) {
            double xy[2];
            if (!numbers(v, 2, xy, what + " vertex")) {
                return std::nullopt;
            }
            poly.push_back({xy[0], xy[1]});
        }
        return poly;
    }

    void range(const YAML::Node& map, const char* key, RangeDeg& out)
    {
        const YAML::Node n = map[key];
        if (!n) {
            return;
        }
        double v[2];
        if (numbers(n, 2, v, key)) {
            out = {v[0], v[1]};
        }
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::vector<std::string>& errors_;
};

void read_scene(Reader& r, const YAML::Node& node, SceneSpec& scene)
{
    r.only_keys(node, {"bounds", "target", "obstacles"}, "scene");
    if (const YAML::Node b = node["bounds"]) {
        r.numbers(b, 4, scene.bounds, "scene.bounds");
    }
    if (const YAML::Node t = node["target"]) {
        double v[3];
        if (r.numbers(t, 3, v, "scene.target")) {
            scene.target = {v[0], v[1], v[2]};
        }
    } else {
        r.error(node, "missing required key 'target'");
    }
    if (const YAML::Node obs = node["obstacles"]) {
        if (!obs.IsSequence()) {
            r.error(obs, "scene.obstacles must be a list");
            return;
        }
        std::size_t index = 0;
        for (const YAML::Node& o : obs) {
            ObstacleSpec spec;
            spec.name = "obstacle" + std::to_string(index++);
            r.only_keys(o, {"name", "footprint", "z"}, "obstacle");
            r.scalar(o, "name", spec.name);
            if (const YAML::Node f = o["footprint"]) {
                if (auto poly = r.polygon(f, "obstacle '" + spec.name + "' footprint")) {
                    spec.footprint = *poly;
                }
            } else {
                r.error(o, "obstacle '" + spec.name + "' is missing 'footprint'");
            }
            if (const YAML::Node z = o["z"]) {
                double v[2];
                if (r.numbers(z, 2, v, "obstacle z")) {
                    spec.z_min = v[0];
                    spec.z_max = v[1];
                }
            }
            scene.obstacles.push_back(std::move(spec));
        }
    }
}

void read_body(Reader& r, const YAML::Node& node, BodySpec& body)
{
    r.only_keys(node, {"embodiment", "footprint", "height", "eye_height", "eye_forward_offset", "pose", "head",
                       "limits", "cone"},
                "body");
    if (const YAML::Node e = node["embodiment"]) {
        const std::string kind = e.as<std::string>("");
        if (kind == "manikin") {
            body.embodiment = Embodiment::manikin;
        } else if (kind == "robot") {
            body.embodiment = Embodiment::robot;
            body.alpha_limit_deg = {-90.0, 90.0};
            body.beta_limit_deg = {0.0, 0.0};
            body.theta_limit_deg = {-170.0, 170.0};
        } else {
            r.error(e, "embodiment must be 'manikin' or 'robot'");
        }
    }
    if (const YAML::Node f = node["footprint"]) {
        if (auto poly = r.polygon(f, "body footprint")) {
            body.footprint = *poly;
        }
    }
    if (const YAML::Node h = node["height"]) {
        double v[2];
        if (r.numbers(h, 2, v, "body.height")) {
            body.z_min = v[0];
            body.z_max = v[1];
        }
    }
    r.scalar(node, "eye_height", body.eye_height);
    r.scalar(node, "eye_forward_offset", body.eye_forward_offset);
    if (const YAML::Node p = node["pose"]) {
        r.only_keys(p, {"x", "y", "theta_deg"}, "body.pose");
        r.scalar(p, "x", body.x);
        r.scalar(p, "y", body.y);
        r.scalar(p, "theta_deg", body.theta_deg);
    }
    if (const YAML::Node h = node["head"]) {
        r.only_keys(h, {"alpha_deg", "beta_deg", "theta_deg"}, "body.head");
        r.scalar(h, "alpha_deg", body.alpha_deg);
        r.scalar(h, "beta_deg", body.beta_deg);
        r.scalar(h, "theta_deg", body.theta_b_deg);
    }
    if (const YAML::Node l = node["limits"]) {
        r.only_keys(l, {"alpha_deg", "beta_deg", "theta_deg"}, "body.limits");
        r.range(l, "alpha_deg", body.alpha_limit_deg);
        r.range(l, "beta_deg", body.beta_limit_deg);
        r.range(l, "theta_deg", body.theta_limit_deg);
    }
    if (const YAML::Node c = node["cone"]) {
        r.only_keys(c, {"initial_deg", "min_deg", "max_deg", "step_deg"}, "body.cone");
        r.scalar(c, "initial_deg", body.cone_initial_deg);
        r.scalar(c, "min_deg", body.cone_min_deg);
        r.scalar(c, "max_deg", body.cone_max_deg);
        r.scalar(c, "step_deg", body.cone_step_deg);
    }
}

void read_agents(Reader& r, const YAML::Node& node, std::vector<AgentSpec>& agents)
{
    if (!node.IsSequence()) {
        r.error(node, "agents must be a list");
        return;
    }
    for (const YAML::Node& a : node) {
        AgentSpec spec;
        r.only_keys(a, {"id", "kind", "rate", "active"}, "agent");
        std::string kind;
        r.scalar(a, "kind", kind, true);
        spec.id = kind;
        r.scalar(a, "id", spec.id);
        if (!kind.empty()) {
            if (auto k = agent_kind_from_string(kind)) {
                spec.kind = *k;
            } else {
                r.error(a["kind"], "unknown agent kind '" + kind +
                                       "' (expected attraction, repulsion, head, visibility or operator)");
            }
        }
        r.scalar(a, "rate", spec.rate);
        r.scalar(a, "active", spec.active);
        if (spec.rate < 1) {
            r.error(a["rate"] ? a["rate"] : a, "agent '" + spec.id + "': rate must be >= 1, got " +
                                                   std::to_string(spec.rate));
        }
        agents.push_back(std::move(spec));
    }
}

void read_run(Reader& r, const YAML::Node& node, RunSpec& run)
{
    r.only_keys(node, {"delta_pos", "delta_or_deg", "gradient_step", "convergence", "max_ticks", "cone_rays"},
                "run");
    r.scalar(node, "delta_pos", run.delta_pos);
    r.scalar(node, "delta_or_deg", run.delta_or_deg);
    if (const YAML::Node g = node["gradient_step"]) {
        r.only_keys(g, {"xy", "theta_deg"}, "run.gradient_step");
        r.scalar(g, "xy", run.gradient_xy);
        r.scalar(g, "theta_deg", run.gradient_theta_deg);
    }
    if (const YAML::Node c = node["convergence"]) {
        r.only_keys(c, {"d_tol", "visibility_tol", "align_tol_deg", "stall_ticks", "stall_radius"}, "run.convergence");
        r.scalar(c, "d_tol", run.d_tol);
        r.scalar(c, "visibility_tol", run.visibility_tol);
        r.scalar(c, "align_tol_deg", run.align_tol_deg);
        r.scalar(c, "stall_ticks", run.stall_ticks);
        r.scalar(c, "stall_radius", run.stall_radius);
    }
    r.scalar(node, "max_ticks", run.max_ticks);
    r.scalar(node, "cone_rays", run.cone_rays);
}

void read_waypoints(Reader& r, const YAML::Node& node, std::vector<WaypointEntry>& out)
{
    if (!node.IsSequence()) {
        r.error(node, "intermediate_targets must be a list");
        return;
    }
    for (const YAML::Node& w : node) {
        r.only_keys(w, {"tick", "point"}, "intermediate target");
        WaypointEntry e;
        r.scalar(w, "tick", e.tick, true);
        const YAML::Node p = w["point"];
        if (p && !p.IsNull()) {
            double v[3];
            if (r.numbers(p, 3, v, "intermediate target point")) {
                e.point = Vec3{v[0], v[1], v[2]};
            }
        }
        out.push_back(e);
    }
}

void emit_numbers(YAML::Emitter& out, std::initializer_list<double> values)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) {
        out << v;
    }
    out << YAML::EndSeq;
}

void emit_polygon(YAML::Emitter& out, const Polygon& poly)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (const Vec2& v : poly) {
        emit_numbers(out, {v.x, v.y});
    }
    out << YAML::EndSeq;
}

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : InputError(join_lines(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

std::vector<std::string> validate_scenario(const ScenarioFile& s)
{
    std::vector<std::string> errors;
    const auto add = [&errors](std::vector<std::string> more) {
        errors.insert(errors.end(), more.begin(), more.end());
    };
    add(validate_scene(build_scene(s.scene)));
    add(validate_body(build_body(s.body)));

    std::set<std::string> ids;
    int operators = 0;
    for (const AgentSpec& a : s.agents) {
        if (a.id.empty()) {
            errors.push_back("agent ids must not be empty");
        } else if (!ids.insert(a.id).second) {
            errors.push_back("duplicate agent id '" + a.id + "'");
        }
        if (a.rate < 1) {
            errors.push_back("agent '" + a.id + "': rate must be >= 1");
        }
        operators += a.kind == AgentKind::operator_input ? 1 : 0;
    }
    if (operators > 1) {
        errors.push_back("at most one operator agent is supported");
    }
    const RunSpec& r = s.run;
    if (!(r.delta_pos > 0.0) || !(r.delta_or_deg > 0.0)) {
        errors.push_back("run: delta_pos and delta_or_deg must be positive");
    }
    if (!(r.gradient_xy > 0.0) || !(r.gradient_theta_deg > 0.0)) {
        errors.push_back("run: gradient steps must be positive");
    }
    if (!(r.d_tol > 0.0) || !(r.visibility_tol > 0.0) || !(r.align_tol_deg > 0.0) || r.stall_ticks == 0 || r.stall_radius < 0.0) {
        errors.push_back("run: convergence tolerances must be positive");
    }
    if (r.cone_rays < 1) {
        errors.push_back("run: cone_rays must be at least 1");
    }
    for (std::size_t i = 1; i < s.waypoints.size(); ++i) {
        if (s.waypoints[i].tick < s.waypoints[i - 1].tick) {
            errors.push_back("intermediate targets must be listed in tick order");
            break;
        }
    }
    return errors;
}

ScenarioFile parse_scenario(const std::string& text, const std::string& origin,
                            const std::filesystem::path& base_dir)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ScenarioError({origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                             std::to_string(e.mark.column + 1) + ": parse error: " + e.msg});
    }
    std::vector<std::string> errors;
    Reader r(origin, errors);
    ScenarioFile s;
    s.base_dir = base_dir;
    if (!root.IsMap()) {
        throw ScenarioError({origin + ": scenario must be a mapping"});
    }
    r.only_keys(root, {"name", "scene", "body", "agents", "run", "operator_script", "intermediate_targets"},
                "scenario");
    r.scalar(root, "name", s.name);
    if (const YAML::Node n = root["scene"]) {
        read_scene(r, n, s.scene);
    } else {
        r.error(root, "missing required section 'scene'");
    }
    if (const YAML::Node n = root["body"]) {
        read_body(r, n, s.body);
    }
    if (const YAML::Node n = root["agents"]) {
        read_agents(r, n, s.agents);
    }
    if (const YAML::Node n = root["run"]) {
        read_run(r, n, s.run);
    }
    if (const YAML::Node n = root["operator_script"]; n && !n.IsNull()) {
        s.operator_script = n.as<std::string>("");
    }
    if (const YAML::Node n = root["intermediate_targets"]) {
        read_waypoints(r, n, s.waypoints);
    }
    for (const std::string& e : validate_scenario(s)) {
        errors.push_back(origin + ": " + e);
    }
    if (s.operator_script && !base_dir.empty() && !std::filesystem::exists(base_dir / *s.operator_script)) {
        errors.push_back(origin + ": operator script '" + *s.operator_script + "' not found");
    }
    if (!errors.empty()) {
        throw ScenarioError(std::move(errors));
    }
    return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError({path.string() + ": cannot open file"});
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.string(), path.parent_path());
}

std::string save_scenario(const ScenarioFile& s)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;

    out << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "bounds" << YAML::Value;
    emit_numbers(out, {s.scene.bounds[0], s.scene.bounds[1], s.scene.bounds[2], s.scene.bounds[3]});
    out << YAML::Key << "target" << YAML::Value;
    emit_numbers(out, {s.scene.target.x, s.scene.target.y, s.scene.target.z});
    out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
    for (const ObstacleSpec& o : s.scene.obstacles) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << o.name;
        out << YAML::Key << "footprint" << YAML::Value;
        emit_polygon(out, o.footprint);
        out << YAML::Key << "z" << YAML::Value;
        emit_numbers(out, {o.z_min, o.z_max});
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    const BodySpec& b = s.body;
    out << YAML::Key << "body" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "embodiment" << YAML::Value << std::string(to_string(b.embodiment));
    out << YAML::Key << "footprint" << YAML::Value;
    emit_polygon(out, b.footprint);
    out << YAML::Key << "height" << YAML::Value;
    emit_numbers(out, {b.z_min, b.z_max});
    out << YAML::Key << "eye_height" << YAML::Value << b.eye_height;
    out << YAML::Key << "eye_forward_offset" << YAML::Value << b.eye_forward_offset;
    out << YAML::Key << "pose" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "x" << YAML::Value << b.x << YAML::Key << "y" << YAML::Value << b.y;
    out << YAML::Key << "theta_deg" << YAML::Value << b.theta_deg << YAML::EndMap;
    out << YAML::Key << "head" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "alpha_deg" << YAML::Value << b.alpha_deg;
    out << YAML::Key << "beta_deg" << YAML::Value << b.beta_deg;
    out << YAML::Key << "theta_deg" << YAML::Value << b.theta_b_deg << YAML::EndMap;
    out << YAML::Key << "limits" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "alpha_deg" << YAML::Value;
    emit_numbers(out, {b.alpha_limit_deg.min, b.alpha_limit_deg.max});
    out << YAML::Key << "beta_deg" << YAML::Value;
    emit_numbers(out, {b.beta_limit_deg.min, b.beta_limit_deg.max});
    out << YAML::Key << "theta_deg" << YAML::Value;
    emit_numbers(out, {b.theta_limit_deg.min, b.theta_limit_deg.max});
    out << YAML::EndMap;
    out << YAML::Key << "cone" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "initial_deg" << YAML::Value << b.cone_initial_deg;
    out << YAML::Key << "min_deg" << YAML::Value << b.cone_min_deg;
    out << YAML::Key << "max_deg" << YAML::Value << b.cone_max_deg;
    out << YAML::Key << "step_deg" << YAML::Value << b.cone_step_deg << YAML::EndMap;
    out << YAML::EndMap;

    out << YAML::Key << "agents" << YAML::Value << YAML::BeginSeq;
    for (const AgentSpec& a : s.agents) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << a.id;
        out << YAML::Key << "kind" << YAML::Value << std::string(to_string(a.kind));
        out << YAML::Key << "rate" << YAML::Value << a.rate;
        out << YAML::Key << "active" << YAML::Value << a.active;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    const RunSpec& r = s.run;
    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "delta_pos" << YAML::Value << r.delta_pos;
    out << YAML::Key << "delta_or_deg" << YAML::Value << r.delta_or_deg;
    out << YAML::Key << "gradient_step" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "xy" << YAML::Value << r.gradient_xy;
    out << YAML::Key << "theta_deg" << YAML::Value << r.gradient_theta_deg << YAML::EndMap;
    out << YAML::Key << "convergence" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "d_tol" << YAML::Value << r.d_tol;
    out << YAML::Key << "visibility_tol" << YAML::Value << r.visibility_tol;
    out << YAML::Key << "align_tol_deg" << YAML::Value << r.align_tol_deg;
    out << YAML::Key << "stall_ticks" << YAML::Value << r.stall_ticks;
    out << YAML::Key << "stall_radius" << YAML::Value << r.stall_radius;
    out << YAML::EndMap;
    out << YAML::Key << "max_ticks" << YAML::Value << r.max_ticks;
    out << YAML::Key << "cone_rays" << YAML::Value << r.cone_rays;
    out << YAML::EndMap;

    if (s.operator_script) {
        out << YAML::Key << "operator_script" << YAML::Value << *s.operator_script;
    }
    if (!s.waypoints.empty()) {
        out << YAML::Key << "intermediate_targets" << YAML::Value << YAML::BeginSeq;
        for (const WaypointEntry& w : s.waypoints) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "tick" << YAML::Value << w.tick;
            out << YAML::Key << "point" << YAML::Value;
            if (w.point) {
                emit_numbers(out, {w.point->x, w.point->y, w.point->z});
            } else {
                out << YAML::Null;
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<WaypointEntry> parse_waypoints(std::string_view text, const std::string& origin)
{
    std::vector<WaypointEntry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        long long tick = 0;
        if (!(fields >> tick)) {
            std::string rest;
            if (std::istringstream(line) >> rest) {
                throw InputError(origin + ":" + std::to_string(line_no) + ": expected a tick");
            }
            continue;
        }
        if (tick < 0) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": tick must be non-negative");
        }
        WaypointEntry e;
        e.tick = static_cast<std::uint64_t>(tick);
        std::string word;
        if (!(fields >> word)) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": expected 'x y z' or 'clear'");
        }
        if (word != "clear") {
            Vec3 p;
            std::istringstream rest(word + " " + std::string(std::istreambuf_iterator<char>(fields), {}));
            if (!(rest >> p.x >> p.y >> p.z)) {
                throw InputError(origin + ":" + std::to_string(line_no) + ": expected 'x y z' or 'clear'");
            }
            e.point = p;
        }
        if (!out.empty() && e.tick < out.back().tick) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": ticks must be non-decreasing");
        }
        out.push_back(e);
    }
    return out;
}

std::vector<WaypointEntry> load_waypoints(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open waypoint file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_waypoints(buffer.str(), path.string());
}

Scene build_scene(const SceneSpec& spec)
{
    Scene scene;
    scene.bounds = {{spec.bounds[0], spec.bounds[1]}, {spec.bounds[2], spec.bounds[3]}};
    scene.target = spec.target;
    for (const ObstacleSpec& o : spec.obstacles) {
        const bool usable = o.footprint.size() >= 3;
        scene.obstacles.push_back({o.name, usable ? counter_clockwise(o.footprint) : o.footprint,
                                   {o.z_min, o.z_max}});
    }
    return scene;
}

BodyState build_body(const BodySpec& spec)
{
    BodyState body;
    body.embodiment = spec.embodiment;
    body.footprint = spec.footprint.size() >= 3 ? counter_clockwise(spec.footprint) : spec.footprint;
    body.z_range = {spec.z_min, spec.z_max};
    body.eye_height = spec.eye_height;
    body.eye_forward_offset = spec.eye_forward_offset;
    body.trunk = {spec.x, spec.y, normalize_angle(deg_to_rad(spec.theta_deg))};
    body.head = {deg_to_rad(spec.alpha_deg), deg_to_rad(spec.beta_deg), deg_to_rad(spec.theta_b_deg)};
    body.limits = {
        {deg_to_rad(spec.alpha_limit_deg.min), deg_to_rad(spec.alpha_limit_deg.max)},
        {deg_to_rad(spec.beta_limit_deg.min), deg_to_rad(spec.beta_limit_deg.max)},
        {deg_to_rad(spec.theta_limit_deg.min), deg_to_rad(spec.theta_limit_deg.max)},
    };
    body.cone = {deg_to_rad(spec.cone_min_deg), deg_to_rad(spec.cone_max_deg), deg_to_rad(spec.cone_step_deg)};
    body.cone_half_angle = deg_to_rad(spec.cone_initial_deg);
    return body;
}

RunConfig build_run_config(const RunSpec& spec)
{
    RunConfig config;
    config.normalization = {spec.delta_pos, deg_to_rad(spec.delta_or_deg)};
    config.gradient = {spec.gradient_xy, deg_to_rad(spec.gradient_theta_deg)};
    config.convergence = {spec.d_tol, spec.visibility_tol, deg_to_rad(spec.align_tol_deg), spec.stall_ticks,
                          spec.stall_radius};
    config.max_ticks = spec.max_ticks;
    return config;
}

ScenarioFile apply_overrides(ScenarioFile s, const ScenarioOverrides& o)
{
    std::vector<std::string> errors;
    const auto find = [&](const std::string& id) -> AgentSpec* {
        for (AgentSpec& a : s.agents) {
            if (a.id == id) {
                return &a;
            }
        }
        errors.push_back("override names unknown agent '" + id + "'");
        return nullptr;
    };
    for (const auto& [id, rate] : o.rates) {
        if (AgentSpec* a = find(id)) {
            if (rate < 1) {
                errors.push_back("override for '" + id + "': rate must be >= 1");
            }
            a->rate = rate;
        }
    }
    for (const std::string& id : o.paused) {
        if (AgentSpec* a = find(id)) {
            a->active = false;
        }
    }
    for (const std::string& id : o.activated) {
        if (AgentSpec* a = find(id)) {
            a->active = true;
        }
    }
    if (o.delta_pos) {
        s.run.delta_pos = *o.delta_pos;
    }
    if (o.delta_or_deg) {
        s.run.delta_or_deg = *o.delta_or_deg;
    }
    if (o.operator_script) {
        const std::filesystem::path abs = std::filesystem::absolute(*o.operator_script);
        s.operator_script = abs.string();
    }
    if (o.waypoints) {
        s.waypoints = *o.waypoints;
    }
    if (o.max_ticks) {
        s.run.max_ticks = *o.max_ticks;
    }
    for (const std::string& e : validate_scenario(s)) {
        errors.push_back(e);
    }
    if (!errors.empty()) {
        throw ScenarioError(std::move(errors));
    }
    return s;
}

Simulation instantiate(const ScenarioFile& scenario, OperatorMode mode, unsigned threads)
{
    if (auto errors = validate_scenario(scenario); !errors.empty()) {
        throw ScenarioError(std::move(errors));
    }
    Simulation sim;
    RunConfig config = build_run_config(scenario.run);
    config.threads = threads;

    WorldState initial;
    initial.scene = build_scene(scenario.scene);
    initial.body = build_body(scenario.body);

    std::shared_ptr<const OperatorInput> operator_input;
    if (mode == OperatorMode::live) {
        std::uint64_t staleness = 1;
        for (const AgentSpec& a : scenario.agents) {
            if (a.kind == AgentKind::operator_input) {
                staleness = static_cast<std::uint64_t>(a.rate);
            }
        }
        sim.live = std::make_shared<LiveInput>(staleness);
        operator_input = sim.live;
    } else if (scenario.operator_script) {
        std::filesystem::path path(*scenario.operator_script);
        if (path.is_relative()) {
            path = scenario.base_dir / path;
        }
        sim.script = std::make_shared<OperatorScript>(OperatorScript::load(path));
        operator_input = sim.script;
    }

    std::vector<std::unique_ptr<Agent>> agents;
    std::vector<AgentConfig> configs;
    std::vector<std::string> ids;
    for (const AgentSpec& a : scenario.agents) {
        agents.push_back(make_agent(a.kind, a.id, config.gradient, operator_input, scenario.run.cone_rays));
        configs.push_back({a.id, a.rate, a.active});
        ids.push_back(a.id);
    }
    sim.board = std::make_shared<Blackboard>(std::move(initial), ids);
    sim.scheduler = std::make_unique<Scheduler>(sim.board, std::move(agents), std::move(configs), config, sim.live);
    for (const WaypointEntry& w : scenario.waypoints) {
        sim.scheduler->schedule(w.tick, SetIntermediateTarget{w.point});
    }
    return sim;
}

RunMetrics metrics(const Trace& trace, const ScenarioFile& scenario)
{
    RunMetrics m;
    const BodyState body = build_body(scenario.body);
    if (trace.result) {
        m.outcome = trace.result->outcome;
    }
    m.ticks = trace.records.size();
    m.straight_line_distance = norm(scenario.scene.target.plan() - Vec2{body.trunk.x, body.trunk.y});
    m.final_cone_half_angle = body.cone_half_angle;
    m.max_head_deviation = {std::abs(body.head.alpha), std::abs(body.head.beta), std::abs(body.head.theta)};

    Vec2 previous{body.trunk.x, body.trunk.y};
    for (const TickRecord& r : trace.records) {
        const Vec2 here{r.trunk.x, r.trunk.y};
        m.path_length += norm(here - previous);
        previous = here;
        m.max_head_deviation.alpha = std::max(m.max_head_deviation.alpha, std::abs(r.head.alpha));
        m.max_head_deviation.beta = std::max(m.max_head_deviation.beta, std::abs(r.head.beta));
        m.max_head_deviation.theta = std::max(m.max_head_deviation.theta, std::abs(r.head.theta));
        m.final_cone_half_angle = r.cone_half_angle;
        if (r.assessment.collision > 0.0) {
            ++m.collision_ticks;
        }
    }
    return m;
}

std::string format_metrics_text(const RunMetrics& m)
{
    std::ostringstream out;
    out.precision(10);
    out << "outcome: " << (m.outcome ? std::string(to_string(*m.outcome)) : "unfinished") << '\n'
        << "ticks: " << m.ticks << '\n'
        << "path_length_m: " << m.path_length << '\n'
        << "straight_line_m: " << m.straight_line_distance << '\n'
        << "max_head_alpha_deg: " << rad_to_deg(m.max_head_deviation.alpha) << '\n'
        << "max_head_beta_deg: " << rad_to_deg(m.max_head_deviation.beta) << '\n'
        << "max_head_theta_deg: " << rad_to_deg(m.max_head_deviation.theta) << '\n'
        << "final_cone_deg: " << rad_to_deg(m.final_cone_half_angle) << '\n'
        << "collision_ticks: " << m.collision_ticks << '\n';
    return out.str();
}

std::string format_metrics_tsv(const RunMetrics& m)
{
    std::ostringstream out;
    out.precision(17);
    out << "outcome\tticks\tpath_length_m\tstraight_line_m\tmax_head_alpha_rad\tmax_head_beta_rad\t"
           "max_head_theta_rad\tfinal_cone_rad\tcollision_ticks\n";
    out << (m.outcome ? std::string(to_string(*m.outcome)) : "unfinished") << '\t' << m.ticks << '\t'
        << m.path_length << '\t' << m.straight_line_distance << '\t' << m.max_head_deviation.alpha << '\t'
        << m.max_head_deviation.beta << '\t' << m.max_head_deviation.theta << '\t' << m.final_cone_half_angle
        << '\t' << m.collision_ticks << '\n';
    return out.str();
}

std::filesystem::path bundled_scenario_dir()
{
    if (const char* env = std::getenv("VISMAS_SCENARIOS")) {
        return env;
    }
    return VISMAS_SCENARIO_DIR;
}

} // namespace vismas
