#include "vismas/cli.hpp"

#include "vismas/scenario.hpp"
#include "vismas/session.hpp"
#include "vismas/trace.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace vismas {

namespace {

struct OverrideArgs {
    std::vector<std::string> rates;
    std::vector<std::string> paused;
    std::vector<std::string> worked;
    std::optional<double> delta_pos;
    std::optional<double> delta_or_deg;
    std::string script;
    std::string waypoint_file;
    std::vector<std::string> waypoints;
    std::optional<std::uint64_t> max_ticks;
    unsigned threads = 1;
};

void add_overrides(CLI::App* app, OverrideArgs& o)
{
    app->add_option("--rate", o.rates, "Set an agent's rate, AGENT=N (repeatable)");
    app->add_option("--pause", o.paused, "Start with AGENT paused (repeatable)");
    app->add_option("--work", o.worked, "Start with AGENT working (repeatable)");
    app->add_option("--delta-pos", o.delta_pos, "Translation per firing, meters")->check(CLI::PositiveNumber);
    app->add_option("--delta-or-deg", o.delta_or_deg, "Rotation per firing, degrees")->check(CLI::PositiveNumber);
    app->add_option("--script", o.script, "Operator script replacing the scenario's own");
    app->add_option("--waypoints", o.waypoint_file, "Intermediate target file (`tick x y z` / `tick clear`)");
    app->add_option("--waypoint", o.waypoints, "Intermediate target, TICK:X,Y,Z or TICK:clear (repeatable)");
    app->add_option("--max-ticks", o.max_ticks, "Tick budget");
    app->add_option("--threads", o.threads, "Worker threads for agent evaluation")->check(CLI::Range(1u, 256u));
}

WaypointEntry parse_waypoint_flag(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--waypoint", "expected TICK:X,Y,Z or TICK:clear, got '" + text + "'");
    }
    std::string line = text.substr(0, colon) + " " + text.substr(colon + 1);
    std::replace(line.begin(), line.end(), ',', ' ');
    try {
        auto entries = parse_waypoints(line, "--waypoint");
        if (entries.size() != 1) {
            throw InputError("empty");
        }
        return entries.front();
    } catch (const InputError&) {
        throw CLI::ValidationError("--waypoint", "expected TICK:X,Y,Z or TICK:clear, got '" + text + "'");
    }
}

ScenarioOverrides to_overrides(const OverrideArgs& a)
{
    ScenarioOverrides o;
    for (const std::string& r : a.rates) {
        const auto eq = r.find('=');
        int rate = 0;
        std::istringstream value(eq == std::string::npos ? "" : r.substr(eq + 1));
        if (eq == std::string::npos || eq == 0 || !(value >> rate) || !value.eof()) {
            throw CLI::ValidationError("--rate", "expected AGENT=N, got '" + r + "'");
        }
        o.rates[r.substr(0, eq)] = rate;
    }
    o.paused.insert(a.paused.begin(), a.paused.end());
    o.activated.insert(a.worked.begin(), a.worked.end());
    o.delta_pos = a.delta_pos;
    o.delta_or_deg = a.delta_or_deg;
    if (!a.script.empty()) {
        o.operator_script = a.script;
    }
    if (!a.waypoint_file.empty() || !a.waypoints.empty()) {
        std::vector<WaypointEntry> w;
        if (!a.waypoint_file.empty()) {
            w = load_waypoints(a.waypoint_file);
        }
        for (const std::string& flag : a.waypoints) {
            w.push_back(parse_waypoint_flag(flag));
        }
        std::stable_sort(w.begin(), w.end(), [](const auto& x, const auto& y) { return x.tick < y.tick; });
        o.waypoints = std::move(w);
    }
    o.max_ticks = a.max_ticks;
    o.threads = a.threads;
    return o;
}

// Accepts a path or the name of a bundled scenario.
std::filesystem::path resolve_scenario(const std::string& arg)
{
    const std::filesystem::path direct(arg);
    if (std::filesystem::exists(direct)) {
        return direct;
    }
    for (const char* ext : {".yaml", ""}) {
        const std::filesystem::path bundled = bundled_scenario_dir() / (arg + ext);
        if (std::filesystem::exists(bundled)) {
            return bundled;
        }
    }
    throw ScenarioError({arg + ": no such scenario file or bundled scenario"});
}

ScenarioFile load_with_overrides(const std::string& arg, const OverrideArgs& args)
{
    return apply_overrides(load_scenario(resolve_scenario(arg)), to_overrides(args));
}

int outcome_exit(Outcome o)
{
    switch (o) {
    case Outcome::converged:
        return exit_converged;
    case Outcome::stalled:
        return exit_stalled;
    case Outcome::max_ticks:
        return exit_max_ticks;
    }
    return exit_runtime_error;
}

void write_metrics(const RunMetrics& m, const std::string& format, const std::string& path, std::ostream& out)
{
    const std::string text = format == "tsv" ? format_metrics_tsv(m) : format_metrics_text(m);
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    file << text;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    return file;
}

int cmd_run(const std::string& scenario_arg, const OverrideArgs& args, const std::string& trace_path,
            const std::string& metrics_path, const std::string& format, std::ostream& out)
{
    const ScenarioFile scenario = load_with_overrides(scenario_arg, args);
    Simulation sim = instantiate(scenario, OperatorMode::scripted, args.threads);

    Trace trace;
    trace.scenario = scenario.name;
    trace.agents = sim.scheduler->agent_configs();
    const RunResult result = sim.scheduler->run();
    trace.records = sim.scheduler->trace();
    trace.result = result;
    if (!trace_path.empty()) {
        std::ofstream file = open_output(trace_path);
        write_trace(file, trace);
    }
    const std::uint64_t digest = trace.records.empty() ? state_digest(*sim.board->snapshot())
                                                       : trace.records.back().digest;
    out << "outcome: " << to_string(result.outcome) << "  ticks: " << result.ticks
        << "  digest: " << digest_hex(digest) << '\n';
    write_metrics(metrics(trace, scenario), format, metrics_path, out);
    return outcome_exit(result.outcome);
}

int cmd_replay(const std::string& scenario_arg, const std::string& trace_path, const OverrideArgs& args,
               std::ostream& out, std::ostream& err)
{
    const ScenarioFile scenario = load_with_overrides(scenario_arg, args);
    const Trace trace = load_trace(trace_path);
    if (trace.scenario != scenario.name) {
        err << "warning: trace was recorded for scenario '" << trace.scenario << "', replaying '"
            << scenario.name << "'\n";
    }
    if (trace.truncated) {
        err << "warning: incomplete final line dropped from " << trace_path << '\n';
    }
    Simulation sim = instantiate(scenario, trace.live_operator ? OperatorMode::live : OperatorMode::scripted,
                                 args.threads);
    const ReplayVerdict verdict =
        replay(trace.records, trace.result ? std::optional(trace.result->outcome) : std::nullopt, *sim.scheduler,
               !trace.result && trace.live_operator);
    if (verdict.identical) {
        out << "identical: " << verdict.compared_ticks << " ticks match\n";
        return exit_converged;
    }
    out << "diverged at tick " << verdict.first_divergence->tick << ": " << verdict.first_divergence->reason
        << '\n';
    return exit_diverged;
}

int cmd_metrics(const std::string& scenario_arg, const std::string& trace_path, const std::string& format,
                std::ostream& out)
{
    const ScenarioFile scenario = load_scenario(resolve_scenario(scenario_arg));
    write_metrics(metrics(load_trace(trace_path), scenario), format, "", out);
    return exit_converged;
}

int cmd_validate(const std::vector<std::string>& files, std::ostream& out, std::ostream& err)
{
    int status = exit_converged;
    for (const std::string& f : files) {
        try {
            const ScenarioFile s = load_scenario(resolve_scenario(f));
            out << f << ": ok (" << s.name << ")\n";
        } catch (const ScenarioError& e) {
            for (const std::string& d : e.diagnostics()) {
                err << d << '\n';
            }
            status = exit_data;
        }
    }
    return status;
}

int cmd_serve(const std::string& scenario_arg, const OverrideArgs& args, const ServeOptions& base,
              const std::string& trace_path, std::ostream& out)
{
    const ScenarioFile scenario = load_with_overrides(scenario_arg, args);
    Simulation sim = instantiate(scenario, OperatorMode::live, args.threads);
    std::optional<std::ofstream> trace_file;
    ServeOptions options = base;
    options.handle_signals = true;
    if (!trace_path.empty()) {
        trace_file.emplace(open_output(trace_path));
        options.trace_out = &*trace_file;
    }
    SessionServer server(sim, scenario.name, options);
    out << "serving '" << scenario.name << "' on ws://" << options.address << ":" << server.port() << "/\n"
        << std::flush;
    const SessionSummary summary = server.run();
    out << "session ended (" << summary.reason << ") after " << summary.ticks << " ticks\n";
    if (summary.outcome) {
        return outcome_exit(*summary.outcome);
    }
    return exit_converged;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multi-agent visibility and posture simulator"};
    app.name("vismas");
    app.require_subcommand(1);

    std::string scenario;
    std::string trace_path;
    std::string metrics_path;
    std::string format = "text";
    std::vector<std::string> files;
    OverrideArgs overrides;
    ServeOptions serve;

    CLI::App* run = app.add_subcommand("run", "Run a scenario headless");
    run->add_option("scenario", scenario, "Scenario file or bundled scenario name")->required();
    run->add_option("--trace", trace_path, "Write the tick trace (NDJSON) here");
    run->add_option("--metrics", metrics_path, "Write metrics here instead of stdout");
    run->add_option("--format", format, "Metrics format")->check(CLI::IsMember({"text", "tsv"}));
    add_overrides(run, overrides);

    CLI::App* rep = app.add_subcommand("replay", "Re-execute a trace and compare every tick digest");
    rep->add_option("scenario", scenario, "Scenario the trace was recorded with")->required();
    rep->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
    add_overrides(rep, overrides);

    CLI::App* met = app.add_subcommand("metrics", "Compute metrics of a recorded trace");
    met->add_option("scenario", scenario, "Scenario the trace was recorded with")->required();
    met->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
    met->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "tsv"}));

    CLI::App* val = app.add_subcommand("validate", "Check scenario files and report every problem");
    val->add_option("scenarios", files, "Scenario files")->required();

    CLI::App* srv = app.add_subcommand("serve", "Host a live session for the operator console");
    srv->add_option("scenario", scenario, "Scenario file or bundled scenario name")->required();
    srv->add_option("--port", serve.port, "TCP port, 0 for any free port");
    srv->add_option("--address", serve.address, "Listen address");
    srv->add_option("--ticks-per-second", serve.ticks_per_second, "Pacing, 0 for unpaced")
        ->check(CLI::NonNegativeNumber);
    srv->add_option("--trace", trace_path, "Write the session trace (NDJSON) here");
    add_overrides(srv, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "vismas: " << e.what() << '\n';
        if (e.get_exit_code() == 0) {
            return 0;
        }
        err << "run 'vismas --help' for usage\n";
        return exit_usage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(scenario, overrides, trace_path, metrics_path, format, out);
        }
        if (rep->parsed()) {
            return cmd_replay(scenario, trace_path, overrides, out, err);
        }
        if (met->parsed()) {
            return cmd_metrics(scenario, trace_path, format, out);
        }
        if (val->parsed()) {
            return cmd_validate(files, out, err);
        }
        if (srv->parsed()) {
            return cmd_serve(scenario, overrides, serve, trace_path, out);
        }
    } catch (const CLI::ValidationError& e) {
        err << "vismas: " << e.what() << '\n';
        return exit_usage;
    } catch (const ScenarioError& e) {
        for (const std::string& d : e.diagnostics()) {
            err << d << '\n';
        }
        return exit_data;
    } catch (const InputError& e) {
        err << "vismas: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        err << "vismas: " << e.what() << '\n';
        return exit_runtime_error;
    }
    return exit_usage;
}

} // namespace vismas
