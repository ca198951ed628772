#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tsim/analysis.hpp"
#include "tsim/common.hpp"
#include "tsim/outputs.hpp"
#include "tsim/pipeline.hpp"
#include "tsim/scenario.hpp"

#include <CLI11.hpp>

namespace tsim {
namespace cli {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

inline void print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << "tsim " << d.str() << '\n';
}

/// parse + load resources + validate + resolve; shared by compile and run.
struct CompiledScenario {
    ScenarioProgram program;
    std::vector<Diagnostic> diagnostics;
    std::vector<ResolvedConfig> configs;
};

inline CompiledScenario compile_scenario(const std::string& scenario_path,
                                         const std::optional<std::string>& workspace_dir) {
    CompiledScenario out;
    out.program = load_scenario(scenario_path);
    out.diagnostics = check_imports(out.program);
    if (has_errors(out.diagnostics)) return out;

    fs::path root = workspace_dir ? fs::path(*workspace_dir)
                                  : fs::path(scenario_path).parent_path();
    Workspace workspace(root);

    std::map<ImportKind, std::string> keys;
    for (const auto& imp : out.program.imports) keys[imp.kind] = imp.key;
    auto schedule = workspace.gtfs(keys.at(ImportKind::gtfs));
    auto catalog = workspace.vehicles(keys.at(ImportKind::vehicle));

    out.diagnostics = validate_scenario(out.program, *schedule, *catalog);
    if (has_errors(out.diagnostics)) return out;

    out.configs = interpret(out.program, workspace);
    return out;
}

inline int cmd_compile(const std::string& scenario, const std::optional<std::string>& workspace,
                       bool as_json) {
    auto compiled = compile_scenario(scenario, workspace);
    if (as_json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& d : compiled.diagnostics) arr.push_back(diagnostic_to_json(d));
        std::cout << arr.dump(2) << '\n';
    }
    print_diagnostics(compiled.diagnostics);
    if (has_errors(compiled.diagnostics)) return kExitValidation;
    if (!as_json)
        std::cout << "compiled " << compiled.configs.size() << " configuration(s)\n";
    return kExitOk;
}

inline int cmd_run(const std::string& scenario, const std::optional<std::string>& workspace,
                   const std::string& out_dir, const RunOptions& options, bool sequential) {
    auto compiled = compile_scenario(scenario, workspace);
    print_diagnostics(compiled.diagnostics);
    if (has_errors(compiled.diagnostics)) return kExitValidation;

    struct Job {
        const ResolvedConfig* config;
        fs::path dir;
        std::exception_ptr error;
    };
    std::vector<Job> jobs;
    for (const auto& config : compiled.configs)
        jobs.push_back({&config, fs::path(out_dir) / std::to_string(config.id), nullptr});

    auto work = [&](Job& job) {
        try {
            auto result = run_configuration(*job.config, options);
            write_config_outputs(job.dir, result);
            print_diagnostics(result.diagnostics);
        } catch (...) {
            job.error = std::current_exception();
        }
    };

    if (sequential || jobs.size() == 1) {
        for (auto& job : jobs) work(job);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs.size());
        for (auto& job : jobs) threads.emplace_back([&work, &job] { work(job); });
        for (auto& th : threads) th.join();
    }
    for (auto& job : jobs)
        if (job.error) std::rethrow_exception(job.error);
    std::cout << "wrote " << jobs.size() << " configuration(s) under " << out_dir << '\n';
    return kExitOk;
}

// --- analyze -----------------------------------------------------------------

/// A run directory holds one subdirectory per configuration id; a
/// configuration directory holds the CSV streams directly.
inline std::vector<std::pair<std::string, fs::path>> find_config_dirs(const fs::path& dir) {
    std::vector<std::pair<std::string, fs::path>> out;
    if (fs::exists(dir / "stop_events.csv")) {
        out.emplace_back("", dir);
        return out;
    }
    std::vector<fs::path> subs;
    if (fs::is_directory(dir))
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_directory() && fs::exists(entry.path() / "stop_events.csv"))
                subs.push_back(entry.path());
    std::sort(subs.begin(), subs.end());
    for (const auto& p : subs) out.emplace_back(p.filename().string(), p);
    if (out.empty())
        throw IoError("'" + dir.string() + "' contains no simulation outputs");
    return out;
}

inline std::map<std::string, std::string> manifest_routes(const fs::path& config_dir) {
    std::map<std::string, std::string> routes;
    for (const auto& row : io::read_trip_manifest(config_dir / "trips.csv"))
        routes[row.trip_id] = row.route_id;
    return routes;
}

inline int cmd_analyze(const std::string& dir, bool occupancy, bool speeds, bool boardings,
                       bool energy, const std::optional<std::string>& route,
                       const std::vector<int>& hours) {
    auto configs = find_config_dirs(dir);
    bool multi = configs.size() > 1 || !configs.front().first.empty();
    auto config_col = [&](const std::string& label) {
        return multi ? label + "," : std::string();
    };
    int selected = (occupancy ? 1 : 0) + (speeds ? 1 : 0) + (boardings ? 1 : 0) + (energy ? 1 : 0);
    if (selected != 1)
        throw ModelError("pick exactly one of --occupancy, --speeds, --boardings, --energy");

    if (occupancy) {
        std::cout << (multi ? "config," : "") << "trip,route,seq,stop,onboard_before_arrival\n";
        for (const auto& [label, path] : configs) {
            auto events = io::read_stop_events(path / "stop_events.csv");
            auto profiles = occupancy_by_trip(events, manifest_routes(path));
            for (const auto& p : profiles)
                for (size_t i = 0; i < p.onboard_before_arrival.size(); ++i)
                    std::cout << config_col(label) << p.trip_id << ',' << p.route_id << ',' << i
                              << ',' << p.stops[i] << ',' << p.onboard_before_arrival[i] << '\n';
        }
    } else if (speeds) {
        std::cout << (multi ? "config," : "")
                  << "route,hour,samples,mean,q1,median,q3,min,max\n";
        for (const auto& [label, path] : configs) {
            auto records = io::read_trajectories(path / "trajectories.csv");
            auto stats = speed_stats(records, manifest_routes(path), route, hours);
            for (const auto& s : stats)
                std::cout << config_col(label) << s.route_id << ',' << s.hour << ',' << s.samples
                          << ',' << fmt_double(s.mean) << ',' << fmt_double(s.q1) << ','
                          << fmt_double(s.median) << ',' << fmt_double(s.q3) << ','
                          << fmt_double(s.min) << ',' << fmt_double(s.max) << '\n';
        }
    } else if (boardings) {
        std::cout << (multi ? "config," : "") << "route,trip,boarded,alighted\n";
        for (const auto& [label, path] : configs) {
            auto events = io::read_stop_events(path / "stop_events.csv");
            for (const auto& row : boarding_alighting_totals(events, manifest_routes(path)))
                std::cout << config_col(label) << row.route_id << ',' << row.trip_id << ','
                          << row.boarded << ',' << row.alighted << '\n';
        }
    } else if (energy) {
        std::cout << (multi ? "config," : "")
                  << "trip,route,propulsion,distance_mi,energy_kJ,economy_mi_per_deg\n";
        for (const auto& [label, path] : configs) {
            for (const auto& r : io::read_energy_reports(path / "energy.csv")) {
                std::cout << config_col(label) << r.trip_id << ',' << r.route_id << ','
                          << propulsion_name(r.propulsion) << ','
                          << fmt_double(r.distance_m / units::m_per_mile) << ','
                          << fmt_double(r.energy_kJ) << ',';
                if (r.economy_mi_per_deg) std::cout << fmt_double(*r.economy_mi_per_deg);
                std::cout << '\n';
            }
        }
    }
    return kExitOk;
}

inline int cmd_compare(const std::vector<std::string>& dirs) {
    std::map<std::string, std::vector<EnergyReport>> by_scenario;
    for (const auto& dir : dirs) {
        auto configs = find_config_dirs(dir);
        for (const auto& [label, path] : configs) {
            std::string scenario = fs::path(dir).filename().string();
            if (scenario.empty()) scenario = dir;
            if (!label.empty() && configs.size() > 1) scenario += ":" + label;
            auto reports = io::read_energy_reports(path / "energy.csv");
            auto& bucket = by_scenario[scenario];
            bucket.insert(bucket.end(), reports.begin(), reports.end());
        }
    }
    std::cout << "route,trip,scenario,propulsion,economy_mi_per_deg\n";
    for (const auto& row : compare_scenarios(by_scenario)) {
        std::cout << row.route_id << ',' << row.trip_id << ',' << row.scenario << ',';
        if (row.propulsion) std::cout << propulsion_name(*row.propulsion);
        std::cout << ',';
        if (row.economy_mi_per_deg) std::cout << fmt_double(*row.economy_mi_per_deg);
        std::cout << '\n';
    }
    return kExitOk;
}

// --- entry point ---------------------------------------------------------------

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"transit scenario compiler, microsimulation, and analysis engine"};
    app.require_subcommand(1);

    std::string scenario, out_dir = "out", analyze_dir;
    std::optional<std::string> workspace;
    std::vector<std::string> compare_dirs;
    bool as_json = false, sequential = false, buses_only = false;
    bool occupancy = false, speeds = false, boardings = false, energy = false;
    std::optional<std::string> route;
    std::vector<int> hours;
    RunOptions options;
    std::string policy = "uniform";

    auto* compile = app.add_subcommand("compile", "parse, validate, and resolve a scenario");
    compile->add_option("scenario", scenario, "scenario file (.scn)")->required();
    compile->add_option("--workspace", workspace, "workspace root (default: scenario directory)");
    compile->add_flag("--json", as_json, "emit diagnostics as JSON on stdout");

    auto* run = app.add_subcommand("run", "run every configuration of a scenario");
    run->add_option("scenario", scenario, "scenario file (.scn)")->required();
    run->add_option("--workspace", workspace, "workspace root (default: scenario directory)");
    run->add_option("--seed", options.seed, "simulation and sampling seed");
    run->add_option("--out", out_dir, "output directory (one subdirectory per configuration)");
    run->add_option("--demand-scale", options.demand_scale, "OD demand scale in (0,1]");
    run->add_option("--demand-policy", policy, "departure policy: uniform|random");
    run->add_option("--sigma", options.sim.sigma, "car-following dawdling factor in [0,1]");
    run->add_flag("--buses-only", buses_only, "record only bus trajectories");
    run->add_flag("--sequential", sequential, "run configurations one after another");

    auto* analyze = app.add_subcommand("analyze", "derive analysis tables from run outputs");
    analyze->add_option("dir", analyze_dir, "run or configuration output directory")->required();
    analyze->add_flag("--occupancy", occupancy, "occupancy before each stop arrival, by trip");
    analyze->add_flag("--speeds", speeds, "per-hour bus speed distributions");
    analyze->add_flag("--boardings", boardings, "boarding/alighting totals by trip and route");
    analyze->add_flag("--energy", energy, "per-trip energy reports");
    analyze->add_option("--route", route, "restrict --speeds to one route");
    analyze->add_option("--hours", hours, "restrict --speeds to these hours");

    auto* compare = app.add_subcommand("compare", "align energy economy across scenario runs");
    compare->add_option("dirs", compare_dirs, "two or more run directories")
        ->required()
        ->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitIo;
    }

    try {
        if (compile->parsed()) return cmd_compile(scenario, workspace, as_json);
        if (run->parsed()) {
            if (policy == "random") options.demand_policy = DeparturePolicy::random;
            else if (policy != "uniform") throw ModelError("unknown demand policy '" + policy + "'");
            options.sim.record_background = !buses_only;
            return cmd_run(scenario, workspace, out_dir, options, sequential);
        }
        if (analyze->parsed())
            return cmd_analyze(analyze_dir, occupancy, speeds, boardings, energy, route, hours);
        if (compare->parsed()) return cmd_compare(compare_dirs);
    } catch (const IoError& e) {
        std::cerr << "tsim error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "tsim error: " << scenario << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const ModelError& e) {
        std::cerr << "tsim error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "tsim error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

} // namespace cli
} // namespace tsim
