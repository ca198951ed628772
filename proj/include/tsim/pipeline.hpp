#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tsim/analysis.hpp"
#include "tsim/common.hpp"
#include "tsim/demand.hpp"
#include "tsim/energy.hpp"
#include "tsim/microsim.hpp"
#include "tsim/outputs.hpp"
#include "tsim/router.hpp"
#include "tsim/scenario.hpp"
#include "tsim/transit.hpp"

namespace tsim {

struct RunOptions {
    uint64_t seed = 1;
    double demand_scale = 1.0;
    DeparturePolicy demand_policy = DeparturePolicy::uniform;
    double stop_radius_m = 100.0;
    double walk_speed_mps = 1.4;
    double max_walk_m = 800.0;
    int max_rides = 3;
    SimParams sim;
};

struct ConfigRunResult {
    SimulationOutputs outputs;
    std::vector<EnergyReport> energy;
    std::vector<TripManifestRow> manifest;
    std::vector<Diagnostic> diagnostics;
};

/// The whole per-configuration pipeline: place stops, generate bus trips,
/// expand demand, route vehicles and persons, simulate, estimate energy.
inline ConfigRunResult run_configuration(const ResolvedConfig& config, const RunOptions& opt) {
    ConfigRunResult result;
    const RoadNetwork& net = *config.net;
    const TransitSchedule& schedule = *config.schedule;

    auto placement = place_stops(schedule, net, opt.stop_radius_m);
    for (const auto& stop : placement.unplaceable)
        result.diagnostics.push_back({Severity::warning, config.id, {},
                                      "stop '" + stop + "' could not be placed on the network"});

    TripSelection sel{config.schedule_day, config.start_s, config.end_s};
    auto generation =
        generate_bus_trips(schedule, placement.placements, net, sel, config.trip_vehicle_type);
    for (auto d : generation.diagnostics) {
        d.config_id = config.id;
        result.diagnostics.push_back(std::move(d));
    }

    auto expanded = expand_trips(*config.od, *config.taz, net, opt.demand_policy,
                                 opt.demand_scale, opt.seed);

    SimWorld world;
    world.net = &net;
    world.catalog = config.catalog.get();
    world.bus_plans = std::move(generation.plans);

    for (const auto& trip : expanded.vehicles) {
        if (trip.depart_s < (double)config.start_s || trip.depart_s >= (double)config.end_s)
            continue;
        auto path = shortest_vehicle_path(net, trip.origin_edge, trip.dest_edge);
        if (!path) {
            result.diagnostics.push_back(
                {Severity::warning, config.id, {},
                 "vehicle trip '" + trip.id + "' dropped: no path from '" + trip.origin_edge +
                     "' to '" + trip.dest_edge + "'"});
            continue;
        }
        world.background.push_back({trip, path->edges});
    }

    std::set<std::string> boardable;
    for (const auto& [stop_id, placed] : placement.placements) boardable.insert(stop_id);
    TimetableIndex index =
        build_timetable_index(schedule, boardable, config.schedule_day, opt.max_walk_m);
    world.timetable = &index;

    for (const auto& person : expanded.persons) {
        if (person.depart_s < (double)config.start_s || person.depart_s >= (double)config.end_s)
            continue;
        auto journey = plan_person_journey(index, person.id, person.origin, person.destination,
                                           person.depart_s, opt.walk_speed_mps, opt.max_rides);
        world.persons.push_back({person.id, person.depart_s, std::move(journey)});
    }

    log_info("config " + std::to_string(config.id) + ": " +
             std::to_string(world.bus_plans.size()) + " bus trips, " +
             std::to_string(world.background.size()) + " background vehicles, " +
             std::to_string(world.persons.size()) + " persons");

    SimWindow window{config.start_s, config.end_s, config.output_sampling_period_s};
    result.outputs = run_simulation(window, world, opt.seed, opt.sim);
    log_info("config " + std::to_string(config.id) + ": " +
             std::to_string(result.outputs.trajectories.size()) + " trajectory records, " +
             std::to_string(result.outputs.stop_events.size()) + " stop events");

    // Trip energy from the recorded bus trajectories, using the assigned type.
    std::map<std::string, std::vector<MotionSample>> samples;
    std::map<std::string, const BusTripPlan*> plan_by_trip;
    for (const auto& plan : world.bus_plans) plan_by_trip[plan.trip_id] = &plan;
    for (const auto& r : result.outputs.trajectories) {
        auto it = plan_by_trip.find(r.vehicle_id);
        if (it == plan_by_trip.end()) continue;
        samples[r.vehicle_id].push_back({r.t_s, r.speed_mps, r.accel_mps2});
    }
    for (const auto& [trip_id, traj] : samples) {
        const BusTripPlan& plan = *plan_by_trip.at(trip_id);
        const VehicleType& type = config.catalog->at(plan.vehicle_type_id);
        result.energy.push_back(
            estimate_trip(trip_id, plan.route_id, traj, type, type.powertrain));
    }

    for (const auto& plan : world.bus_plans) {
        const VehicleType& type = config.catalog->at(plan.vehicle_type_id);
        result.manifest.push_back({plan.trip_id, plan.route_id, plan.block_id,
                                   plan.vehicle_type_id, propulsion_name(type.propulsion)});
    }
    return result;
}

inline void write_config_outputs(const std::filesystem::path& dir, const ConfigRunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    io::write_trajectories(dir / "trajectories.csv", result.outputs.trajectories);
    io::write_stop_events(dir / "stop_events.csv", result.outputs.stop_events);
    io::write_edge_intervals(dir / "edge_intervals.csv", result.outputs.edge_intervals);
    io::write_person_outcomes(dir / "person_outcomes.csv", result.outputs.person_outcomes);
    io::write_energy_reports(dir / "energy.csv", result.energy);
    io::write_trip_manifest(dir / "trips.csv", result.manifest);
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : result.diagnostics) diags.push_back(diagnostic_to_json(d));
    auto out = io::open_out(dir / "diagnostics.json");
    out << diags.dump(2) << '\n';
}

} // namespace tsim
