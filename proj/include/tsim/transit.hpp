#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/gtfs.hpp"
#include "tsim/network.hpp"
#include "tsim/router.hpp"

namespace tsim {

struct PlacedStop {
    std::string stop_id;
    std::string edge_id;
    double offset_m = 0.0;
};

struct StopPlacementResult {
    std::map<std::string, PlacedStop> placements;
    std::vector<std::string> unplaceable;  // stop ids, sorted
};

/// Snap every stop to its nearest edge within radius_m. Stops out of range
/// land in the unplaceable report instead of failing the load.
inline StopPlacementResult place_stops(const TransitSchedule& schedule, const RoadNetwork& net,
                                       double radius_m = 100.0) {
    StopPlacementResult result;
    for (const auto& [stop_id, stop] : schedule.stops) {
        auto snap = snap_to_edge(net, stop.coord, radius_m);
        if (snap)
            result.placements[stop_id] = {stop_id, snap->edge_id, snap->offset_m};
        else
            result.unplaceable.push_back(stop_id);
    }
    return result;
}

struct StopVisitPlan {
    std::string stop_id;
    std::string edge_id;
    double offset_m = 0.0;
    long scheduled_arrival_s = 0;
    long scheduled_departure_s = 0;
    int path_index = 0;  // position of edge_id within BusTripPlan::edge_path
};

struct BusTripPlan {
    std::string trip_id;
    std::string route_id;
    std::string block_id;
    std::string vehicle_type_id;
    long depart_s = 0;  // scheduled departure at the first stop
    std::vector<StopVisitPlan> visits;
    std::vector<std::string> edge_path;  // connected; consecutive legs share endpoints
};

struct BusTripGeneration {
    std::vector<BusTripPlan> plans;
    std::vector<Diagnostic> diagnostics;  // block overlap warnings
};

/// Filter plus time filter; needs the trip->vehicle-type map already resolved.
struct TripSelection {
    DayType day = DayType::weekday;
    long start_s = 0;
    long end_s = 86400;
};

/// One plan per scheduled trip whose service matches the day type and whose
/// first departure falls inside [start_s, end_s). The edge path is the
/// free-flow shortest path through the stop sequence.
inline BusTripGeneration generate_bus_trips(const TransitSchedule& schedule,
                                            const std::map<std::string, PlacedStop>& placements,
                                            const RoadNetwork& net, const TripSelection& sel,
                                            const std::map<std::string, std::string>& trip_types) {
    BusTripGeneration out;
    for (const auto& [trip_id, trip] : schedule.trips) {
        if (!schedule.services.at(trip.service_id).matches(sel.day)) continue;
        const auto& visits = schedule.visits(trip_id);
        long first_dep = visits.front().departure_s;
        if (first_dep < sel.start_s || first_dep >= sel.end_s) continue;

        BusTripPlan plan;
        plan.trip_id = trip_id;
        plan.route_id = trip.route_id;
        plan.block_id = trip.block_id;
        plan.depart_s = first_dep;
        auto type_it = trip_types.find(trip_id);
        if (type_it == trip_types.end())
            throw ModelError("trip '" + trip_id + "' has no vehicle type assigned");
        plan.vehicle_type_id = type_it->second;

        for (const auto& v : visits) {
            auto p = placements.find(v.stop_id);
            if (p == placements.end())
                throw ModelError("trip '" + trip_id + "' visits unplaced stop '" + v.stop_id + "'");
            StopVisitPlan sv;
            sv.stop_id = v.stop_id;
            sv.edge_id = p->second.edge_id;
            sv.offset_m = p->second.offset_m;
            sv.scheduled_arrival_s = v.arrival_s;
            sv.scheduled_departure_s = v.departure_s;
            plan.visits.push_back(std::move(sv));
        }

        plan.edge_path.push_back(plan.visits.front().edge_id);
        plan.visits.front().path_index = 0;
        for (size_t i = 0; i + 1 < plan.visits.size(); ++i) {
            auto& from = plan.visits[i];
            auto& to = plan.visits[i + 1];
            if (from.edge_id == to.edge_id && to.offset_m >= from.offset_m) {
                to.path_index = from.path_index;
                continue;
            }
            std::optional<VehiclePath> leg;
            if (from.edge_id == to.edge_id)
                leg = shortest_cycle_through(net, from.edge_id);  // revisit same edge
            else
                leg = shortest_vehicle_path(net, from.edge_id, to.edge_id);
            if (!leg)
                throw ModelError("trip '" + trip_id + "': no path from stop '" + from.stop_id +
                                 "' (edge '" + from.edge_id + "') to stop '" + to.stop_id +
                                 "' (edge '" + to.edge_id + "')");
            for (size_t j = 1; j < leg->edges.size(); ++j) plan.edge_path.push_back(leg->edges[j]);
            to.path_index = (int)plan.edge_path.size() - 1;
        }
        out.plans.push_back(std::move(plan));
    }

    std::sort(out.plans.begin(), out.plans.end(), [](const BusTripPlan& a, const BusTripPlan& b) {
        return a.depart_s != b.depart_s ? a.depart_s < b.depart_s : a.trip_id < b.trip_id;
    });

    // Trips chained on one block must not overlap in scheduled time.
    std::map<std::string, std::vector<const BusTripPlan*>> by_block;
    for (const auto& p : out.plans)
        if (!p.block_id.empty()) by_block[p.block_id].push_back(&p);
    for (const auto& [block, plans] : by_block) {
        for (size_t i = 0; i + 1 < plans.size(); ++i) {
            long end_i = plans[i]->visits.back().scheduled_departure_s;
            long start_next = plans[i + 1]->visits.front().scheduled_arrival_s;
            if (start_next < end_i)
                out.diagnostics.push_back(
                    {Severity::warning, {}, {},
                     "block '" + block + "': trips '" + plans[i]->trip_id + "' and '" +
                         plans[i + 1]->trip_id + "' overlap in scheduled time"});
        }
    }
    return out;
}

} // namespace tsim
