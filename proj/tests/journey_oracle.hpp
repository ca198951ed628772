#pragma once

// Brute-force earliest-arrival enumeration used to pin down the journey
// planner: all (access walk, up to K rides with at most one footpath between
// consecutive rides, egress walk) combinations plus the direct walk. Kept
// deliberately independent of the planner's layered relaxation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsim/gtfs.hpp"
#include "tsim/router.hpp"

namespace journey_oracle {

struct Candidate {
    double arrival = 0.0;
    int rides = 0;
    std::vector<std::string> trips;
    std::string last_stop;

    bool better_than(const Candidate& o) const {
        if (arrival != o.arrival) return arrival < o.arrival;
        if (rides != o.rides) return rides < o.rides;
        if (trips != o.trips) return trips < o.trips;
        return last_stop < o.last_stop;
    }
};

struct Oracle {
    const tsim::TimetableIndex* index;
    tsim::Point origin, destination;
    double depart = 0.0;
    double walk_speed = 1.4;
    int max_rides = 3;
    std::optional<Candidate> best;

    void consider(const Candidate& c) {
        if (!best || c.better_than(*best)) best = c;
    }

    double walk_s(tsim::Point a, tsim::Point b) const {
        return tsim::distance(a, b) / walk_speed;
    }

    // dominance memo keyed by (stop, rides used): earliest readiness seen
    std::map<std::pair<std::string, int>, double> best_ready;

    void explore(const std::string& stop, double ready, int rides,
                 std::vector<std::string>& trips) {
        if (rides >= max_rides) return;
        if (best && ready > best->arrival) return;
        auto key = std::make_pair(stop, rides);
        auto seen = best_ready.find(key);
        if (seen != best_ready.end() && seen->second <= ready) return;
        best_ready[key] = ready;
        for (const auto& [trip_id, visits] : index->trips) {
            for (size_t i = 0; i + 1 < visits.size(); ++i) {
                if (visits[i].stop_id != stop || !visits[i].boardable) continue;
                if ((double)visits[i].departure_s < ready) continue;
                for (size_t j = i + 1; j < visits.size(); ++j) {
                    if (!visits[j].boardable) continue;
                    trips.push_back(trip_id);
                    const std::string& here = visits[j].stop_id;
                    double now = (double)visits[j].arrival_s;
                    double egress = tsim::distance(index->stop_coords.at(here), destination);
                    if (egress <= index->max_walk_m)
                        consider({now + egress / walk_speed, rides + 1, trips, here});
                    // wait here for another trip
                    explore(here, now, rides + 1, trips);
                    // or take one footpath to a different stop
                    for (const auto& [other, coord] : index->stop_coords) {
                        if (other == here) continue;
                        double d = tsim::distance(index->stop_coords.at(here), coord);
                        if (d > index->max_walk_m) continue;
                        explore(other, now + d / walk_speed, rides + 1, trips);
                    }
                    trips.pop_back();
                }
            }
        }
    }

    std::optional<Candidate> run() {
        double direct = tsim::distance(origin, destination);
        if (direct <= index->max_walk_m)
            consider({depart + direct / walk_speed, 0, {}, ""});
        std::vector<std::string> trips;
        for (const auto& [stop, coord] : index->stop_coords) {
            double d = tsim::distance(origin, coord);
            if (d > index->max_walk_m) continue;
            explore(stop, depart + d / walk_speed, 0, trips);
        }
        return best;
    }
};

/// Build a miniature schedule: trips as (trip id, visits (stop, arr, dep)),
/// stops as (id, x, y). Everything runs on both day types.
inline tsim::TransitSchedule make_schedule(
    const std::vector<std::pair<std::string,
                                std::vector<std::tuple<std::string, long, long>>>>& trips,
    const std::vector<std::tuple<std::string, double, double>>& stops) {
    tsim::TransitSchedule sched;
    tsim::GtfsService svc;
    svc.id = "S";
    svc.weekday = true;
    svc.weekend = true;
    sched.services["S"] = svc;
    sched.routes["r"] = {"r", "r"};
    for (const auto& [id, x, y] : stops) sched.stops[id] = {id, id, {x, y}};
    for (const auto& [trip_id, visits] : trips) {
        sched.trips[trip_id] = {trip_id, "r", "", "S"};
        std::vector<tsim::StopTime> sts;
        for (const auto& [stop, arr, dep] : visits) sts.push_back({stop, arr, dep});
        sched.stop_times[trip_id] = sts;
    }
    return sched;
}

} // namespace journey_oracle
