#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/microsim.hpp"

namespace tsim {

// ---------------------------------------------------------------------------
// Occupancy
// ---------------------------------------------------------------------------

struct OccupancyProfile {
    std::string trip_id;
    std::string route_id;
    std::vector<std::string> stops;           // visit order
    std::vector<int> onboard_before_arrival;  // one entry per stop, in visit order
};

/// Onboard count immediately before each arrival: running sum of
/// boarded - alighted over the trip's stop events in order.
inline std::vector<OccupancyProfile> occupancy_by_trip(
    const std::vector<StopEvent>& events,
    const std::map<std::string, std::string>& trip_routes = {}) {
    std::map<std::string, std::vector<const StopEvent*>> by_trip;
    for (const auto& e : events) by_trip[e.trip_id].push_back(&e);
    std::vector<OccupancyProfile> out;
    for (const auto& [trip, list] : by_trip) {
        if (list.size() < 2)
            throw ModelError("trip '" + trip + "' has fewer than 2 stop visits");
        long prev_arrival = -1;
        OccupancyProfile profile;
        profile.trip_id = trip;
        auto route = trip_routes.find(trip);
        if (route != trip_routes.end()) profile.route_id = route->second;
        int onboard = 0;
        for (const StopEvent* e : list) {
            if (e->arrival_s < prev_arrival)
                throw ModelError("trip '" + trip + "' has stop events out of stop order");
            prev_arrival = e->arrival_s;
            profile.stops.push_back(e->stop_id);
            profile.onboard_before_arrival.push_back(onboard);
            onboard += e->boarded - e->alighted;
        }
        out.push_back(std::move(profile));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Speed distributions
// ---------------------------------------------------------------------------

struct SpeedSummary {
    std::string route_id;
    int hour = 0;
    long samples = 0;
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantile over a sorted sample (the common
/// "type 7" definition). p in [0,1].
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw ModelError("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double h = p * (double)(sorted.size() - 1);
    size_t lo = (size_t)h;
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - (double)lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Per-hour speed distribution of buses, optionally restricted to one route.
/// trip_routes maps bus vehicle ids (= trip ids) to routes; vehicles absent
/// from the map (background traffic) are ignored.
inline std::vector<SpeedSummary> speed_stats(const std::vector<TrajectoryRecord>& records,
                                             const std::map<std::string, std::string>& trip_routes,
                                             const std::optional<std::string>& route_filter,
                                             const std::vector<int>& hours) {
    std::map<std::pair<std::string, int>, std::vector<double>> samples;
    for (const auto& r : records) {
        auto route = trip_routes.find(r.vehicle_id);
        if (route == trip_routes.end()) continue;
        if (route_filter && route->second != *route_filter) continue;
        int hour = (int)(r.t_s / 3600);
        if (!hours.empty() && std::find(hours.begin(), hours.end(), hour) == hours.end())
            continue;
        samples[{route->second, hour}].push_back(r.speed_mps);
    }
    std::vector<SpeedSummary> out;
    for (auto& [key, values] : samples) {
        std::sort(values.begin(), values.end());
        SpeedSummary s;
        s.route_id = key.first;
        s.hour = key.second;
        s.samples = (long)values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / (double)values.size();
        s.q1 = quantile_sorted(values, 0.25);
        s.median = quantile_sorted(values, 0.5);
        s.q3 = quantile_sorted(values, 0.75);
        s.min = values.front();
        s.max = values.back();
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Route rollups
// ---------------------------------------------------------------------------

struct RouteSummary {
    std::string route_id;
    std::map<std::string, int> max_occupancy_by_trip;  // peak onboard per trip
    long total_boarded = 0;
    long total_alighted = 0;
};

/// Per-route peak occupancy and exchange totals, derived from stop events.
inline std::vector<RouteSummary> route_summaries(
    const std::vector<StopEvent>& events, const std::map<std::string, std::string>& trip_routes) {
    auto profiles = occupancy_by_trip(events, trip_routes);
    std::map<std::string, RouteSummary> by_route;
    for (const auto& p : profiles) {
        auto& summary = by_route[p.route_id];
        summary.route_id = p.route_id;
        int peak = 0;
        for (int n : p.onboard_before_arrival) peak = std::max(peak, n);
        summary.max_occupancy_by_trip[p.trip_id] = peak;
    }
    for (const auto& e : events) {
        auto route = trip_routes.find(e.trip_id);
        if (route == trip_routes.end()) continue;
        auto& summary = by_route[route->second];
        summary.total_boarded += e.boarded;
        summary.total_alighted += e.alighted;
    }
    std::vector<RouteSummary> out;
    for (auto& [route, summary] : by_route) out.push_back(std::move(summary));
    return out;
}

// ---------------------------------------------------------------------------
// Boarding / alighting totals
// ---------------------------------------------------------------------------

struct BoardingTotals {
    std::string route_id;
    std::string trip_id;  // empty for the per-route rollup row
    long boarded = 0;
    long alighted = 0;
};

/// Per-trip sums rolled up per route. Route rollups have an empty trip id.
inline std::vector<BoardingTotals> boarding_alighting_totals(
    const std::vector<StopEvent>& events, const std::map<std::string, std::string>& trip_routes) {
    std::map<std::string, std::pair<long, long>> per_trip;
    for (const auto& e : events) {
        auto& acc = per_trip[e.trip_id];
        acc.first += e.boarded;
        acc.second += e.alighted;
    }
    std::map<std::string, std::pair<long, long>> per_route;
    std::vector<BoardingTotals> out;
    for (const auto& [trip, acc] : per_trip) {
        auto route = trip_routes.find(trip);
        std::string route_id = route != trip_routes.end() ? route->second : std::string();
        out.push_back({route_id, trip, acc.first, acc.second});
        auto& racc = per_route[route_id];
        racc.first += acc.first;
        racc.second += acc.second;
    }
    for (const auto& [route, acc] : per_route)
        out.push_back({route, "", acc.first, acc.second});
    std::sort(out.begin(), out.end(), [](const BoardingTotals& a, const BoardingTotals& b) {
        if (a.route_id != b.route_id) return a.route_id < b.route_id;
        return a.trip_id < b.trip_id;
    });
    return out;
}

} // namespace tsim
