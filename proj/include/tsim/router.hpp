#pragma once

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/geometry.hpp"
#include "tsim/gtfs.hpp"
#include "tsim/network.hpp"

#include <nlohmann/json.hpp>

namespace tsim {

// ---------------------------------------------------------------------------
// Vehicle routing
// ---------------------------------------------------------------------------

struct VehiclePath {
    std::vector<std::string> edges;  // includes origin and destination edges
    double duration_s = 0.0;         // free-flow time over all edges
};

namespace detail {

struct PathLabel {
    double cost = 0.0;
    std::vector<int> edges;
};

/// true when a is a better label than b: cheaper, or equal cost with the
/// lexicographically smaller edge-id sequence.
inline bool label_less(const PathLabel& a, const PathLabel& b, const RoadNetwork& net) {
    if (a.cost != b.cost) return a.cost < b.cost;
    size_t n = std::min(a.edges.size(), b.edges.size());
    for (size_t i = 0; i < n; ++i) {
        const std::string& ia = net.edges[(size_t)a.edges[i]].id;
        const std::string& ib = net.edges[(size_t)b.edges[i]].id;
        if (ia != ib) return ia < ib;
    }
    return a.edges.size() < b.edges.size();
}

inline std::optional<PathLabel> dijkstra_edges(const RoadNetwork& net, int from, int to) {
    auto cmp = [&](const PathLabel& a, const PathLabel& b) { return label_less(b, a, net); };
    std::priority_queue<PathLabel, std::vector<PathLabel>, decltype(cmp)> queue(cmp);
    std::vector<bool> settled(net.edges.size(), false);
    queue.push({net.free_flow_time(from), {from}});
    while (!queue.empty()) {
        PathLabel cur = queue.top();
        queue.pop();
        int e = cur.edges.back();
        if (settled[(size_t)e]) continue;
        settled[(size_t)e] = true;
        if (e == to) return cur;
        for (int next : net.out_edges[(size_t)net.edges[(size_t)e].to_node]) {
            if (settled[(size_t)next]) continue;
            PathLabel ext = cur;
            ext.cost += net.free_flow_time(next);
            ext.edges.push_back(next);
            queue.push(std::move(ext));
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Minimum free-flow-time edge path; equal-cost alternatives resolve to the
/// lexicographically smallest edge-id sequence. Returns nullopt when the
/// destination is unreachable.
inline std::optional<VehiclePath> shortest_vehicle_path(const RoadNetwork& net,
                                                        const std::string& from_edge,
                                                        const std::string& to_edge) {
    int from = net.edge_idx(from_edge);
    int to = net.edge_idx(to_edge);
    if (from < 0) throw ModelError("unknown edge '" + from_edge + "'");
    if (to < 0) throw ModelError("unknown edge '" + to_edge + "'");
    auto label = detail::dijkstra_edges(net, from, to);
    if (!label) return std::nullopt;
    VehiclePath path;
    path.duration_s = label->cost;
    for (int e : label->edges) path.edges.push_back(net.edges[(size_t)e].id);
    return path;
}

/// Cheapest cycle that leaves the edge and returns to it; used when a trip
/// must serve a second point further back on an edge it already covered.
inline std::optional<VehiclePath> shortest_cycle_through(const RoadNetwork& net,
                                                         const std::string& edge_id) {
    int e = net.edge_idx(edge_id);
    if (e < 0) throw ModelError("unknown edge '" + edge_id + "'");
    std::optional<detail::PathLabel> best;
    for (int succ : net.out_edges[(size_t)net.edges[(size_t)e].to_node]) {
        auto lbl = detail::dijkstra_edges(net, succ, e);
        if (lbl && (!best || detail::label_less(*lbl, *best, net))) best = lbl;
    }
    if (!best) return std::nullopt;
    VehiclePath path;
    path.duration_s = net.free_flow_time(e) + best->cost;
    path.edges.push_back(edge_id);
    for (int x : best->edges) path.edges.push_back(net.edges[(size_t)x].id);
    return path;
}

// ---------------------------------------------------------------------------
// Timetable index
// ---------------------------------------------------------------------------

struct Connection {
    std::string trip_id;
    std::string from_stop;
    std::string to_stop;
    long dep_s = 0;
    long arr_s = 0;
};

struct TripStopVisit {
    std::string stop_id;
    long arrival_s = 0;
    long departure_s = 0;
    bool boardable = false;  // stop is placed on the network
};

/// Scheduled connections for one day type plus footpaths between stops
/// within walking radius. Immutable after build.
class TimetableIndex {
public:
    std::vector<Connection> connections;                       // sorted by dep_s
    std::map<std::string, std::vector<TripStopVisit>> trips;   // day-type filtered
    std::map<std::string, Point> stop_coords;                  // boardable stops
    std::map<std::string, std::vector<std::pair<std::string, double>>> footpaths;
    double max_walk_m = 800.0;
};

/// Builds the index over trips whose service runs on `day`. `boardable`
/// restricts where journeys may board/alight (stops placed on the network).
inline TimetableIndex build_timetable_index(const TransitSchedule& schedule,
                                            const std::set<std::string>& boardable, DayType day,
                                            double max_walk_m = 800.0) {
    TimetableIndex index;
    index.max_walk_m = max_walk_m;
    for (const auto& [trip_id, trip] : schedule.trips) {
        if (!schedule.services.at(trip.service_id).matches(day)) continue;
        const auto& visits = schedule.visits(trip_id);
        std::vector<TripStopVisit> seq;
        for (const auto& v : visits)
            seq.push_back({v.stop_id, v.arrival_s, v.departure_s, boardable.count(v.stop_id) > 0});
        for (size_t i = 0; i + 1 < seq.size(); ++i) {
            if (seq[i].departure_s >= seq[i + 1].arrival_s)
                throw ModelError("trip '" + trip_id + "': nonpositive travel time between '" +
                                 seq[i].stop_id + "' and '" + seq[i + 1].stop_id + "'");
            index.connections.push_back({trip_id, seq[i].stop_id, seq[i + 1].stop_id,
                                         seq[i].departure_s, seq[i + 1].arrival_s});
        }
        index.trips[trip_id] = std::move(seq);
    }
    std::sort(index.connections.begin(), index.connections.end(),
              [](const Connection& a, const Connection& b) {
                  return a.dep_s != b.dep_s ? a.dep_s < b.dep_s : a.trip_id < b.trip_id;
              });
    for (const auto& [stop_id, stop] : schedule.stops)
        if (boardable.count(stop_id)) index.stop_coords[stop_id] = stop.coord;
    for (const auto& [sa, ca] : index.stop_coords)
        for (const auto& [sb, cb] : index.stop_coords) {
            if (sa == sb) continue;
            double d = distance(ca, cb);
            if (d <= max_walk_m) index.footpaths[sb].emplace_back(sa, d);  // sa -> sb
        }
    return index;
}

// ---------------------------------------------------------------------------
// Person journeys
// ---------------------------------------------------------------------------

struct WalkLeg {
    Point from;
    Point to;
    double distance_m = 0.0;
    double duration_s = 0.0;
};

struct RideLeg {
    std::string trip_id;
    std::string board_stop;
    std::string alight_stop;
    long scheduled_board_s = 0;
    long scheduled_alight_s = 0;
};

using PersonLeg = std::variant<WalkLeg, RideLeg>;

struct PersonPlan {
    std::string person_id;
    std::vector<PersonLeg> legs;
    double scheduled_arrival_s = 0.0;
    int rides = 0;
};

struct Unserved {
    std::string reason;
};

using JourneyResult = std::variant<PersonPlan, Unserved>;

inline nlohmann::json to_json(const PersonPlan& plan) {
    nlohmann::json legs = nlohmann::json::array();
    for (const auto& leg : plan.legs) {
        if (std::holds_alternative<WalkLeg>(leg)) {
            const auto& w = std::get<WalkLeg>(leg);
            legs.push_back({{"kind", "walk"},
                            {"from", {w.from.x, w.from.y}},
                            {"to", {w.to.x, w.to.y}},
                            {"distance_m", w.distance_m},
                            {"duration_s", w.duration_s}});
        } else {
            const auto& r = std::get<RideLeg>(leg);
            legs.push_back({{"kind", "ride"},
                            {"trip", r.trip_id},
                            {"board", r.board_stop},
                            {"alight", r.alight_stop},
                            {"board_s", r.scheduled_board_s},
                            {"alight_s", r.scheduled_alight_s}});
        }
    }
    return {{"person", plan.person_id},
            {"legs", legs},
            {"arrival_s", plan.scheduled_arrival_s},
            {"rides", plan.rides}};
}

namespace detail {

struct JourneyLabel {
    double time = 0.0;
    std::vector<std::string> trip_seq;
    bool reached = false;
    // provenance for reconstruction
    std::string via_trip;       // afterRide: trip ridden into this stop
    std::string via_board_stop; // afterRide: where that trip was boarded
    int via_board_idx = -1;
    int via_alight_idx = -1;
    std::string via_from_stop;  // beforeBoard: footpath source (empty = none)
};

inline bool journey_label_better(const JourneyLabel& a, const JourneyLabel& b) {
    if (!b.reached) return a.reached;
    if (!a.reached) return false;
    if (a.time != b.time) return a.time < b.time;
    return a.trip_seq < b.trip_seq;
}

} // namespace detail

/// Earliest-arrival journey over the scheduled timetable: an access walk, up
/// to max_rides ride legs with at most one footpath between consecutive
/// rides, and an egress walk; a direct walk competes when within range. Ties
/// resolve to fewer rides, then the lexicographically smaller trip-id
/// sequence. Returns Unserved when no journey exists.
inline JourneyResult plan_person_journey(const TimetableIndex& index, const std::string& person_id,
                                         Point origin, Point destination, double depart_s,
                                         double walk_speed_mps = 1.4, int max_rides = 3) {
    using detail::JourneyLabel;
    const double max_walk = index.max_walk_m;

    // before_board[k][stop]: ready to board ride k+1 at stop having used k rides
    // after_ride[k][stop]: just alighted from ride k at stop
    std::vector<std::map<std::string, JourneyLabel>> before_board((size_t)max_rides + 1);
    std::vector<std::map<std::string, JourneyLabel>> after_ride((size_t)max_rides + 1);

    for (const auto& [stop_id, coord] : index.stop_coords) {
        double d = distance(origin, coord);
        if (d > max_walk) continue;
        JourneyLabel lbl;
        lbl.reached = true;
        lbl.time = depart_s + d / walk_speed_mps;
        before_board[0][stop_id] = lbl;
    }

    for (int k = 1; k <= max_rides; ++k) {
        for (const auto& [trip_id, visits] : index.trips) {
            for (size_t i = 0; i + 1 < visits.size(); ++i) {
                if (!visits[i].boardable) continue;
                auto ready_it = before_board[(size_t)k - 1].find(visits[i].stop_id);
                if (ready_it == before_board[(size_t)k - 1].end() || !ready_it->second.reached)
                    continue;
                if (ready_it->second.time > (double)visits[i].departure_s) continue;
                for (size_t j = i + 1; j < visits.size(); ++j) {
                    if (!visits[j].boardable) continue;
                    JourneyLabel cand;
                    cand.reached = true;
                    cand.time = (double)visits[j].arrival_s;
                    cand.trip_seq = ready_it->second.trip_seq;
                    cand.trip_seq.push_back(trip_id);
                    cand.via_trip = trip_id;
                    cand.via_board_stop = visits[i].stop_id;
                    cand.via_board_idx = (int)i;
                    cand.via_alight_idx = (int)j;
                    auto& slot = after_ride[(size_t)k][visits[j].stop_id];
                    if (journey_label_better(cand, slot)) slot = std::move(cand);
                }
            }
        }
        for (const auto& [stop_id, lbl] : after_ride[(size_t)k]) {
            auto& same = before_board[(size_t)k][stop_id];
            JourneyLabel stay = lbl;
            stay.via_from_stop.clear();
            if (journey_label_better(stay, same)) same = std::move(stay);
        }
        for (const auto& [to_stop, sources] : index.footpaths) {
            for (const auto& [from_stop, dist_m] : sources) {
                auto it = after_ride[(size_t)k].find(from_stop);
                if (it == after_ride[(size_t)k].end() || !it->second.reached) continue;
                JourneyLabel cand = it->second;
                cand.time += dist_m / walk_speed_mps;
                cand.via_from_stop = from_stop;
                auto& slot = before_board[(size_t)k][to_stop];
                if (journey_label_better(cand, slot)) slot = std::move(cand);
            }
        }
    }

    // Candidate journeys: bus journeys with egress walk, plus the direct walk.
    struct Final {
        double arrival = 0.0;
        int rides = 0;
        std::vector<std::string> trip_seq;
        std::string last_stop;
        bool valid = false;
    };
    Final best;
    auto consider = [&](const Final& f) {
        if (!f.valid) return;
        if (!best.valid) { best = f; return; }
        if (f.arrival != best.arrival) { if (f.arrival < best.arrival) best = f; return; }
        if (f.rides != best.rides) { if (f.rides < best.rides) best = f; return; }
        if (f.trip_seq != best.trip_seq) { if (f.trip_seq < best.trip_seq) best = f; return; }
        if (f.last_stop < best.last_stop) best = f;
    };

    double direct_dist = distance(origin, destination);
    if (direct_dist <= max_walk) {
        Final f;
        f.valid = true;
        f.arrival = depart_s + direct_dist / walk_speed_mps;
        f.rides = 0;
        consider(f);
    }
    for (int k = 1; k <= max_rides; ++k) {
        for (const auto& [stop_id, lbl] : after_ride[(size_t)k]) {
            if (!lbl.reached) continue;
            double d = distance(index.stop_coords.at(stop_id), destination);
            if (d > max_walk) continue;
            Final f;
            f.valid = true;
            f.arrival = lbl.time + d / walk_speed_mps;
            f.rides = k;
            f.trip_seq = lbl.trip_seq;
            f.last_stop = stop_id;
            consider(f);
        }
    }

    if (!best.valid) return Unserved{"no_journey"};

    PersonPlan plan;
    plan.person_id = person_id;
    plan.scheduled_arrival_s = best.arrival;
    plan.rides = best.rides;
    if (best.rides == 0) {
        plan.legs.push_back(WalkLeg{origin, destination, direct_dist,
                                    direct_dist / walk_speed_mps});
        return plan;
    }

    // Walk the labels backwards, then emit legs in forward order.
    std::vector<PersonLeg> reversed;
    {
        Point dest_stop_coord = index.stop_coords.at(best.last_stop);
        double d = distance(dest_stop_coord, destination);
        reversed.push_back(WalkLeg{dest_stop_coord, destination, d, d / walk_speed_mps});
    }
    std::string stop = best.last_stop;
    for (int k = best.rides; k >= 1; --k) {
        const JourneyLabel& ride = after_ride[(size_t)k].at(stop);
        const auto& visits = index.trips.at(ride.via_trip);
        reversed.push_back(RideLeg{ride.via_trip, ride.via_board_stop, stop,
                                   visits[(size_t)ride.via_board_idx].departure_s,
                                   visits[(size_t)ride.via_alight_idx].arrival_s});
        const JourneyLabel& ready = before_board[(size_t)k - 1].at(ride.via_board_stop);
        if (k == 1) {
            Point board_coord = index.stop_coords.at(ride.via_board_stop);
            double d = distance(origin, board_coord);
            reversed.push_back(WalkLeg{origin, board_coord, d, d / walk_speed_mps});
        } else if (!ready.via_from_stop.empty()) {
            Point from = index.stop_coords.at(ready.via_from_stop);
            Point to = index.stop_coords.at(ride.via_board_stop);
            double d = distance(from, to);
            reversed.push_back(WalkLeg{from, to, d, d / walk_speed_mps});
            stop = ready.via_from_stop;
        } else {
            stop = ride.via_board_stop;
        }
    }
    plan.legs.assign(reversed.rbegin(), reversed.rend());
    return plan;
}

} // namespace tsim
