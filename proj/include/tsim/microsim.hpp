#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/demand.hpp"
#include "tsim/gtfs.hpp"
#include "tsim/network.hpp"
#include "tsim/router.hpp"
#include "tsim/transit.hpp"
#include "tsim/vehicle.hpp"

namespace tsim {

// ---------------------------------------------------------------------------
// Output records
// ---------------------------------------------------------------------------

struct TrajectoryRecord {
    long t_s = 0;
    std::string vehicle_id;
    std::string type_id;
    std::string edge_id;
    double position_m = 0.0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
};

struct StopEvent {
    std::string trip_id;
    std::string stop_id;
    long arrival_s = 0;
    long departure_s = 0;
    int boarded = 0;
    int alighted = 0;
};

struct EdgeInterval {
    std::string edge_id;
    long t0 = 0;
    long t1 = 0;
    double mean_speed_mps = 0.0;
    double mean_density_veh_per_km = 0.0;
    double mean_occupancy = 0.0;
    long samples = 0;  // vehicle-seconds
};

struct PersonOutcome {
    std::string person_id;
    std::string status;  // completed | unfinished | unserved
    double depart_s = 0.0;
    std::optional<double> arrive_s;
};

struct SimulationOutputs {
    std::vector<TrajectoryRecord> trajectories;
    std::vector<StopEvent> stop_events;
    std::vector<EdgeInterval> edge_intervals;
    std::vector<PersonOutcome> person_outcomes;
    std::map<std::string, int> final_onboard;  // trip -> persons still aboard at removal/end
    // internal onboard count as each arrival was served, in stop order; lets
    // tests cross-check occupancy profiles reconstructed from stop events
    std::map<std::string, std::vector<int>> onboard_before_arrival;
    long gap_violations = 0;                    // per-tick follower gap checks (expect 0)
    long capacity_violations = 0;               // onboard > capacity events (expect 0)
};

// ---------------------------------------------------------------------------
// Car following
// ---------------------------------------------------------------------------

struct SimParams {
    double sigma = 0.5;          // Krauss dawdling factor
    double tau_s = 1.0;          // driver reaction time
    double door_time_s = 4.0;
    double board_time_s = 2.0;   // per boarding passenger
    double alight_time_s = 1.5;  // per alighting passenger
    bool record_background = true;
};

struct LeaderView {
    double speed_mps = 0.0;
    double net_gap_m = 0.0;  // bumper-to-bumper gap minus the follower's min gap
};

/// Krauss safe-speed update for one 1 s step:
///   v_safe = v_l + (g - v_l*tau) / (v/b + tau)
///   v_des  = min(v + a*dt, v_max, limit, v_safe)
///   v'     = max(0, v_des - sigma*a*dt*xi)
inline double krauss_next_speed(double speed, double accel, double decel, double max_speed,
                                double speed_limit, double sigma, double xi,
                                const std::optional<LeaderView>& leader, double dt = 1.0,
                                double tau_s = 1.0) {
    double v_des = std::min(speed + accel * dt, std::min(max_speed, speed_limit));
    if (leader) {
        double v_safe = leader->speed_mps + (leader->net_gap_m - leader->speed_mps * tau_s) /
                                                (speed / decel + tau_s);
        v_des = std::min(v_des, v_safe);
    }
    return std::max(0.0, v_des - sigma * accel * dt * xi);
}

/// Per-tick snapshot of one vehicle, as written to the trajectory stream.
struct VehicleState {
    std::string vehicle_id;
    std::string type_id;
    std::string edge_id;
    double position_m = 0.0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
    std::vector<std::string> onboard;  // buses only
};

/// Largest speed whose full-braking sequence (v, v-b, v-2b, ...) covers at
/// most gap_m meters, so a vehicle can halt exactly at a target point with
/// deceleration never exceeding b. Equals gap_m when gap_m <= b (lands on
/// the next step).
inline double max_stopping_speed(double gap_m, double decel, double dt = 1.0) {
    if (gap_m <= 0.0) return 0.0;
    double b = decel * dt;
    for (int n = 0;; ++n) {
        double v = gap_m / (double)(n + 1) + 0.5 * b * (double)n;
        if (v <= b * (double)(n + 1) + 1e-12) return v / dt;
    }
}

/// State-level wrapper over krauss_next_speed for two vehicles on the same
/// edge or with the leader on the immediately downstream edge.
inline double car_following_step(const VehicleState* leader, double leader_length_m,
                                 bool leader_downstream, double follower_edge_length_m,
                                 const VehicleState& follower, const VehicleType& type,
                                 double edge_speed_limit, double sigma, double xi,
                                 double dt = 1.0, double tau_s = 1.0) {
    std::optional<LeaderView> view;
    if (leader) {
        double bumper_gap = leader_downstream
                                ? (follower_edge_length_m - follower.position_m) +
                                      leader->position_m - leader_length_m
                                : leader->position_m - leader_length_m - follower.position_m;
        view = LeaderView{leader->speed_mps, bumper_gap - type.min_gap_m};
    }
    return krauss_next_speed(follower.speed_mps, type.accel_mps2, type.decel_mps2,
                             type.max_speed_mps, edge_speed_limit, sigma, xi, view, dt, tau_s);
}

/// Dwell needed for a passenger exchange, bounded below by the schedule.
inline double dwell_time(double scheduled_dwell_s, int boarded, int alighted,
                         const SimParams& params) {
    return std::max(scheduled_dwell_s, params.door_time_s + params.alight_time_s * alighted +
                                           params.board_time_s * boarded);
}

/// One-shot passenger exchange at stop arrival: everyone alighting leaves,
/// eligible waiting persons board FIFO until capacity, and the departure time
/// honors both the exchange dwell and the scheduled departure.
struct StopServiceResult {
    int boarded = 0;
    int alighted = 0;
    long departure_s = 0;
    std::vector<int> boarded_persons;
    std::vector<int> alighted_persons;
    std::vector<int> denied_persons;  // eligible but left behind by capacity
};

inline StopServiceResult service_stop(std::vector<int>& onboard, std::deque<int>& waiting,
                                      int capacity, long arrival_s, double scheduled_dwell_s,
                                      long scheduled_departure_s, const SimParams& params,
                                      const std::function<bool(int)>& alights_here,
                                      const std::function<bool(int)>& boards_this_trip) {
    StopServiceResult res;
    for (auto it = onboard.begin(); it != onboard.end();) {
        if (alights_here(*it)) {
            res.alighted_persons.push_back(*it);
            it = onboard.erase(it);
        } else {
            ++it;
        }
    }
    res.alighted = (int)res.alighted_persons.size();
    std::deque<int> keep;
    for (int person : waiting) {
        if (!boards_this_trip(person)) {
            keep.push_back(person);
        } else if ((int)onboard.size() < capacity) {
            onboard.push_back(person);
            res.boarded_persons.push_back(person);
        } else {
            res.denied_persons.push_back(person);
            keep.push_back(person);
        }
    }
    waiting = std::move(keep);
    res.boarded = (int)res.boarded_persons.size();
    double dwell = dwell_time(scheduled_dwell_s, res.boarded, res.alighted, params);
    res.departure_s =
        std::max(arrival_s + (long)std::ceil(dwell - 1e-9), scheduled_departure_s);
    return res;
}

// ---------------------------------------------------------------------------
// Edge aggregation
// ---------------------------------------------------------------------------

/// Geometry needed per vehicle type when aggregating, keyed by type id.
struct TypeGeometry {
    double length_m = 0.0;
    double min_gap_m = 0.0;
};

inline std::map<std::string, TypeGeometry> type_geometry(const VehicleCatalog& catalog) {
    std::map<std::string, TypeGeometry> out;
    for (const auto& [id, t] : catalog.types) out[id] = {t.length_m, t.min_gap_m};
    return out;
}

/// Aggregate the trajectory stream into per-edge interval measurements.
/// Pure over the records: re-running it on the written file reproduces the
/// engine's own values.
///
/// Per second and edge: occupancy = (sum of vehicle lengths + min gaps of all
/// but the front-most vehicle) / (edge length * lane count), clamped to 1.
/// Interval means divide by the seconds the interval overlaps the window.
inline std::vector<EdgeInterval> aggregate_edges(const std::vector<TrajectoryRecord>& records,
                                                 const RoadNetwork& net,
                                                 const std::map<std::string, TypeGeometry>& types,
                                                 long period_s, long window_start_s,
                                                 long window_end_s) {
    if (period_s < 1) throw ModelError("aggregation period must be >= 1 s");
    struct Acc {
        double speed_sum = 0.0;
        long vehicle_seconds = 0;
        double occupancy_sum = 0.0;  // summed per-second occupancy
    };
    // (edge index, interval index) -> accumulator
    std::map<std::pair<int, long>, Acc> acc;
    // group records by (t, edge) for the occupancy front-most rule
    struct SecondGroup {
        double len_gap_sum = 0.0;
        double front_pos = -1.0;
        std::string front_vehicle;
        double front_gap = 0.0;
        int count = 0;
        double speed_sum = 0.0;
    };
    std::map<std::pair<long, int>, SecondGroup> seconds;
    for (const auto& r : records) {
        int e = net.edge_idx(r.edge_id);
        if (e < 0) throw ModelError("trajectory references unknown edge '" + r.edge_id + "'");
        auto t_it = types.find(r.type_id);
        if (t_it == types.end())
            throw ModelError("trajectory references unknown vehicle type '" + r.type_id + "'");
        auto& g = seconds[{r.t_s, e}];
        g.len_gap_sum += t_it->second.length_m + t_it->second.min_gap_m;
        g.count += 1;
        g.speed_sum += r.speed_mps;
        bool is_front = g.front_vehicle.empty() || g.front_pos < r.position_m ||
                        (g.front_pos == r.position_m && r.vehicle_id < g.front_vehicle);
        if (is_front) {
            g.front_pos = r.position_m;
            g.front_vehicle = r.vehicle_id;
            g.front_gap = t_it->second.min_gap_m;
        }
    }
    for (const auto& [key, g] : seconds) {
        auto [t, e] = key;
        long k = (t - window_start_s) / period_s;
        const RoadEdge& edge = net.edges[(size_t)e];
        double occ = (g.len_gap_sum - g.front_gap) / (edge.length_m * edge.lane_count);
        if (occ > 1.0) occ = 1.0;
        auto& a = acc[{e, k}];
        a.speed_sum += g.speed_sum;
        a.vehicle_seconds += g.count;
        a.occupancy_sum += occ;
    }
    std::vector<EdgeInterval> out;
    for (const auto& [key, a] : acc) {
        auto [e, k] = key;
        const RoadEdge& edge = net.edges[(size_t)e];
        EdgeInterval iv;
        iv.edge_id = edge.id;
        iv.t0 = window_start_s + k * period_s;
        iv.t1 = iv.t0 + period_s;
        long covered = std::min(iv.t1, window_end_s) - iv.t0;
        if (covered < 1) covered = period_s;
        iv.samples = a.vehicle_seconds;
        iv.mean_speed_mps = a.speed_sum / (double)a.vehicle_seconds;
        iv.mean_density_veh_per_km =
            ((double)a.vehicle_seconds / (double)covered) / (edge.length_m / 1000.0);
        iv.mean_occupancy = a.occupancy_sum / (double)covered;
        out.push_back(std::move(iv));
    }
    std::sort(out.begin(), out.end(), [](const EdgeInterval& x, const EdgeInterval& y) {
        return x.edge_id != y.edge_id ? x.edge_id < y.edge_id : x.t0 < y.t0;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Simulation world
// ---------------------------------------------------------------------------

struct RoutedVehicleTrip {
    VehicleTrip trip;
    std::vector<std::string> path;  // origin..destination edges
};

struct PlannedPerson {
    std::string id;
    double depart_s = 0.0;
    JourneyResult journey;
};

struct SimWorld {
    const RoadNetwork* net = nullptr;
    const VehicleCatalog* catalog = nullptr;
    const TimetableIndex* timetable = nullptr;  // for boarding-denial replans
    std::vector<BusTripPlan> bus_plans;
    std::vector<RoutedVehicleTrip> background;
    std::vector<PlannedPerson> persons;
};

struct SimWindow {
    long start_s = 0;
    long end_s = 86400;
    long sampling_period_s = 3600;
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace detail {

class Simulation {
public:
    Simulation(const SimWindow& window, const SimWorld& world, uint64_t seed,
               const SimParams& params)
        : window_(window), world_(world), params_(params), seed_(seed) {
        net_ = world.net;
        build_vehicles();
        for (auto& v : vehicles_) v.rng_state = derive_seed(seed_, "veh|" + v.id);
        build_persons();
        for (size_t i = 0; i < persons_.size(); ++i)
            activations_.push({persons_[i].src->depart_s, (int)i});
        lanes_.resize(net_->edges.size());
        for (size_t e = 0; e < net_->edges.size(); ++e)
            lanes_[e].resize((size_t)net_->edges[e].lane_count);
        edge_order_ = net_->sorted_edge_order();
    }

    SimulationOutputs run() {
        for (long t = window_.start_s; t < window_.end_s; ++t) {
            insert_pending(t);
            process_person_events(t);
            bus_stop_lifecycle(t);
            record_tick(t);
            update_speeds(t);
            move_vehicles(t);
            check_gaps();
        }
        finish(window_.end_s);
        out_.edge_intervals =
            aggregate_edges(out_.trajectories, *net_, type_geometry(*world_.catalog),
                            window_.sampling_period_s, window_.start_s, window_.end_s);
        return std::move(out_);
    }

private:
    struct Veh {
        std::string id;
        const VehicleType* type = nullptr;
        std::vector<int> path;           // edge indices
        std::vector<double> path_prefix; // cumulative length before each path edge
        int path_pos = 0;
        double pos = 0.0;
        double speed = 0.0;
        double prev_speed = 0.0;
        int lane = 0;
        double depart_s = 0.0;
        bool active = false;
        bool done = false;
        bool is_bus = false;
        int bus = -1;
        // per-vehicle dawdle stream, stable under changes to the rest of the
        // world (same vehicle + same seed -> same draws)
        uint64_t rng_state = 0;
    };

    double draw_xi(Veh& v) {
        v.rng_state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = v.rng_state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return (double)(z >> 11) * 0x1.0p-53;
    }

    enum class BusPhase { driving, arrived, dwelling };

    struct BusRt {
        const BusTripPlan* plan = nullptr;
        size_t next_visit = 0;
        BusPhase phase = BusPhase::arrived;
        long arrival_t = 0;
        long departure_t = 0;
        int boarded_here = 0;
        int alighted_here = 0;
        std::vector<int> onboard;  // person indices
    };

    enum class PersonState { pending, walking, waiting, onboard, done };

    struct PersonRt {
        const PlannedPerson* src = nullptr;
        const PersonPlan* plan = nullptr;  // null when unserved
        size_t leg = 0;
        PersonState state = PersonState::pending;
        std::string board_stop, alight_stop, trip;
        long board_dep_s = 0;  // scheduled departure of the awaited trip at board stop
        double walk_end_s = 0.0;
        std::string status;
        std::optional<double> arrive_s;
    };

    // --- construction -----------------------------------------------------

    void build_vehicles() {
        for (const auto& plan : world_.bus_plans) {
            Veh v;
            v.id = plan.trip_id;
            v.type = &world_.catalog->at(plan.vehicle_type_id);
            for (const auto& eid : plan.edge_path) {
                int e = net_->edge_idx(eid);
                if (e < 0) throw ModelError("bus plan references unknown edge '" + eid + "'");
                v.path.push_back(e);
            }
            v.is_bus = true;
            v.bus = (int)buses_.size();
            v.depart_s = (double)std::max(plan.visits.front().scheduled_arrival_s, window_.start_s);
            finish_path(v);
            BusRt rt;
            rt.plan = &plan;
            buses_.push_back(rt);
            vehicles_.push_back(std::move(v));
        }
        for (const auto& bg : world_.background) {
            Veh v;
            v.id = bg.trip.id;
            v.type = &world_.catalog->at(demand_mode_name(bg.trip.mode));
            for (const auto& eid : bg.path) {
                int e = net_->edge_idx(eid);
                if (e < 0) throw ModelError("vehicle route references unknown edge '" + eid + "'");
                v.path.push_back(e);
            }
            v.depart_s = bg.trip.depart_s;
            finish_path(v);
            vehicles_.push_back(std::move(v));
        }
        pending_.resize(vehicles_.size());
        for (size_t i = 0; i < vehicles_.size(); ++i) pending_[i] = (int)i;
        std::sort(pending_.begin(), pending_.end(), [&](int a, int b) {
            const Veh& va = vehicles_[(size_t)a];
            const Veh& vb = vehicles_[(size_t)b];
            return va.depart_s != vb.depart_s ? va.depart_s < vb.depart_s : va.id < vb.id;
        });
    }

    void finish_path(Veh& v) {
        v.path_prefix.resize(v.path.size() + 1, 0.0);
        for (size_t i = 0; i < v.path.size(); ++i)
            v.path_prefix[i + 1] = v.path_prefix[i] + net_->edges[(size_t)v.path[i]].length_m;
    }

    void build_persons() {
        persons_.resize(world_.persons.size());
        for (size_t i = 0; i < world_.persons.size(); ++i) {
            persons_[i].src = &world_.persons[i];
            if (std::holds_alternative<PersonPlan>(world_.persons[i].journey))
                persons_[i].plan = &std::get<PersonPlan>(world_.persons[i].journey);
        }
    }

    // --- insertion ---------------------------------------------------------

    void insert_pending(long t) {
        std::vector<int> still;
        for (int idx : pending_) {
            Veh& v = vehicles_[(size_t)idx];
            if (v.depart_s > (double)t || !try_insert(idx, t)) still.push_back(idx);
        }
        pending_ = std::move(still);
    }

    bool try_insert(int idx, long t) {
        Veh& v = vehicles_[(size_t)idx];
        if (v.is_bus) {
            const BusTripPlan& plan = *buses_[(size_t)v.bus].plan;
            const auto& first = plan.visits.front();
            int e = v.path[(size_t)first.path_index];
            double pos = first.offset_m;
            int lane = find_insert_lane(e, pos, v.type->length_m);
            if (lane < 0) return false;
            place_vehicle(idx, (size_t)first.path_index, e, pos, lane);
            BusRt& rt = buses_[(size_t)v.bus];
            rt.phase = BusPhase::arrived;
            rt.arrival_t = t;
            rt.next_visit = 0;
            return true;
        }
        int e = v.path.front();
        double pos = v.type->length_m;
        const RoadEdge& edge = net_->edges[(size_t)e];
        if (pos > edge.length_m) return false;  // degenerate short edge
        int lane = find_entry_lane(e, v.type->length_m, v.type->min_gap_m);
        if (lane < 0) return false;
        place_vehicle(idx, 0, e, pos, lane);
        return true;
    }

    /// Lane where a body [pos-len, pos] fits with nonnegative bumper gaps.
    int find_insert_lane(int e, double pos, double len) {
        const auto& lanes = lanes_[(size_t)e];
        for (int l = 0; l < (int)lanes.size(); ++l) {
            bool ok = true;
            for (int other : lanes[(size_t)l]) {
                const Veh& o = vehicles_[(size_t)other];
                bool ahead = o.pos - o.type->length_m >= pos;   // fully ahead
                bool behind = o.pos <= pos - len;               // fully behind
                if (!ahead && !behind) { ok = false; break; }
            }
            if (ok) return l;
        }
        return -1;
    }

    /// Entry-cell rule: the first (length + min_gap) meters of the chosen
    /// lane must be free. Lane preference: fewest vehicles, then lowest index.
    int choose_entry_lane(int e) const {
        const auto& lanes = lanes_[(size_t)e];
        int best = 0;
        size_t best_n = lanes[0].size();
        for (int l = 1; l < (int)lanes.size(); ++l)
            if (lanes[(size_t)l].size() < best_n) {
                best = l;
                best_n = lanes[(size_t)l].size();
            }
        return best;
    }

    bool entry_cell_free(int e, int lane, double need_m) const {
        const auto& q = lanes_[(size_t)e][(size_t)lane];
        if (q.empty()) return true;
        const Veh& rear = vehicles_[(size_t)q.back()];
        return rear.pos - rear.type->length_m >= need_m;
    }

    int find_entry_lane(int e, double len, double min_gap) {
        int lane = choose_entry_lane(e);
        return entry_cell_free(e, lane, len + min_gap) ? lane : -1;
    }

    void place_vehicle(int idx, size_t path_pos, int e, double pos, int lane) {
        Veh& v = vehicles_[(size_t)idx];
        v.active = true;
        v.path_pos = (int)path_pos;
        v.pos = pos;
        v.speed = 0.0;
        v.prev_speed = 0.0;
        v.lane = lane;
        auto& q = lanes_[(size_t)e][(size_t)lane];
        auto it = q.begin();
        while (it != q.end() && vehicles_[(size_t)*it].pos >= pos) ++it;
        q.insert(it, idx);
    }

    // --- persons -------------------------------------------------------------

    void process_person_events(long t) {
        while (!activations_.empty() && activations_.top().first <= (double)t) {
            int p = activations_.top().second;
            activations_.pop();
            activate_person(p, t);
        }
        while (!walk_events_.empty() && walk_events_.top().first <= (double)t) {
            int p = walk_events_.top().second;
            walk_events_.pop();
            finish_walk(p, t);
        }
    }

    void activate_person(int p, long t) {
        PersonRt& pr = persons_[(size_t)p];
        if (!pr.plan) {
            pr.state = PersonState::done;
            pr.status = "unserved";
            return;
        }
        pr.leg = 0;
        start_leg(p, pr.src->depart_s, t);
    }

    /// Begin the person's current leg at time `now` (double-precision clock).
    void start_leg(int p, double now, long t) {
        PersonRt& pr = persons_[(size_t)p];
        if (pr.leg >= pr.plan->legs.size()) {
            pr.state = PersonState::done;
            pr.status = "completed";
            pr.arrive_s = now;
            return;
        }
        const PersonLeg& leg = pr.plan->legs[pr.leg];
        if (std::holds_alternative<WalkLeg>(leg)) {
            const auto& w = std::get<WalkLeg>(leg);
            pr.state = PersonState::walking;
            pr.walk_end_s = now + w.duration_s;
            walk_events_.push({pr.walk_end_s, p});
        } else {
            const auto& r = std::get<RideLeg>(leg);
            pr.state = PersonState::waiting;
            pr.trip = r.trip_id;
            pr.board_stop = r.board_stop;
            pr.alight_stop = r.alight_stop;
            pr.board_dep_s = r.scheduled_board_s;
            stop_queue_[r.board_stop].push_back(p);
        }
        (void)t;
    }

    void finish_walk(int p, long t) {
        PersonRt& pr = persons_[(size_t)p];
        pr.leg += 1;
        start_leg(p, pr.walk_end_s, t);
    }

    /// Boarding denied by capacity: aim for the next trip serving the same
    /// board/alight stop pair after the denied trip's scheduled departure.
    void replan_after_denial(int p) {
        PersonRt& pr = persons_[(size_t)p];
        if (!world_.timetable) return;
        const TimetableIndex& idx = *world_.timetable;
        long best_dep = -1;
        std::string best_trip;
        long best_alight = 0;
        for (const auto& [trip_id, visits] : idx.trips) {
            for (size_t i = 0; i + 1 < visits.size(); ++i) {
                if (visits[i].stop_id != pr.board_stop || !visits[i].boardable) continue;
                if (visits[i].departure_s <= pr.board_dep_s) continue;
                for (size_t j = i + 1; j < visits.size(); ++j) {
                    if (visits[j].stop_id == pr.alight_stop && visits[j].boardable) {
                        if (best_dep < 0 || visits[i].departure_s < best_dep ||
                            (visits[i].departure_s == best_dep && trip_id < best_trip)) {
                            best_dep = visits[i].departure_s;
                            best_trip = trip_id;
                            best_alight = visits[j].arrival_s;
                        }
                        break;
                    }
                }
            }
        }
        if (best_dep < 0) return;  // no later service; the person keeps waiting in vain
        pr.trip = best_trip;
        pr.board_dep_s = best_dep;
        (void)best_alight;
    }

    // --- bus stop lifecycle --------------------------------------------------

    void bus_stop_lifecycle(long t) {
        // 1) newly arrived buses open doors and run the exchange
        for (size_t b = 0; b < buses_.size(); ++b) {
            BusRt& rt = buses_[b];
            Veh& v = vehicles_[bus_vehicle_index(b)];
            if (!v.active || rt.phase != BusPhase::arrived) continue;
            serve_arrival((int)b, t);
        }
        // 2) late boarders join buses still standing with open doors
        for (size_t b = 0; b < buses_.size(); ++b) {
            BusRt& rt = buses_[b];
            Veh& v = vehicles_[bus_vehicle_index(b)];
            if (!v.active || rt.phase != BusPhase::dwelling) continue;
            late_boarding((int)b);
        }
        // 3) buses whose departure time has come close their doors
        for (size_t b = 0; b < buses_.size(); ++b) {
            BusRt& rt = buses_[b];
            Veh& v = vehicles_[bus_vehicle_index(b)];
            if (!v.active || rt.phase != BusPhase::dwelling) continue;
            if (t >= rt.departure_t) close_doors((int)b, t);
        }
    }

    size_t bus_vehicle_index(size_t b) const { return b; }  // buses are created first

    void serve_arrival(int b, long t) {
        BusRt& rt = buses_[(size_t)b];
        Veh& v = vehicles_[(size_t)b];
        const auto& visit = rt.plan->visits[rt.next_visit];
        rt.arrival_t = t;
        out_.onboard_before_arrival[rt.plan->trip_id].push_back((int)rt.onboard.size());
        auto& queue = stop_queue_[visit.stop_id];
        double scheduled_dwell =
            (double)(visit.scheduled_departure_s - visit.scheduled_arrival_s);
        auto res = service_stop(
            rt.onboard, queue, v.type->passenger_capacity, t, scheduled_dwell,
            visit.scheduled_departure_s, params_,
            [&](int p) {
                return persons_[(size_t)p].trip == rt.plan->trip_id &&
                       persons_[(size_t)p].alight_stop == visit.stop_id;
            },
            [&](int p) {
                return persons_[(size_t)p].trip == rt.plan->trip_id &&
                       persons_[(size_t)p].board_stop == visit.stop_id;
            });
        for (int p : res.alighted_persons) person_alighted(p, t);
        for (int p : res.boarded_persons) persons_[(size_t)p].state = PersonState::onboard;
        for (int p : res.denied_persons) replan_after_denial(p);
        if ((int)rt.onboard.size() > v.type->passenger_capacity) out_.capacity_violations++;
        rt.boarded_here = res.boarded;
        rt.alighted_here = res.alighted;
        rt.departure_t = res.departure_s;
        rt.phase = BusPhase::dwelling;
    }

    void late_boarding(int b) {
        BusRt& rt = buses_[(size_t)b];
        Veh& v = vehicles_[(size_t)b];
        const auto& visit = rt.plan->visits[rt.next_visit];
        auto it = stop_queue_.find(visit.stop_id);
        if (it == stop_queue_.end() || it->second.empty()) return;
        std::deque<int> keep;
        bool changed = false;
        for (int p : it->second) {
            PersonRt& pr = persons_[(size_t)p];
            bool eligible = pr.trip == rt.plan->trip_id && pr.board_stop == visit.stop_id &&
                            pr.state == PersonState::waiting;
            if (eligible && (int)rt.onboard.size() < v.type->passenger_capacity) {
                rt.onboard.push_back(p);
                pr.state = PersonState::onboard;
                rt.boarded_here += 1;
                changed = true;
            } else {
                if (eligible) replan_after_denial(p);
                keep.push_back(p);
            }
        }
        it->second = std::move(keep);
        if (changed) {
            double scheduled_dwell =
                (double)(visit.scheduled_departure_s - visit.scheduled_arrival_s);
            double dwell =
                dwell_time(scheduled_dwell, rt.boarded_here, rt.alighted_here, params_);
            long dep = std::max(rt.arrival_t + (long)std::ceil(dwell - 1e-9),
                                visit.scheduled_departure_s);
            rt.departure_t = std::max(rt.departure_t, dep);
        }
    }

    void close_doors(int b, long t) {
        BusRt& rt = buses_[(size_t)b];
        const auto& visit = rt.plan->visits[rt.next_visit];
        out_.stop_events.push_back({rt.plan->trip_id, visit.stop_id, rt.arrival_t, t,
                                    rt.boarded_here, rt.alighted_here});
        rt.boarded_here = 0;
        rt.alighted_here = 0;
        rt.next_visit += 1;
        if (rt.next_visit >= rt.plan->visits.size()) {
            remove_vehicle((int)b);
            out_.final_onboard[rt.plan->trip_id] = (int)rt.onboard.size();
            for (int p : rt.onboard) {
                PersonRt& pr = persons_[(size_t)p];
                pr.state = PersonState::done;
                pr.status = "unfinished";
            }
            rt.onboard.clear();
        } else {
            rt.phase = BusPhase::driving;
        }
    }

    void person_alighted(int p, long t) {
        PersonRt& pr = persons_[(size_t)p];
        pr.leg += 1;
        start_leg(p, (double)t, t);
    }

    // --- recording -------------------------------------------------------------

    void record_tick(long t) {
        for (size_t i = 0; i < vehicles_.size(); ++i) {
            Veh& v = vehicles_[i];
            if (!v.active) continue;
            if (!v.is_bus && !params_.record_background) continue;
            TrajectoryRecord r;
            r.t_s = t;
            r.vehicle_id = v.id;
            r.type_id = v.type->id;
            r.edge_id = net_->edges[(size_t)v.path[(size_t)v.path_pos]].id;
            r.position_m = v.pos;
            r.speed_mps = v.speed;
            r.accel_mps2 = v.speed - v.prev_speed;
            out_.trajectories.push_back(std::move(r));
        }
    }

    // --- dynamics --------------------------------------------------------------

    double abs_pos(const Veh& v) const { return v.path_prefix[(size_t)v.path_pos] + v.pos; }

    /// Distance along the remaining path to the bus's next stop.
    double gap_to_next_stop(const Veh& v, const BusRt& rt) const {
        const auto& visit = rt.plan->visits[rt.next_visit];
        double stop_abs = v.path_prefix[(size_t)visit.path_index] + visit.offset_m;
        return stop_abs - abs_pos(v);
    }

    void update_speeds(long t) {
        (void)t;
        old_speed_.resize(vehicles_.size());
        for (size_t i = 0; i < vehicles_.size(); ++i) old_speed_[i] = vehicles_[i].speed;

        for (int e : edge_order_) {
            const RoadEdge& edge = net_->edges[(size_t)e];
            for (size_t lane = 0; lane < lanes_[(size_t)e].size(); ++lane) {
                const auto& q = lanes_[(size_t)e][(size_t)lane];
                for (size_t i = 0; i < q.size(); ++i) {
                    int idx = q[i];
                    Veh& v = vehicles_[(size_t)idx];
                    v.prev_speed = v.speed;
                    if (v.is_bus && buses_[(size_t)v.bus].phase != BusPhase::driving) {
                        v.speed = 0.0;
                        continue;
                    }
                    double v_old = old_speed_[(size_t)idx];
                    std::optional<LeaderView> leader;
                    double hard_cap = std::numeric_limits<double>::infinity();
                    if (i > 0) {
                        const Veh& lead = vehicles_[(size_t)q[i - 1]];
                        double bumper = lead.pos - lead.type->length_m - v.pos;
                        leader = LeaderView{old_speed_[(size_t)q[i - 1]],
                                            bumper - v.type->min_gap_m};
                        // leader may be forced to halt at the edge end this tick
                        double lead_post = std::min(lead.pos + lead.speed,
                                                    std::max(edge.length_m, lead.pos));
                        hard_cap = std::min(hard_cap, lead_post - lead.type->length_m - v.pos);
                    } else if (!last_edge(v)) {
                        // stationary ghost at the rear bumper of the lane it would enter
                        int next_e = v.path[(size_t)v.path_pos + 1];
                        double beyond = rear_clear(next_e, choose_entry_lane(next_e));
                        double bumper = (edge.length_m - v.pos) + beyond;
                        std::optional<LeaderView> ghost =
                            LeaderView{0.0, bumper - v.type->min_gap_m};
                        double g1 = krauss_next_speed(v_old, v.type->accel_mps2,
                                                      v.type->decel_mps2, v.type->max_speed_mps,
                                                      edge.speed_limit_mps, 0.0, 0.0, ghost,
                                                      1.0, params_.tau_s);
                        hard_cap = std::min(hard_cap, std::max(g1, 0.0));
                        hard_cap = std::min(hard_cap, bumper);  // never beyond the ghost
                        // do not enter the next edge faster than it allows
                        double remaining = edge.length_m - v.pos;
                        double next_limit = net_->edges[(size_t)next_e].speed_limit_mps;
                        hard_cap = std::min(hard_cap, std::max(next_limit, remaining));
                    }
                    double xi = params_.sigma > 0.0 ? draw_xi(v) : 0.0;
                    double v_new =
                        krauss_next_speed(v_old, v.type->accel_mps2, v.type->decel_mps2,
                                          v.type->max_speed_mps, edge.speed_limit_mps,
                                          params_.sigma, xi, leader, 1.0, params_.tau_s);
                    if (v.is_bus) {
                        double gap_stop = std::max(0.0, gap_to_next_stop(v, buses_[(size_t)v.bus]));
                        v_new = std::min(v_new, max_stopping_speed(gap_stop, v.type->decel_mps2));
                        if (gap_stop <= v.type->decel_mps2) {
                            // final docking step: deterministic, lands exactly
                            double base = krauss_next_speed(
                                v_old, v.type->accel_mps2, v.type->decel_mps2,
                                v.type->max_speed_mps, edge.speed_limit_mps, 0.0, 0.0, leader,
                                1.0, params_.tau_s);
                            v_new = std::min(base, gap_stop);
                        }
                    }
                    v_new = std::min(v_new, hard_cap);
                    v.speed = std::max(0.0, v_new);
                }
            }
        }
    }

    bool last_edge(const Veh& v) const { return (size_t)v.path_pos + 1 >= v.path.size(); }

    /// Free meters from the start of edge e back to the rear-most body in lane.
    double rear_clear(int e, int lane) const {
        const auto& q = lanes_[(size_t)e][(size_t)lane];
        if (q.empty()) return net_->edges[(size_t)e].length_m + 100.0;  // unbounded
        const Veh& rear = vehicles_[(size_t)q.back()];
        return rear.pos - rear.type->length_m;
    }

    void move_vehicles(long t) {
        struct Crossing {
            int vehicle = 0;
            int from_edge = 0;
            int to_edge = 0;
            double leftover = 0.0;
        };
        std::map<int, std::vector<Crossing>> crossings;  // target edge -> candidates

        for (int e : edge_order_) {
            const RoadEdge& edge = net_->edges[(size_t)e];
            for (auto& q : lanes_[(size_t)e]) {
                for (int idx : q) {
                    Veh& v = vehicles_[(size_t)idx];
                    if (v.is_bus && buses_[(size_t)v.bus].phase != BusPhase::driving) continue;
                    double new_pos = v.pos + v.speed;
                    if (new_pos <= edge.length_m + 1e-12) {
                        v.pos = std::min(new_pos, edge.length_m);
                        continue;
                    }
                    // only the lane front can pass the edge end
                    if (last_edge(v)) {
                        v.pos = edge.length_m;  // removed below
                        exits_.push_back(idx);
                        continue;
                    }
                    crossings[v.path[(size_t)v.path_pos + 1]].push_back(
                        {idx, e, v.path[(size_t)v.path_pos + 1], new_pos - edge.length_m});
                }
            }
        }

        for (int idx : exits_) remove_background(idx);
        exits_.clear();

        for (auto& [target, cands] : crossings) {
            std::sort(cands.begin(), cands.end(), [&](const Crossing& a, const Crossing& b) {
                const std::string& ia = net_->edges[(size_t)a.from_edge].id;
                const std::string& ib = net_->edges[(size_t)b.from_edge].id;
                return ia != ib ? ia < ib : vehicles_[(size_t)a.vehicle].id <
                                                vehicles_[(size_t)b.vehicle].id;
            });
            // round-robin: start after the source granted last time
            std::string& cursor = junction_cursor_[target];
            size_t start = 0;
            if (!cursor.empty()) {
                while (start < cands.size() &&
                       net_->edges[(size_t)cands[start].from_edge].id <= cursor)
                    ++start;
                if (start >= cands.size()) start = 0;
            }
            for (size_t k = 0; k < cands.size(); ++k) {
                const Crossing& c = cands[(start + k) % cands.size()];
                Veh& v = vehicles_[(size_t)c.vehicle];
                double next_len = net_->edges[(size_t)c.to_edge].length_m;
                double leftover = std::min(c.leftover, next_len);
                int lane = choose_entry_lane(c.to_edge);
                double need = std::max(leftover + v.type->min_gap_m,
                                       v.type->length_m + v.type->min_gap_m);
                if (entry_cell_free(c.to_edge, lane, need)) {
                    // leave the old lane (vehicle is its lane front)
                    auto& oldq = lanes_[(size_t)c.from_edge][(size_t)v.lane];
                    oldq.erase(std::find(oldq.begin(), oldq.end(), c.vehicle));
                    v.path_pos += 1;
                    v.pos = leftover;
                    v.lane = lane;
                    lanes_[(size_t)c.to_edge][(size_t)lane].push_back(c.vehicle);
                    junction_cursor_[target] = net_->edges[(size_t)c.from_edge].id;
                } else {
                    const RoadEdge& from = net_->edges[(size_t)c.from_edge];
                    double travelled = from.length_m - v.pos;
                    v.speed = travelled;  // actual movement this tick
                    v.pos = from.length_m;
                }
            }
        }

        // bus landings: a driving bus standing exactly on its next stop
        for (size_t b = 0; b < buses_.size(); ++b) {
            BusRt& rt = buses_[b];
            Veh& v = vehicles_[b];
            if (!v.active || rt.phase != BusPhase::driving) continue;
            const auto& visit = rt.plan->visits[rt.next_visit];
            if (v.path_pos == visit.path_index && std::abs(v.pos - visit.offset_m) <= 1e-6) {
                v.pos = visit.offset_m;
                rt.phase = BusPhase::arrived;
                rt.arrival_t = t + 1;
            }
        }
    }

    void remove_background(int idx) {
        Veh& v = vehicles_[(size_t)idx];
        auto& q = lanes_[(size_t)v.path[(size_t)v.path_pos]][(size_t)v.lane];
        q.erase(std::find(q.begin(), q.end(), idx));
        v.active = false;
        v.done = true;
    }

    void remove_vehicle(int bus_idx) {
        Veh& v = vehicles_[(size_t)bus_idx];
        auto& q = lanes_[(size_t)v.path[(size_t)v.path_pos]][(size_t)v.lane];
        q.erase(std::find(q.begin(), q.end(), bus_idx));
        v.active = false;
        v.done = true;
    }

    void check_gaps() {
        for (int e : edge_order_) {
            for (const auto& q : lanes_[(size_t)e]) {
                for (size_t i = 1; i < q.size(); ++i) {
                    const Veh& lead = vehicles_[(size_t)q[i - 1]];
                    const Veh& fol = vehicles_[(size_t)q[i]];
                    if (lead.pos - lead.type->length_m - fol.pos < -1e-9)
                        out_.gap_violations++;
                }
            }
        }
    }

    // --- teardown ---------------------------------------------------------------

    void finish(long end_s) {
        // flush buses still mid-dwell so stop events stay conservation-complete
        for (size_t b = 0; b < buses_.size(); ++b) {
            BusRt& rt = buses_[b];
            Veh& v = vehicles_[b];
            if (!v.active) continue;
            if (rt.phase == BusPhase::dwelling || rt.phase == BusPhase::arrived) {
                const auto& visit = rt.plan->visits[rt.next_visit];
                long arrival = rt.phase == BusPhase::arrived ? end_s : rt.arrival_t;
                out_.stop_events.push_back({rt.plan->trip_id, visit.stop_id, arrival, end_s,
                                            rt.boarded_here, rt.alighted_here});
            }
            out_.final_onboard[rt.plan->trip_id] = (int)rt.onboard.size();
        }
        for (auto& pr : persons_) {
            PersonOutcome o;
            o.person_id = pr.src->id;
            o.depart_s = pr.src->depart_s;
            if (pr.state == PersonState::done && pr.status == "completed") {
                o.status = "completed";
                o.arrive_s = pr.arrive_s;
            } else if (pr.state == PersonState::done && pr.status == "unserved") {
                o.status = "unserved";
            } else if (pr.state == PersonState::pending) {
                o.status = pr.plan ? "unfinished" : "unserved";
            } else {
                o.status = "unfinished";
            }
            out_.person_outcomes.push_back(std::move(o));
        }
    }

    SimWindow window_;
    const SimWorld& world_;
    SimParams params_;
    uint64_t seed_ = 0;
    const RoadNetwork* net_ = nullptr;

    std::vector<Veh> vehicles_;
    std::vector<BusRt> buses_;
    std::vector<PersonRt> persons_;
    std::vector<int> pending_;
    std::vector<std::vector<std::deque<int>>> lanes_;  // edge -> lane -> vehicle idx, front first
    std::vector<int> edge_order_;
    std::vector<double> old_speed_;
    std::vector<int> exits_;
    std::map<std::string, std::deque<int>> stop_queue_;
    std::map<int, std::string> junction_cursor_;

    using Event = std::pair<double, int>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> activations_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> walk_events_;

    SimulationOutputs out_;
};

} // namespace detail

/// Deterministic 1 s step simulation of the whole world. Identical inputs and
/// seed produce identical output streams.
inline SimulationOutputs run_simulation(const SimWindow& window, const SimWorld& world,
                                        uint64_t seed, const SimParams& params = {}) {
    if (!world.net || !world.catalog) throw ModelError("simulation world is missing resources");
    detail::Simulation sim(window, world, seed, params);
    return sim.run();
}

} // namespace tsim
