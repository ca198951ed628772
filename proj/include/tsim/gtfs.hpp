#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/geometry.hpp"

namespace tsim {

enum class DayType { weekday, weekend };

inline const char* day_type_name(DayType d) {
    return d == DayType::weekday ? "weekday" : "weekend";
}

struct GtfsStop {
    std::string id;
    std::string name;
    Point coord;  // stop_lon -> x, stop_lat -> y, local planar meters
};

struct GtfsRoute {
    std::string id;
    std::string short_name;
};

struct GtfsTrip {
    std::string id;
    std::string route_id;
    std::string block_id;
    std::string service_id;
};

struct StopTime {
    std::string stop_id;
    long arrival_s = 0;
    long departure_s = 0;
};

struct GtfsService {
    std::string id;
    bool weekday = false;
    bool weekend = false;

    bool matches(DayType d) const { return d == DayType::weekday ? weekday : weekend; }
};

/// Cross-referenced static feed for one service day. Immutable after load.
class TransitSchedule {
public:
    std::map<std::string, GtfsStop> stops;
    std::map<std::string, GtfsRoute> routes;
    std::map<std::string, GtfsTrip> trips;
    std::map<std::string, std::vector<StopTime>> stop_times;  // trip -> ordered visits
    std::map<std::string, GtfsService> services;
    std::map<std::string, std::vector<std::string>> blocks;   // block -> trip ids (by first departure)

    const std::vector<StopTime>& visits(const std::string& trip_id) const {
        auto it = stop_times.find(trip_id);
        if (it == stop_times.end()) throw ModelError("trip '" + trip_id + "' has no stop times");
        return it->second;
    }

    bool trip_matches_day(const std::string& trip_id, DayType day) const {
        const auto& trip = trips.at(trip_id);
        return services.at(trip.service_id).matches(day);
    }

    long first_departure(const std::string& trip_id) const {
        return visits(trip_id).front().departure_s;
    }
};

namespace detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string name;

    int column(const std::string& name_, bool required = true) const {
        auto it = std::find(header.begin(), header.end(), name_);
        if (it == header.end()) {
            if (required)
                throw ModelError(name + ": missing required column '" + name_ + "'");
            return -1;
        }
        return (int)(it - header.begin());
    }

    std::string field(const std::vector<std::string>& row, int col) const {
        return col >= 0 && col < (int)row.size() ? std::string(trim(row[(size_t)col])) : std::string();
    }
};

inline CsvTable read_csv_table(const std::filesystem::path& dir, const std::string& filename) {
    auto path = dir / filename;
    std::ifstream in(path);
    if (!in) throw IoError("missing GTFS table '" + path.string() + "'");
    CsvTable table;
    table.name = filename;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (first) {
            for (auto& f : fields) table.header.emplace_back(trim(f));
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw ModelError(filename + ": empty table");
    return table;
}

} // namespace detail

/// Load the required static tables (stops, routes, trips, stop_times,
/// calendar) from a directory. Orphan references and nonmonotone stop times
/// are rejected.
inline TransitSchedule load_gtfs(const std::string& directory) {
    namespace fs = std::filesystem;
    fs::path dir(directory);
    if (!fs::is_directory(dir)) throw IoError("GTFS directory '" + directory + "' not found");

    TransitSchedule sched;

    auto stops = detail::read_csv_table(dir, "stops.txt");
    {
        int c_id = stops.column("stop_id");
        int c_name = stops.column("stop_name", false);
        int c_lat = stops.column("stop_lat");
        int c_lon = stops.column("stop_lon");
        for (const auto& row : stops.rows) {
            GtfsStop s;
            s.id = stops.field(row, c_id);
            s.name = stops.field(row, c_name);
            auto lat = parse_double(stops.field(row, c_lat));
            auto lon = parse_double(stops.field(row, c_lon));
            if (s.id.empty() || !lat || !lon)
                throw ModelError("stops.txt: malformed record for stop '" + s.id + "'");
            s.coord = {*lon, *lat};
            if (sched.stops.count(s.id)) throw ModelError("stops.txt: duplicate stop '" + s.id + "'");
            sched.stops[s.id] = std::move(s);
        }
    }

    auto routes = detail::read_csv_table(dir, "routes.txt");
    {
        int c_id = routes.column("route_id");
        int c_short = routes.column("route_short_name", false);
        for (const auto& row : routes.rows) {
            GtfsRoute r;
            r.id = routes.field(row, c_id);
            r.short_name = routes.field(row, c_short);
            if (r.id.empty()) throw ModelError("routes.txt: empty route_id");
            if (sched.routes.count(r.id)) throw ModelError("routes.txt: duplicate route '" + r.id + "'");
            sched.routes[r.id] = std::move(r);
        }
    }

    auto calendar = detail::read_csv_table(dir, "calendar.txt");
    {
        int c_id = calendar.column("service_id");
        const char* daynames[] = {"monday", "tuesday", "wednesday", "thursday",
                                  "friday", "saturday", "sunday"};
        int cols[7];
        for (int i = 0; i < 7; ++i) cols[i] = calendar.column(daynames[i]);
        for (const auto& row : calendar.rows) {
            GtfsService svc;
            svc.id = calendar.field(row, c_id);
            if (svc.id.empty()) throw ModelError("calendar.txt: empty service_id");
            for (int i = 0; i < 7; ++i) {
                bool on = calendar.field(row, cols[i]) == "1";
                if (i < 5) svc.weekday = svc.weekday || on;
                else svc.weekend = svc.weekend || on;
            }
            sched.services[svc.id] = std::move(svc);
        }
    }

    auto trips = detail::read_csv_table(dir, "trips.txt");
    {
        int c_route = trips.column("route_id");
        int c_service = trips.column("service_id");
        int c_id = trips.column("trip_id");
        int c_block = trips.column("block_id", false);
        for (const auto& row : trips.rows) {
            GtfsTrip t;
            t.id = trips.field(row, c_id);
            t.route_id = trips.field(row, c_route);
            t.service_id = trips.field(row, c_service);
            t.block_id = trips.field(row, c_block);
            if (t.id.empty()) throw ModelError("trips.txt: empty trip_id");
            if (!sched.routes.count(t.route_id))
                throw ModelError("trips.txt: trip '" + t.id + "' references unknown route '" +
                                 t.route_id + "'");
            if (!sched.services.count(t.service_id))
                throw ModelError("trips.txt: trip '" + t.id + "' references unknown service '" +
                                 t.service_id + "'");
            if (sched.trips.count(t.id)) throw ModelError("trips.txt: duplicate trip '" + t.id + "'");
            sched.trips[t.id] = std::move(t);
        }
    }

    auto stop_times = detail::read_csv_table(dir, "stop_times.txt");
    {
        int c_trip = stop_times.column("trip_id");
        int c_arr = stop_times.column("arrival_time");
        int c_dep = stop_times.column("departure_time");
        int c_stop = stop_times.column("stop_id");
        int c_seq = stop_times.column("stop_sequence");
        std::map<std::string, std::vector<std::pair<long, StopTime>>> by_trip;
        for (const auto& row : stop_times.rows) {
            std::string trip_id = stop_times.field(row, c_trip);
            if (!sched.trips.count(trip_id))
                throw ModelError("stop_times.txt: reference to unknown trip '" + trip_id + "'");
            StopTime st;
            st.stop_id = stop_times.field(row, c_stop);
            if (!sched.stops.count(st.stop_id))
                throw ModelError("stop_times.txt: trip '" + trip_id +
                                 "' references unknown stop '" + st.stop_id + "'");
            std::string ctx = "stop_times.txt: trip '" + trip_id + "' stop '" + st.stop_id + "'";
            st.arrival_s = parse_gtfs_time(stop_times.field(row, c_arr), ctx);
            st.departure_s = parse_gtfs_time(stop_times.field(row, c_dep), ctx);
            if (st.departure_s < st.arrival_s)
                throw ModelError(ctx + ": departure before arrival");
            auto seq = parse_long(stop_times.field(row, c_seq));
            if (!seq) throw ModelError(ctx + ": malformed stop_sequence");
            by_trip[trip_id].emplace_back(*seq, std::move(st));
        }
        for (auto& [trip_id, visits] : by_trip) {
            std::sort(visits.begin(), visits.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<StopTime> ordered;
            long prev_arrival = -1;
            long prev_departure = -1;
            for (auto& [seq, st] : visits) {
                if (st.arrival_s < prev_arrival || st.arrival_s < prev_departure)
                    throw ModelError("stop_times.txt: trip '" + trip_id +
                                     "' has nonmonotone stop times");
                prev_arrival = st.arrival_s;
                prev_departure = st.departure_s;
                ordered.push_back(std::move(st));
            }
            sched.stop_times[trip_id] = std::move(ordered);
        }
    }

    for (const auto& [trip_id, trip] : sched.trips) {
        auto it = sched.stop_times.find(trip_id);
        if (it == sched.stop_times.end() || it->second.size() < 2)
            throw ModelError("trip '" + trip_id + "' has fewer than 2 stop times");
        if (!trip.block_id.empty()) sched.blocks[trip.block_id].push_back(trip_id);
    }
    for (auto& [block, trip_ids] : sched.blocks)
        std::sort(trip_ids.begin(), trip_ids.end(), [&](const auto& a, const auto& b) {
            long da = sched.first_departure(a), db = sched.first_departure(b);
            return da != db ? da < db : a < b;
        });

    return sched;
}

} // namespace tsim
