#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/energy.hpp"
#include "tsim/microsim.hpp"

namespace tsim {

/// Per-trip metadata sidecar so analyses can group by route without the feed.
struct TripManifestRow {
    std::string trip_id;
    std::string route_id;
    std::string block_id;
    std::string vehicle_type_id;
    std::string propulsion;
};

namespace io {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

inline void write_trajectories(const std::filesystem::path& path,
                               const std::vector<TrajectoryRecord>& records) {
    auto out = open_out(path);
    out << "t,vehicle,type,edge,pos,speed,accel\n";
    for (const auto& r : records)
        out << r.t_s << ',' << r.vehicle_id << ',' << r.type_id << ',' << r.edge_id << ','
            << fmt_double(r.position_m) << ',' << fmt_double(r.speed_mps) << ','
            << fmt_double(r.accel_mps2) << '\n';
}

inline void write_stop_events(const std::filesystem::path& path,
                              const std::vector<StopEvent>& events) {
    auto out = open_out(path);
    out << "trip,stop,arrival,departure,boarded,alighted\n";
    for (const auto& e : events)
        out << e.trip_id << ',' << e.stop_id << ',' << e.arrival_s << ',' << e.departure_s << ','
            << e.boarded << ',' << e.alighted << '\n';
}

inline void write_edge_intervals(const std::filesystem::path& path,
                                 const std::vector<EdgeInterval>& intervals) {
    auto out = open_out(path);
    out << "edge,t0,t1,mean_speed,density,occupancy,samples\n";
    for (const auto& iv : intervals)
        out << iv.edge_id << ',' << iv.t0 << ',' << iv.t1 << ',' << fmt_double(iv.mean_speed_mps)
            << ',' << fmt_double(iv.mean_density_veh_per_km) << ','
            << fmt_double(iv.mean_occupancy) << ',' << iv.samples << '\n';
}

inline void write_person_outcomes(const std::filesystem::path& path,
                                  const std::vector<PersonOutcome>& outcomes) {
    auto out = open_out(path);
    out << "person,status,depart,arrive\n";
    for (const auto& o : outcomes) {
        out << o.person_id << ',' << o.status << ',' << fmt_double(o.depart_s) << ',';
        if (o.arrive_s) out << fmt_double(*o.arrive_s);
        out << '\n';
    }
}

inline void write_energy_reports(const std::filesystem::path& path,
                                 const std::vector<EnergyReport>& reports) {
    auto out = open_out(path);
    out << "trip,route,propulsion,distance_mi,energy_kJ,economy_mi_per_deg\n";
    for (const auto& r : reports) {
        out << r.trip_id << ',' << r.route_id << ',' << propulsion_name(r.propulsion) << ','
            << fmt_double(r.distance_m / units::m_per_mile) << ',' << fmt_double(r.energy_kJ)
            << ',';
        if (r.economy_mi_per_deg) out << fmt_double(*r.economy_mi_per_deg);
        out << '\n';
    }
}

inline void write_trip_manifest(const std::filesystem::path& path,
                                const std::vector<TripManifestRow>& rows) {
    auto out = open_out(path);
    out << "trip,route,block,vehicle_type,propulsion\n";
    for (const auto& r : rows)
        out << r.trip_id << ',' << r.route_id << ',' << r.block_id << ',' << r.vehicle_type_id
            << ',' << r.propulsion << '\n';
}

// --- readers (analysis side) ------------------------------------------------

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                                      const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ModelError("'" + path.string() + "' is empty");
    if (std::string(trim(line)) != expected_header)
        throw ModelError("'" + path.string() + "': unexpected header '" + line + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_csv(line));
    }
    return rows;
}

inline std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path) {
    std::vector<TrajectoryRecord> out;
    for (const auto& row : read_csv(path, "t,vehicle,type,edge,pos,speed,accel")) {
        if (row.size() != 7) throw ModelError(path.string() + ": malformed trajectory row");
        TrajectoryRecord r;
        r.t_s = *parse_long(row[0]);
        r.vehicle_id = row[1];
        r.type_id = row[2];
        r.edge_id = row[3];
        r.position_m = *parse_double(row[4]);
        r.speed_mps = *parse_double(row[5]);
        r.accel_mps2 = *parse_double(row[6]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<StopEvent> read_stop_events(const std::filesystem::path& path) {
    std::vector<StopEvent> out;
    for (const auto& row : read_csv(path, "trip,stop,arrival,departure,boarded,alighted")) {
        if (row.size() != 6) throw ModelError(path.string() + ": malformed stop event row");
        StopEvent e;
        e.trip_id = row[0];
        e.stop_id = row[1];
        e.arrival_s = *parse_long(row[2]);
        e.departure_s = *parse_long(row[3]);
        e.boarded = (int)*parse_long(row[4]);
        e.alighted = (int)*parse_long(row[5]);
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<EdgeInterval> read_edge_intervals(const std::filesystem::path& path) {
    std::vector<EdgeInterval> out;
    for (const auto& row : read_csv(path, "edge,t0,t1,mean_speed,density,occupancy,samples")) {
        if (row.size() != 7) throw ModelError(path.string() + ": malformed edge interval row");
        EdgeInterval iv;
        iv.edge_id = row[0];
        iv.t0 = *parse_long(row[1]);
        iv.t1 = *parse_long(row[2]);
        iv.mean_speed_mps = *parse_double(row[3]);
        iv.mean_density_veh_per_km = *parse_double(row[4]);
        iv.mean_occupancy = *parse_double(row[5]);
        iv.samples = *parse_long(row[6]);
        out.push_back(std::move(iv));
    }
    return out;
}

inline std::vector<EnergyReport> read_energy_reports(const std::filesystem::path& path) {
    std::vector<EnergyReport> out;
    for (const auto& row :
         read_csv(path, "trip,route,propulsion,distance_mi,energy_kJ,economy_mi_per_deg")) {
        if (row.size() != 6) throw ModelError(path.string() + ": malformed energy row");
        EnergyReport r;
        r.trip_id = row[0];
        r.route_id = row[1];
        r.propulsion = parse_propulsion(row[2], path.string());
        r.distance_m = *parse_double(row[3]) * units::m_per_mile;
        r.energy_kJ = *parse_double(row[4]);
        if (!trim(row[5]).empty()) r.economy_mi_per_deg = *parse_double(row[5]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<TripManifestRow> read_trip_manifest(const std::filesystem::path& path) {
    std::vector<TripManifestRow> out;
    for (const auto& row : read_csv(path, "trip,route,block,vehicle_type,propulsion")) {
        if (row.size() != 5) throw ModelError(path.string() + ": malformed manifest row");
        out.push_back({row[0], row[1], row[2], row[3], row[4]});
    }
    return out;
}

} // namespace io
} // namespace tsim
