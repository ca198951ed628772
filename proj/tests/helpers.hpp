#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tsim/gtfs.hpp"
#include "tsim/network.hpp"

namespace test_helpers {

inline tsim::RoadNetwork network_from(const std::string& text) {
    std::istringstream in(text);
    return tsim::parse_network(in, "<test>");
}

/// Straight two-lane-free corridor: n+1 nodes spaced apart, n edges e0..e{n-1}.
inline tsim::RoadNetwork line_network(int n_edges, double length = 100.0, double speed = 10.0,
                                      int lanes = 1) {
    std::ostringstream os;
    for (int i = 0; i <= n_edges; ++i)
        os << "node n" << i << ' ' << i * length << " 0\n";
    for (int i = 0; i < n_edges; ++i)
        os << "edge e" << i << " n" << i << " n" << (i + 1) << ' ' << length << ' ' << speed << ' '
           << lanes << "\n";
    return network_from(os.str());
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        base_ = std::filesystem::temp_directory_path() /
                ("tsim_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    const std::filesystem::path& path() const { return base_; }

    void write(const std::string& rel, const std::string& content) const {
        auto p = base_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p);
        out << content;
    }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path base_;
};

/// Minimal feed: 2 routes, 4 weekday trips + 1 weekend trip, 6 stops.
/// Stops sit on the axes of a 600 m grid so they snap onto simple networks.
inline void write_toy_feed(const TempDir& dir, const std::string& rel = "gtfs") {
    dir.write(rel + "/stops.txt",
              "stop_id,stop_name,stop_lat,stop_lon\n"
              "A,Alpha,0,50\n"
              "B,Beta,0,250\n"
              "C,Gamma,0,450\n"
              "D,Delta,100,50\n"
              "E,Epsilon,100,250\n"
              "F,Zeta,100,450\n");
    dir.write(rel + "/routes.txt",
              "route_id,route_short_name\n"
              "r1,1\n"
              "r2,2\n");
    dir.write(rel + "/calendar.txt",
              "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,start_date,"
              "end_date\n"
              "WK,1,1,1,1,1,0,0,20210301,20211231\n"
              "WE,0,0,0,0,0,1,1,20210301,20211231\n");
    dir.write(rel + "/trips.txt",
              "route_id,service_id,trip_id,block_id\n"
              "r1,WK,t0700,101\n"
              "r1,WK,t0900,101\n"
              "r1,WK,t1300,101\n"
              "r2,WK,u0800,102\n"
              "r1,WE,w0700,103\n");
    dir.write(rel + "/stop_times.txt",
              "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
              "t0700,07:00:00,07:01:00,A,1\n"
              "t0700,07:04:00,07:05:00,B,2\n"
              "t0700,07:08:00,07:09:00,C,3\n"
              "t0900,09:00:00,09:01:00,A,1\n"
              "t0900,09:04:00,09:05:00,B,2\n"
              "t0900,09:08:00,09:09:00,C,3\n"
              "t1300,13:00:00,13:01:00,A,1\n"
              "t1300,13:04:00,13:05:00,B,2\n"
              "t1300,13:08:00,13:09:00,C,3\n"
              "u0800,08:00:00,08:01:00,D,1\n"
              "u0800,08:04:00,08:05:00,E,2\n"
              "u0800,08:08:00,08:09:00,F,3\n"
              "w0700,07:00:00,07:01:00,A,1\n"
              "w0700,07:04:00,07:05:00,B,2\n");
}

/// Two parallel 600 m corridors at y=0 and y=100 (three 200 m edges each).
inline tsim::RoadNetwork two_corridor_network() {
    return network_from(
        "node a0 0 0\nnode a1 200 0\nnode a2 400 0\nnode a3 600 0\n"
        "node b0 0 100\nnode b1 200 100\nnode b2 400 100\nnode b3 600 100\n"
        "edge ea0 a0 a1 200 10 1\nedge ea1 a1 a2 200 10 1\nedge ea2 a2 a3 200 10 1\n"
        "edge eb0 b0 b1 200 10 1\nedge eb1 b1 b2 200 10 1\nedge eb2 b2 b3 200 10 1\n"
        "edge eab a3 b0 800 10 1\n");
}

inline std::string basic_vehicle_catalog_json() {
    return R"({
  "bus_diesel":   {"propulsion": "diesel",   "default": true,  "passenger_capacity": 40,
                   "max_speed_mps": 17, "accel_mps2": 1.2, "decel_mps2": 4.0,
                   "min_gap_m": 2.5, "length_m": 12.0, "mass_kg": 12000,
                   "frontal_drag_CdA_m2": 6.0, "rolling_Cr": 0.008},
  "bus_hybrid":   {"propulsion": "hybrid",   "passenger_capacity": 40,
                   "max_speed_mps": 17, "accel_mps2": 1.2, "decel_mps2": 4.0,
                   "min_gap_m": 2.5, "length_m": 12.0, "mass_kg": 12000},
  "bus_electric": {"propulsion": "electric", "passenger_capacity": 40,
                   "max_speed_mps": 17, "accel_mps2": 1.2, "decel_mps2": 4.0,
                   "min_gap_m": 2.5, "length_m": 12.0, "mass_kg": 12000}
})";
}

} // namespace test_helpers
