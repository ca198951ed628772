#include <catch_amalgamated.hpp>

#include "tsim/transit.hpp"
#include "helpers.hpp"

using namespace tsim;
using test_helpers::TempDir;

namespace {

TransitSchedule toy_schedule(TempDir& dir) {
    test_helpers::write_toy_feed(dir);
    return load_gtfs((dir.path() / "gtfs").string());
}

std::map<std::string, std::string> all_trips_default(const TransitSchedule& sched,
                                                     const std::string& type) {
    std::map<std::string, std::string> m;
    for (const auto& [trip_id, trip] : sched.trips) m[trip_id] = type;
    return m;
}

} // namespace

TEST_CASE("place_stops snaps onto the network and reports out-of-range stops") {
    TempDir dir("place");
    auto sched = toy_schedule(dir);
    auto net = test_helpers::two_corridor_network();

    auto result = place_stops(sched, net, 100.0);
    // stops A,B,C sit on the y=0 corridor; D,E,F on y=100
    REQUIRE(result.placements.size() == 6);
    CHECK(result.unplaceable.empty());
    CHECK(result.placements.at("A").edge_id == "ea0");
    CHECK(result.placements.at("A").offset_m == Catch::Approx(50.0));
    CHECK(result.placements.at("B").edge_id == "ea1");
    CHECK(result.placements.at("B").offset_m == Catch::Approx(50.0));

    SECTION("tight radius leaves distant stops unplaced") {
        auto net1 = test_helpers::network_from(
            "node a 0 0\nnode b 200 0\nedge only a b 200 10 1\n");
        auto r2 = place_stops(sched, net1, 60.0);
        CHECK(r2.placements.count("A") == 1);
        CHECK(std::find(r2.unplaceable.begin(), r2.unplaceable.end(), "D") !=
              r2.unplaceable.end());
    }
    SECTION("placements equal the brute-force snapping oracle") {
        for (const auto& [stop_id, stop] : sched.stops) {
            auto want = snap_to_edge(net, stop.coord, 100.0);
            REQUIRE(want);
            CHECK(result.placements.at(stop_id).edge_id == want->edge_id);
            CHECK(result.placements.at(stop_id).offset_m == Catch::Approx(want->offset_m));
        }
    }
}

TEST_CASE("generate_bus_trips filters by window and day type") {
    TempDir dir("gen");
    auto sched = toy_schedule(dir);
    auto net = test_helpers::two_corridor_network();
    auto placement = place_stops(sched, net, 100.0);
    auto types = all_trips_default(sched, "bus");

    SECTION("weekday window [0, 12:00) keeps the 07:00 and 09:00 trips") {
        TripSelection sel{DayType::weekday, 0, 43200};
        auto gen = generate_bus_trips(sched, placement.placements, net, sel, types);
        std::vector<std::string> ids;
        for (const auto& p : gen.plans) ids.push_back(p.trip_id);
        CHECK(ids == std::vector<std::string>{"t0700", "u0800", "t0900"});
    }
    SECTION("weekend day keeps only the weekend trip") {
        TripSelection sel{DayType::weekend, 0, 86400};
        auto gen = generate_bus_trips(sched, placement.placements, net, sel, types);
        REQUIRE(gen.plans.size() == 1);
        CHECK(gen.plans[0].trip_id == "w0700");
    }
    SECTION("plan count equals an independent scan over stop_times") {
        TripSelection sel{DayType::weekday, 0, 43200};
        auto gen = generate_bus_trips(sched, placement.placements, net, sel, types);
        int expected = 0;
        for (const auto& [trip_id, trip] : sched.trips) {
            if (!sched.services.at(trip.service_id).matches(DayType::weekday)) continue;
            long dep = sched.visits(trip_id).front().departure_s;
            if (dep >= sel.start_s && dep < sel.end_s) ++expected;
        }
        CHECK((int)gen.plans.size() == expected);
    }
}

TEST_CASE("bus plan edge paths are connected and visit stops in order") {
    TempDir dir("path");
    auto sched = toy_schedule(dir);
    auto net = test_helpers::two_corridor_network();
    auto placement = place_stops(sched, net, 100.0);
    TripSelection sel{DayType::weekday, 0, 86400};
    auto gen =
        generate_bus_trips(sched, placement.placements, net, sel, all_trips_default(sched, "x"));
    for (const auto& plan : gen.plans) {
        for (size_t i = 0; i + 1 < plan.edge_path.size(); ++i) {
            const RoadEdge* a = net.find_edge(plan.edge_path[i]);
            const RoadEdge* b = net.find_edge(plan.edge_path[i + 1]);
            REQUIRE(a);
            REQUIRE(b);
            CHECK(a->to_node == b->from_node);
        }
        int prev_index = -1;
        double prev_offset = -1.0;
        for (const auto& v : plan.visits) {
            CHECK(plan.edge_path[(size_t)v.path_index] == v.edge_id);
            bool forward = v.path_index > prev_index ||
                           (v.path_index == prev_index && v.offset_m >= prev_offset);
            CHECK(forward);
            prev_index = v.path_index;
            prev_offset = v.offset_m;
        }
        CHECK(plan.vehicle_type_id == "x");
    }
}

TEST_CASE("unreachable stop pair names the broken leg") {
    TempDir dir("broken");
    auto sched = toy_schedule(dir);
    TripSelection sel{DayType::weekday, 0, 86400};
    // trip u0800 rides the y=100 corridor; break it by removing eb1
    auto net2 = test_helpers::network_from(
        "node a0 0 0\nnode a1 200 0\nnode a2 400 0\nnode a3 600 0\n"
        "node b0 0 100\nnode b1 200 100\nnode b2 400 100\nnode b3 600 100\n"
        "edge ea0 a0 a1 200 10 1\nedge ea1 a1 a2 200 10 1\nedge ea2 a2 a3 200 10 1\n"
        "edge eb0 b0 b1 200 10 1\nedge eb2 b2 b3 200 10 1\n");
    auto placement2 = place_stops(sched, net2, 200.0);
    CHECK_THROWS_WITH(generate_bus_trips(sched, placement2.placements, net2, sel,
                                         all_trips_default(sched, "x")),
                      Catch::Matchers::ContainsSubstring("no path"));
}

TEST_CASE("visiting an unplaced stop is an error") {
    TempDir dir("unplaced");
    auto sched = toy_schedule(dir);
    auto net = test_helpers::network_from(
        "node a 0 0\nnode b 200 0\nedge only a b 200 10 1\n");
    auto placement = place_stops(sched, net, 60.0);  // D/E/F unplaceable
    TripSelection sel{DayType::weekday, 0, 86400};
    CHECK_THROWS_WITH(generate_bus_trips(sched, placement.placements, net, sel,
                                         all_trips_default(sched, "x")),
                      Catch::Matchers::ContainsSubstring("unplaced stop"));
}

TEST_CASE("overlapping trips on one block produce a warning") {
    TempDir dir("overlap");
    test_helpers::write_toy_feed(dir);
    dir.write("gtfs/trips.txt",
              "route_id,service_id,trip_id,block_id\n"
              "r1,WK,t0700,101\n"
              "r1,WK,t0900,101\n"
              "r1,WK,t1300,101\n"
              "r2,WK,u0800,102\n"
              "r1,WE,w0700,103\n");
    dir.write("gtfs/stop_times.txt",
              "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
              "t0700,07:00:00,07:01:00,A,1\n"
              "t0700,07:30:00,07:31:00,B,2\n"
              "t0900,07:15:00,07:16:00,A,1\n"  // overlaps t0700 on block 101
              "t0900,07:45:00,07:46:00,B,2\n"
              "t1300,13:00:00,13:01:00,A,1\n"
              "t1300,13:04:00,13:05:00,B,2\n"
              "u0800,08:00:00,08:01:00,D,1\n"
              "u0800,08:04:00,08:05:00,E,2\n"
              "w0700,07:00:00,07:01:00,A,1\n"
              "w0700,07:04:00,07:05:00,B,2\n");
    auto sched = load_gtfs((dir.path() / "gtfs").string());
    auto net = test_helpers::two_corridor_network();
    auto placement = place_stops(sched, net, 100.0);
    TripSelection sel{DayType::weekday, 0, 86400};
    auto gen =
        generate_bus_trips(sched, placement.placements, net, sel, all_trips_default(sched, "x"));
    bool warned = false;
    for (const auto& d : gen.diagnostics)
        if (d.message.find("overlap") != std::string::npos) warned = true;
    CHECK(warned);
}
