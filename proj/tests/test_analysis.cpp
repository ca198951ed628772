#include <catch_amalgamated.hpp>

#include "tsim/analysis.hpp"

using namespace tsim;

TEST_CASE("occupancy profile is the running sum before each arrival") {
    std::vector<StopEvent> events = {
        {"t1", "A", 100, 110, 3, 0},
        {"t1", "B", 200, 210, 2, 1},
        {"t1", "C", 300, 310, 0, 4},
    };
    auto profiles = occupancy_by_trip(events, {{"t1", "r1"}});
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].route_id == "r1");
    CHECK(profiles[0].onboard_before_arrival == std::vector<int>{0, 3, 4});
    CHECK(profiles[0].stops == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("two-event example from the running-sum convention") {
    std::vector<StopEvent> events = {
        {"t1", "A", 100, 110, 3, 0},
        {"t1", "B", 200, 210, 2, 1},
    };
    auto profiles = occupancy_by_trip(events);
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].onboard_before_arrival == std::vector<int>{0, 3});
}

TEST_CASE("single stop visit is degenerate") {
    std::vector<StopEvent> events = {{"t1", "A", 100, 110, 3, 0}};
    CHECK_THROWS_WITH(occupancy_by_trip(events),
                      Catch::Matchers::ContainsSubstring("fewer than 2"));
}

TEST_CASE("out-of-order stop events are rejected") {
    std::vector<StopEvent> events = {
        {"t1", "B", 200, 210, 2, 1},
        {"t1", "A", 100, 110, 3, 0},
    };
    CHECK_THROWS_WITH(occupancy_by_trip(events),
                      Catch::Matchers::ContainsSubstring("out of stop order"));
}

TEST_CASE("profile equals an independent event replay") {
    // replay oracle: explicit loop accumulating onboard after each stop
    std::vector<StopEvent> events;
    int b[] = {5, 3, 0, 2, 0};
    int a[] = {0, 2, 1, 3, 4};
    for (int i = 0; i < 5; ++i)
        events.push_back({"t", "s" + std::to_string(i), 100 * (i + 1), 100 * (i + 1) + 10,
                          b[i], a[i]});
    auto profiles = occupancy_by_trip(events);
    std::vector<int> expect;
    int onboard = 0;
    for (int i = 0; i < 5; ++i) {
        expect.push_back(onboard);
        onboard += b[i] - a[i];
    }
    CHECK(profiles[0].onboard_before_arrival == expect);
}

TEST_CASE("speed summary mean and quartiles") {
    std::vector<TrajectoryRecord> records;
    double speeds[] = {10, 10, 20, 20};
    for (int i = 0; i < 4; ++i)
        records.push_back({3600 * 8 + i, "t1", "bus", "e0", 0.0, speeds[i], 0.0});
    auto stats = speed_stats(records, {{"t1", "r4"}}, std::nullopt, {});
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].route_id == "r4");
    CHECK(stats[0].hour == 8);
    CHECK(stats[0].samples == 4);
    CHECK(stats[0].mean == Catch::Approx(15.0));
    CHECK(stats[0].median == Catch::Approx(15.0));
}

TEST_CASE("empty hour buckets produce no summaries") {
    std::vector<TrajectoryRecord> records = {
        {3600 * 8, "t1", "bus", "e0", 0.0, 10.0, 0.0}};
    auto stats = speed_stats(records, {{"t1", "r4"}}, std::nullopt, {12});
    CHECK(stats.empty());
    // background vehicles are not bus speeds
    stats = speed_stats(records, {}, std::nullopt, {});
    CHECK(stats.empty());
}

TEST_CASE("quartiles equal a full-sort oracle on a large sample") {
    std::vector<TrajectoryRecord> records;
    uint64_t state = 99;
    std::vector<double> raw;
    for (int i = 0; i < 1000; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        double v = (double)(state >> 40) / 1000.0;
        raw.push_back(v);
        records.push_back({3600 * 12 + i, "t1", "bus", "e0", 0.0, v, 0.0});
    }
    auto stats = speed_stats(records, {{"t1", "r4"}}, std::string("r4"), {12});
    REQUIRE(stats.size() == 1);
    std::sort(raw.begin(), raw.end());
    auto oracle = [&](double p) {
        double h = p * (double)(raw.size() - 1);
        size_t lo = (size_t)h;
        return raw[lo] + (h - (double)lo) * (raw[lo + 1] - raw[lo]);
    };
    CHECK(stats[0].q1 == Catch::Approx(oracle(0.25)));
    CHECK(stats[0].median == Catch::Approx(oracle(0.5)));
    CHECK(stats[0].q3 == Catch::Approx(oracle(0.75)));
}

TEST_CASE("boarding and alighting totals roll up per route") {
    std::vector<StopEvent> events = {
        {"t1", "A", 100, 110, 3, 0}, {"t1", "B", 200, 210, 2, 5},
        {"t2", "A", 300, 310, 4, 0}, {"t2", "B", 400, 410, 3, 7},
        {"u1", "D", 100, 110, 9, 9},
    };
    std::map<std::string, std::string> routes = {{"t1", "r1"}, {"t2", "r1"}, {"u1", "r2"}};
    auto totals = boarding_alighting_totals(events, routes);
    REQUIRE(totals.size() == 5);  // 3 trips + 2 route rollups
    long route1_boarded = 0;
    for (const auto& row : totals) {
        if (row.route_id == "r1" && row.trip_id.empty()) {
            route1_boarded = row.boarded;
            CHECK(row.alighted == 12);
        }
    }
    CHECK(route1_boarded == 12);

    // totals equal direct summation over raw events
    std::map<std::string, long> by_trip;
    for (const auto& e : events) by_trip[e.trip_id] += e.boarded;
    for (const auto& row : totals)
        if (!row.trip_id.empty()) CHECK(row.boarded == by_trip[row.trip_id]);
}

TEST_CASE("no events yield an empty table") {
    CHECK(boarding_alighting_totals({}, {}).empty());
}

TEST_CASE("route summaries roll up peak occupancy and exchange totals") {
    std::vector<StopEvent> events = {
        {"t1", "A", 100, 110, 6, 0}, {"t1", "B", 200, 210, 2, 3}, {"t1", "C", 300, 310, 0, 5},
        {"t2", "A", 400, 410, 2, 0}, {"t2", "B", 500, 510, 0, 2},
    };
    std::map<std::string, std::string> routes = {{"t1", "r1"}, {"t2", "r1"}};
    auto summaries = route_summaries(events, routes);
    REQUIRE(summaries.size() == 1);
    CHECK(summaries[0].route_id == "r1");
    CHECK(summaries[0].max_occupancy_by_trip.at("t1") == 6);  // onboard before B
    CHECK(summaries[0].max_occupancy_by_trip.at("t2") == 2);
    CHECK(summaries[0].total_boarded == 10);
    CHECK(summaries[0].total_alighted == 10);
}
