#include <catch_amalgamated.hpp>

#include <clocale>

#include "tsim/scenario.hpp"
#include "helpers.hpp"

using namespace tsim;
using test_helpers::TempDir;

namespace {

const char* kListing = R"(import "network.toy"
import "vehicle.fleet"
import "gtfs.latest"
import "td.demand"

simulation configuration 1 {
    time [0000:1200]
    schedule weekday
    output_sampling_period 3600
    vehicleassignment {
        block 101: "bus_electric"
    }
}
)";

} // namespace

TEST_CASE("reference program parses into the expected AST") {
    auto program = parse_scenario(kListing);
    REQUIRE(program.imports.size() == 4);
    CHECK(program.imports[0].kind == ImportKind::network);
    CHECK(program.imports[0].key == "toy");
    CHECK(program.imports[1].kind == ImportKind::vehicle);
    CHECK(program.imports[1].key == "fleet");
    CHECK(program.imports[2].kind == ImportKind::gtfs);
    CHECK(program.imports[2].key == "latest");
    CHECK(program.imports[3].kind == ImportKind::td);
    CHECK(program.imports[3].key == "demand");
    REQUIRE(program.configurations.size() == 1);
    const auto& cfg = program.configurations[0];
    CHECK(cfg.id == 1);
    CHECK(cfg.start_s == 0);
    CHECK(cfg.end_s == 43200);
    CHECK(cfg.schedule_day == DayType::weekday);
    CHECK(cfg.output_sampling_period_s == 3600);
    REQUIRE(cfg.assignments.size() == 1);
    CHECK(cfg.assignments[0].target == Assignment::Target::block);
    CHECK(cfg.assignments[0].id == "101");
    CHECK(cfg.assignments[0].vehicle_type_id == "bus_electric");
}

TEST_CASE("dotted keys keep their suffix and trips may be quoted") {
    auto program = parse_scenario(
        "import \"vehicle.BUS_type.xlsx\"\n"
        "import \"network.n\"\nimport \"gtfs.latest\"\nimport \"td.t\"\n"
        "simulation configuration 2 {\n"
        "    time [0900:2400]\n"
        "    schedule weekend\n"
        "    output_sampling_period 60\n"
        "    vehicleassignment { trip \"T7\": \"TypeB\" }\n"
        "}\n");
    CHECK(program.imports[0].key == "BUS_type.xlsx");
    CHECK(program.configurations[0].end_s == 86400);
    CHECK(program.configurations[0].assignments[0].target == Assignment::Target::trip);
    CHECK(program.configurations[0].assignments[0].id == "T7");
}

TEST_CASE("empty configuration body is missing its time clause") {
    CHECK_THROWS_WITH(parse_scenario("simulation configuration 1 { }\n"),
                      Catch::Matchers::ContainsSubstring("'time'"));
}

TEST_CASE("malformed time literals are rejected with line info") {
    try {
        parse_scenario("simulation configuration 1 {\n    time [0900:0860]\n"
                       "    schedule weekday\n    output_sampling_period 60\n}\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("minute field") != std::string::npos);
    }
}

TEST_CASE("time literal oracle over all four-digit strings") {
    // accepted iff minutes < 60 and HHMM value <= 2400
    for (int v = 0; v <= 9999; ++v) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "%04d", v);
        int hh = v / 100, mm = v % 100;
        bool ok = mm < 60 && v <= 2400;
        std::string src = std::string("simulation configuration 1 {\n    time [0000:") + buf +
                          "]\n    schedule weekday\n    output_sampling_period 60\n}\n";
        if (ok && v > 0) {
            auto program = parse_scenario(src);
            CHECK(program.configurations[0].end_s == hh * 3600 + mm * 60);
        } else {
            CHECK_THROWS_AS(parse_scenario(src), ParseError);
        }
    }
}

TEST_CASE("2400 is valid only as an end bound") {
    CHECK_NOTHROW(parse_scenario(
        "simulation configuration 1 {\n    time [2300:2400]\n"
        "    schedule weekday\n    output_sampling_period 60\n}\n"));
    CHECK_THROWS_AS(parse_scenario(
                        "simulation configuration 1 {\n    time [2400:2400]\n"
                        "    schedule weekday\n    output_sampling_period 60\n}\n"),
                    ParseError);
}

TEST_CASE("unknown keywords and duplicate ids are parse errors") {
    CHECK_THROWS_WITH(parse_scenario("simulation configuration 1 {\n    tempo [0000:0100]\n}\n"),
                      Catch::Matchers::ContainsSubstring("unknown keyword"));
    CHECK_THROWS_WITH(
        parse_scenario("simulation configuration 1 {\n    time [0000:0100]\n    schedule weekday\n"
                       "    output_sampling_period 60\n}\n"
                       "simulation configuration 1 {\n    time [0000:0100]\n    schedule weekday\n"
                       "    output_sampling_period 60\n}\n"),
        Catch::Matchers::ContainsSubstring("duplicate configuration id"));
    CHECK_THROWS_WITH(parse_scenario("import \"map.toy\"\n"),
                      Catch::Matchers::ContainsSubstring("unknown import kind"));
}

TEST_CASE("comments are skipped") {
    auto program = parse_scenario(
        "# header comment\n"
        "import \"network.toy\"  # trailing\n"
        "simulation configuration 3 {\n"
        "    time [0100:0200]\n    schedule weekday\n    output_sampling_period 60\n"
        "}\n");
    CHECK(program.imports.size() == 1);
    CHECK(program.configurations[0].id == 3);
}

TEST_CASE("round-trip property over generated programs") {
    uint64_t state = 7;
    auto next = [&](int n) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return (int)((state >> 33) % (uint64_t)n);
    };
    const char* keys[] = {"toy", "latest", "fleet.v2", "a_b.c"};
    const char* types[] = {"bus_a", "bus b", "42"};
    for (int trial = 0; trial < 50; ++trial) {
        ScenarioProgram program;
        program.imports.push_back({ImportKind::network, keys[next(4)], 0});
        program.imports.push_back({ImportKind::vehicle, keys[next(4)], 0});
        program.imports.push_back({ImportKind::gtfs, keys[next(4)], 0});
        program.imports.push_back({ImportKind::td, keys[next(4)], 0});
        int n_configs = 1 + next(3);
        for (int c = 0; c < n_configs; ++c) {
            SimulationConfig cfg;
            cfg.id = c + 1;
            long start_min = next(1439);
            long end_min = start_min + 1 + next((int)(1440 - start_min));
            cfg.start_s = start_min * 60;
            cfg.end_s = end_min * 60;
            cfg.schedule_day = next(2) ? DayType::weekday : DayType::weekend;
            cfg.output_sampling_period_s = 1 + next(7200);
            int n_assign = next(4);
            for (int a = 0; a < n_assign; ++a) {
                Assignment as;
                as.target = next(2) ? Assignment::Target::block : Assignment::Target::trip;
                as.id = next(2) ? std::to_string(100 + next(50)) : "trip.x_" + std::to_string(a);
                as.vehicle_type_id = types[next(3)];
                cfg.assignments.push_back(std::move(as));
            }
            program.configurations.push_back(std::move(cfg));
        }
        auto printed = pretty_print(program);
        auto reparsed = parse_scenario(printed);
        REQUIRE(reparsed == program);
        REQUIRE(pretty_print(reparsed) == printed);
    }
}

TEST_CASE("parsing does not depend on the ambient locale") {
    const char* old_locale = std::setlocale(LC_ALL, nullptr);
    std::string saved = old_locale ? old_locale : "C";
    // a comma-decimal locale, when available, must not change parse results
    std::setlocale(LC_ALL, "de_DE.UTF-8");
    auto program = parse_scenario(kListing);
    CHECK(program.configurations[0].end_s == 43200);
    CHECK(program.configurations[0].output_sampling_period_s == 3600);
    std::setlocale(LC_ALL, saved.c_str());
}

TEST_CASE("pretty-print round-trips to a structurally identical AST") {
    const char* sources[] = {
        kListing,
        "import \"network.a\"\nimport \"vehicle.b\"\nimport \"gtfs.c\"\nimport \"td.d\"\n"
        "simulation configuration 1 {\n    time [0630:0945]\n    schedule weekend\n"
        "    output_sampling_period 900\n"
        "    vehicleassignment {\n        trip \"T 7\": \"A\"\n        block 12: \"B\"\n    }\n}\n"
        "simulation configuration 2 {\n    time [1200:2400]\n    schedule weekday\n"
        "    output_sampling_period 1\n}\n",
    };
    for (const char* src : sources) {
        auto ast = parse_scenario(src);
        auto printed = pretty_print(ast);
        auto again = parse_scenario(printed);
        CHECK(ast == again);
        CHECK(pretty_print(again) == printed);
    }
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

struct ValidationFixture {
    TempDir dir{"scenario"};
    TransitSchedule schedule;
    VehicleCatalog catalog;
    ValidationFixture() {
        test_helpers::write_toy_feed(dir);
        schedule = load_gtfs((dir.path() / "gtfs").string());
        catalog = parse_vehicle_catalog(
            nlohmann::json::parse(test_helpers::basic_vehicle_catalog_json()), "<test>");
    }
    ScenarioProgram program(const std::string& assignments) {
        return parse_scenario(
            "import \"network.n\"\nimport \"vehicle.v\"\nimport \"gtfs.g\"\nimport \"td.t\"\n"
            "simulation configuration 1 {\n    time [0000:1200]\n    schedule weekday\n"
            "    output_sampling_period 3600\n    vehicleassignment {\n" +
            assignments + "    }\n}\n");
    }
};

} // namespace

TEST_CASE("block assignment conflicting with a member trip is an error") {
    ValidationFixture fx;
    auto program = fx.program(
        "        block 101: \"bus_diesel\"\n"
        "        trip t0900: \"bus_electric\"\n");
    auto diags = validate_scenario(program, fx.schedule, fx.catalog);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].severity == Severity::error);
    CHECK(diags[0].message.find("block '101'") != std::string::npos);
    CHECK(diags[0].config_id == 1);
}

TEST_CASE("identical repeated assignments are fine") {
    ValidationFixture fx;
    auto program = fx.program(
        "        block 101: \"bus_diesel\"\n"
        "        block 101: \"bus_diesel\"\n"
        "        trip t0900: \"bus_diesel\"\n");
    CHECK(validate_scenario(program, fx.schedule, fx.catalog).empty());
}

TEST_CASE("unknown vehicle type, block, and trip are flagged") {
    ValidationFixture fx;
    auto diags = validate_scenario(fx.program("        block 101: \"warp_bus\"\n"), fx.schedule,
                                   fx.catalog);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("unknown vehicle type") != std::string::npos);

    diags = validate_scenario(fx.program("        block 999: \"bus_diesel\"\n"), fx.schedule,
                              fx.catalog);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("unknown block") != std::string::npos);

    diags = validate_scenario(fx.program("        trip ghost: \"bus_diesel\"\n"), fx.schedule,
                              fx.catalog);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("unknown trip") != std::string::npos);
}

TEST_CASE("missing import kinds are reported") {
    auto program = parse_scenario(
        "import \"network.n\"\n"
        "simulation configuration 1 {\n    time [0000:0100]\n    schedule weekday\n"
        "    output_sampling_period 60\n}\n");
    auto diags = check_imports(program);
    REQUIRE(diags.size() == 3);
    for (const auto& d : diags) CHECK(d.severity == Severity::error);
}

// ---------------------------------------------------------------------------
// interpretation
// ---------------------------------------------------------------------------

namespace {

/// Workspace with network/vehicle/gtfs/td resources for the toy feed.
struct WorkspaceFixture {
    TempDir dir{"workspace"};
    WorkspaceFixture() {
        test_helpers::write_toy_feed(dir, "gtfs/latest");
        dir.write("network/toy.net",
                  "node a0 0 0\nnode a1 200 0\nnode a2 400 0\nnode a3 600 0\n"
                  "node b0 0 100\nnode b1 200 100\nnode b2 400 100\nnode b3 600 100\n"
                  "edge ea0 a0 a1 200 10 1\nedge ea1 a1 a2 200 10 1\nedge ea2 a2 a3 200 10 1\n"
                  "edge eb0 b0 b1 200 10 1\nedge eb1 b1 b2 200 10 1\nedge eb2 b2 b3 200 10 1\n"
                  "edge eab a3 b0 800 10 1\n");
        dir.write("vehicle/fleet.json", test_helpers::basic_vehicle_catalog_json());
        dir.write("td/demand.od", "L R 25200 28800 car 2\n");
        dir.write("td/demand.taz.json",
                  R"({"L": [[-10,-10],[300,-10],[300,150],[-10,150]],
                      "R": [[300,-10],[700,-10],[700,150],[300,150]]})");
    }
    ScenarioProgram program(const std::string& body) {
        return parse_scenario(
            "import \"network.toy\"\nimport \"vehicle.fleet\"\n"
            "import \"gtfs.latest\"\nimport \"td.demand\"\n" + body);
    }
};

const char* kOneConfig =
    "simulation configuration 1 {\n    time [0000:1200]\n    schedule weekday\n"
    "    output_sampling_period 3600\n"
    "    vehicleassignment {\n        block 101: \"bus_electric\"\n    }\n}\n";

} // namespace

TEST_CASE("interpret resolves block assignments to every member trip") {
    WorkspaceFixture fx;
    Workspace ws(fx.dir.path());
    auto configs = interpret(fx.program(kOneConfig), ws);
    REQUIRE(configs.size() == 1);
    const auto& rc = configs[0];
    CHECK(rc.trip_vehicle_type.at("t0700") == "bus_electric");
    CHECK(rc.trip_vehicle_type.at("t0900") == "bus_electric");
    CHECK(rc.trip_vehicle_type.at("t1300") == "bus_electric");
    CHECK(rc.trip_vehicle_type.at("u0800") == "bus_diesel");  // catalog default
    CHECK(rc.trip_vehicle_type.at("w0700") == "bus_diesel");
    // total over all trips
    CHECK(rc.trip_vehicle_type.size() == rc.schedule->trips.size());
}

TEST_CASE("two configurations share resource handles") {
    WorkspaceFixture fx;
    Workspace ws(fx.dir.path());
    auto program = fx.program(
        std::string(kOneConfig) +
        "simulation configuration 2 {\n    time [1200:1800]\n    schedule weekend\n"
        "    output_sampling_period 600\n}\n");
    auto configs = interpret(program, ws);
    REQUIRE(configs.size() == 2);
    CHECK(configs[0].net.get() == configs[1].net.get());
    CHECK(configs[0].schedule.get() == configs[1].schedule.get());
    CHECK(configs[0].od.get() == configs[1].od.get());
    CHECK(configs[0].taz.get() == configs[1].taz.get());
}

TEST_CASE("interpret rejects unknown blocks and missing resources") {
    WorkspaceFixture fx;
    Workspace ws(fx.dir.path());
    auto bad = fx.program(
        "simulation configuration 1 {\n    time [0000:1200]\n    schedule weekday\n"
        "    output_sampling_period 3600\n"
        "    vehicleassignment {\n        block 999: \"bus_electric\"\n    }\n}\n");
    CHECK_THROWS_WITH(interpret(bad, ws), Catch::Matchers::ContainsSubstring("unknown block"));

    auto missing = parse_scenario(
        "import \"network.nope\"\nimport \"vehicle.fleet\"\n"
        "import \"gtfs.latest\"\nimport \"td.demand\"\n" + std::string(kOneConfig));
    CHECK_THROWS_AS(interpret(missing, ws), IoError);
}

TEST_CASE("block consistency holds in every resolved config") {
    WorkspaceFixture fx;
    Workspace ws(fx.dir.path());
    auto configs = interpret(fx.program(kOneConfig), ws);
    for (const auto& rc : configs) {
        std::map<std::string, std::set<std::string>> types_by_block;
        for (const auto& [trip_id, type] : rc.trip_vehicle_type) {
            const auto& block = rc.schedule->trips.at(trip_id).block_id;
            if (!block.empty()) types_by_block[block].insert(type);
        }
        for (const auto& [block, types] : types_by_block) CHECK(types.size() == 1);
    }
}
