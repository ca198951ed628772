#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/demand.hpp"
#include "tsim/gtfs.hpp"
#include "tsim/network.hpp"
#include "tsim/vehicle.hpp"

#include <nlohmann/json.hpp>

namespace tsim {

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class ImportKind { network, vehicle, gtfs, td };

inline const char* import_kind_name(ImportKind k) {
    switch (k) {
        case ImportKind::network: return "network";
        case ImportKind::vehicle: return "vehicle";
        case ImportKind::gtfs: return "gtfs";
        case ImportKind::td: return "td";
    }
    return "?";
}

struct ImportDecl {
    ImportKind kind = ImportKind::network;
    std::string key;  // opaque workspace key after "<kind>."
    int line = 0;

    friend bool operator==(const ImportDecl& a, const ImportDecl& b) {
        return a.kind == b.kind && a.key == b.key;
    }
};

struct Assignment {
    enum class Target { block, trip };
    Target target = Target::block;
    std::string id;
    std::string vehicle_type_id;
    int line = 0;

    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.target == b.target && a.id == b.id && a.vehicle_type_id == b.vehicle_type_id;
    }
};

struct SimulationConfig {
    int id = 0;
    long start_s = 0;
    long end_s = 0;
    DayType schedule_day = DayType::weekday;
    long output_sampling_period_s = 3600;
    std::vector<Assignment> assignments;
    int line = 0;

    friend bool operator==(const SimulationConfig& a, const SimulationConfig& b) {
        return a.id == b.id && a.start_s == b.start_s && a.end_s == b.end_s &&
               a.schedule_day == b.schedule_day &&
               a.output_sampling_period_s == b.output_sampling_period_s &&
               a.assignments == b.assignments;
    }
};

struct ScenarioProgram {
    std::vector<ImportDecl> imports;
    std::vector<SimulationConfig> configurations;

    friend bool operator==(const ScenarioProgram& a, const ScenarioProgram& b) {
        return a.imports == b.imports && a.configurations == b.configurations;
    }
};

class ParseError : public std::runtime_error {
public:
    int line;
    int column;
    ParseError(int line_, int column_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ":" + std::to_string(column_) +
                             ": " + msg),
          line(line_),
          column(column_) {}
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace detail {

enum class TokKind { word, number, string, lbrace, rbrace, lbracket, rbracket, colon, eof };

struct Token {
    TokKind kind = TokKind::eof;
    std::string text;  // raw text; numbers keep leading zeros
    int line = 1;
    int column = 1;
};

class ScenarioLexer {
public:
    explicit ScenarioLexer(std::string_view src) : src_(src) {}

    std::vector<Token> tokens() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= src_.size()) {
                t.kind = TokKind::eof;
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (c == '{') { t.kind = TokKind::lbrace; t.text = "{"; advance(); }
            else if (c == '}') { t.kind = TokKind::rbrace; t.text = "}"; advance(); }
            else if (c == '[') { t.kind = TokKind::lbracket; t.text = "["; advance(); }
            else if (c == ']') { t.kind = TokKind::rbracket; t.text = "]"; advance(); }
            else if (c == ':') { t.kind = TokKind::colon; t.text = ":"; advance(); }
            else if (c == '"') { t.kind = TokKind::string; t.text = lex_string(); }
            else if (std::isdigit((unsigned char)c)) {
                t.kind = TokKind::number;
                while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
                    t.text += src_[pos_];
                    advance();
                }
            } else if (std::isalpha((unsigned char)c) || c == '_') {
                t.kind = TokKind::word;
                while (pos_ < src_.size() &&
                       (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_' ||
                        src_[pos_] == '.')) {
                    t.text += src_[pos_];
                    advance();
                }
            } else {
                throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
            }
            out.push_back(std::move(t));
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') { ++line_; col_ = 1; }
        else ++col_;
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') advance();
            else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else break;
        }
    }

    std::string lex_string() {
        int sline = line_, scol = col_;
        advance();  // opening quote
        std::string s;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
            s += src_[pos_];
            advance();
        }
        if (pos_ >= src_.size() || src_[pos_] != '"')
            throw ParseError(sline, scol, "unterminated string literal");
        advance();  // closing quote
        return s;
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

/// HHMM literal -> seconds from midnight. Accepts exactly four digits with
/// minutes < 60 and value <= 2400.
inline long parse_hhmm(const Token& tok) {
    const std::string& s = tok.text;
    if (tok.kind != TokKind::number || s.size() != 4)
        throw ParseError(tok.line, tok.column,
                         "malformed time literal '" + s + "' (want 4-digit HHMM)");
    int hh = (s[0] - '0') * 10 + (s[1] - '0');
    int mm = (s[2] - '0') * 10 + (s[3] - '0');
    if (mm >= 60)
        throw ParseError(tok.line, tok.column,
                         "malformed time literal '" + s + "' (minute field >= 60)");
    long value = hh * 100L + mm;
    if (value > 2400)
        throw ParseError(tok.line, tok.column,
                         "malformed time literal '" + s + "' (past 2400)");
    return hh * 3600L + mm * 60L;
}

class ScenarioParser {
public:
    explicit ScenarioParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ScenarioProgram parse() {
        ScenarioProgram program;
        while (peek().kind != TokKind::eof) {
            const Token& t = peek();
            if (t.kind != TokKind::word)
                throw ParseError(t.line, t.column, "expected 'import' or 'simulation'");
            if (t.text == "import") program.imports.push_back(parse_import());
            else if (t.text == "simulation") program.configurations.push_back(parse_config());
            else throw ParseError(t.line, t.column, "unknown keyword '" + t.text + "'");
        }
        std::set<int> ids;
        for (const auto& c : program.configurations)
            if (!ids.insert(c.id).second)
                throw ParseError(c.line, 1,
                                 "duplicate configuration id " + std::to_string(c.id));
        return program;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    const Token& expect(TokKind kind, const std::string& what) {
        const Token& t = next();
        if (t.kind != kind)
            throw ParseError(t.line, t.column, "expected " + what + ", got '" + t.text + "'");
        return t;
    }

    const Token& expect_word(const std::string& word) {
        const Token& t = next();
        if (t.kind != TokKind::word || t.text != word)
            throw ParseError(t.line, t.column, "expected '" + word + "', got '" + t.text + "'");
        return t;
    }

    ImportDecl parse_import() {
        const Token& kw = expect_word("import");
        const Token& res = expect(TokKind::string, "quoted resource string");
        auto dot = res.text.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 >= res.text.size())
            throw ParseError(res.line, res.column,
                             "malformed import resource '" + res.text +
                                 "' (want \"<kind>.<key>\")");
        std::string kind = res.text.substr(0, dot);
        ImportDecl decl;
        decl.key = res.text.substr(dot + 1);
        decl.line = kw.line;
        if (kind == "network") decl.kind = ImportKind::network;
        else if (kind == "vehicle") decl.kind = ImportKind::vehicle;
        else if (kind == "gtfs") decl.kind = ImportKind::gtfs;
        else if (kind == "td") decl.kind = ImportKind::td;
        else
            throw ParseError(res.line, res.column, "unknown import kind '" + kind + "'");
        return decl;
    }

    SimulationConfig parse_config() {
        const Token& kw = expect_word("simulation");
        expect_word("configuration");
        const Token& idtok = expect(TokKind::number, "configuration id");
        SimulationConfig cfg;
        cfg.line = kw.line;
        auto id = parse_long(idtok.text);
        if (!id || *id <= 0)
            throw ParseError(idtok.line, idtok.column,
                             "configuration id must be a positive integer");
        cfg.id = (int)*id;
        expect(TokKind::lbrace, "'{'");

        bool has_time = false, has_schedule = false, has_sampling = false;
        while (peek().kind != TokKind::rbrace) {
            const Token& t = next();
            if (t.kind != TokKind::word)
                throw ParseError(t.line, t.column, "expected clause keyword, got '" + t.text + "'");
            if (t.text == "time") {
                if (has_time) throw ParseError(t.line, t.column, "duplicate 'time' clause");
                has_time = true;
                expect(TokKind::lbracket, "'['");
                const Token& start = next();
                cfg.start_s = parse_hhmm(start);
                expect(TokKind::colon, "':'");
                const Token& end = next();
                cfg.end_s = parse_hhmm(end);
                expect(TokKind::rbracket, "']'");
                if (cfg.start_s >= cfg.end_s)
                    throw ParseError(start.line, start.column,
                                     "empty time window (start must precede end; 2400 is only "
                                     "valid as the end bound)");
            } else if (t.text == "schedule") {
                if (has_schedule) throw ParseError(t.line, t.column, "duplicate 'schedule' clause");
                has_schedule = true;
                const Token& day = expect(TokKind::word, "'weekday' or 'weekend'");
                if (day.text == "weekday") cfg.schedule_day = DayType::weekday;
                else if (day.text == "weekend") cfg.schedule_day = DayType::weekend;
                else
                    throw ParseError(day.line, day.column,
                                     "unknown schedule day '" + day.text + "'");
            } else if (t.text == "output_sampling_period") {
                if (has_sampling)
                    throw ParseError(t.line, t.column, "duplicate 'output_sampling_period' clause");
                has_sampling = true;
                const Token& num = expect(TokKind::number, "sampling period in seconds");
                auto v = parse_long(num.text);
                if (!v || *v < 1)
                    throw ParseError(num.line, num.column, "sampling period must be >= 1");
                cfg.output_sampling_period_s = *v;
            } else if (t.text == "vehicleassignment") {
                expect(TokKind::lbrace, "'{'");
                while (peek().kind != TokKind::rbrace) {
                    const Token& target = expect(TokKind::word, "'block' or 'trip'");
                    Assignment a;
                    a.line = target.line;
                    if (target.text == "block") a.target = Assignment::Target::block;
                    else if (target.text == "trip") a.target = Assignment::Target::trip;
                    else
                        throw ParseError(target.line, target.column,
                                         "unknown assignment target '" + target.text + "'");
                    const Token& id2 = next();
                    if (id2.kind != TokKind::number && id2.kind != TokKind::word &&
                        id2.kind != TokKind::string)
                        throw ParseError(id2.line, id2.column, "expected block/trip id");
                    a.id = id2.text;
                    expect(TokKind::colon, "':'");
                    const Token& type = expect(TokKind::string, "quoted vehicle type");
                    a.vehicle_type_id = type.text;
                    cfg.assignments.push_back(std::move(a));
                }
                expect(TokKind::rbrace, "'}'");
            } else {
                throw ParseError(t.line, t.column, "unknown keyword '" + t.text + "'");
            }
        }
        const Token& close = expect(TokKind::rbrace, "'}'");
        if (!has_time)
            throw ParseError(close.line, close.column,
                             "configuration " + std::to_string(cfg.id) +
                                 " is missing the required 'time' clause");
        if (!has_schedule)
            throw ParseError(close.line, close.column,
                             "configuration " + std::to_string(cfg.id) +
                                 " is missing the required 'schedule' clause");
        if (!has_sampling)
            throw ParseError(close.line, close.column,
                             "configuration " + std::to_string(cfg.id) +
                                 " is missing the required 'output_sampling_period' clause");
        return cfg;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

} // namespace detail

/// Parse a scenario DSML document. Declaration order is preserved; HHMM time
/// literals become seconds from midnight.
inline ScenarioProgram parse_scenario(std::string_view source) {
    detail::ScenarioLexer lexer(source);
    detail::ScenarioParser parser(lexer.tokens());
    return parser.parse();
}

inline ScenarioProgram load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Pretty printer (canonical form; reparses to an equal AST)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string hhmm_literal(long seconds) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%02ld%02ld", seconds / 3600, (seconds % 3600) / 60);
    return buf;
}

inline bool is_bare_token(const std::string& s) {
    if (s.empty()) return false;
    bool all_digits = true;
    for (char c : s) {
        if (!std::isdigit((unsigned char)c)) all_digits = false;
        if (!std::isalnum((unsigned char)c) && c != '_' && c != '.') return false;
    }
    if (all_digits) return true;
    return std::isalpha((unsigned char)s[0]) || s[0] == '_';
}

} // namespace detail

inline std::string pretty_print(const ScenarioProgram& program) {
    std::ostringstream os;
    for (const auto& imp : program.imports)
        os << "import \"" << import_kind_name(imp.kind) << '.' << imp.key << "\"\n";
    for (const auto& cfg : program.configurations) {
        os << "\nsimulation configuration " << cfg.id << " {\n";
        os << "    time [" << detail::hhmm_literal(cfg.start_s) << ':'
           << detail::hhmm_literal(cfg.end_s) << "]\n";
        os << "    schedule " << day_type_name(cfg.schedule_day) << "\n";
        os << "    output_sampling_period " << cfg.output_sampling_period_s << "\n";
        if (!cfg.assignments.empty()) {
            os << "    vehicleassignment {\n";
            for (const auto& a : cfg.assignments) {
                os << "        " << (a.target == Assignment::Target::block ? "block" : "trip")
                   << ' ';
                if (detail::is_bare_token(a.id)) os << a.id;
                else os << '"' << a.id << '"';
                os << ": \"" << a.vehicle_type_id << "\"\n";
            }
            os << "    }\n";
        }
        os << "}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline nlohmann::json diagnostic_to_json(const Diagnostic& d) {
    nlohmann::json j;
    j["severity"] = severity_name(d.severity);
    if (d.config_id) j["config"] = *d.config_id;
    if (d.line) j["line"] = *d.line;
    j["message"] = d.message;
    return j;
}

/// Program-level import checks, independent of loaded resources.
inline std::vector<Diagnostic> check_imports(const ScenarioProgram& program) {
    std::vector<Diagnostic> out;
    if (program.configurations.empty()) return out;
    int counts[4] = {0, 0, 0, 0};
    for (const auto& imp : program.imports) counts[(int)imp.kind]++;
    for (int k = 0; k < 4; ++k) {
        if (counts[k] == 0)
            out.push_back({Severity::error, {}, {},
                           std::string("missing required import of kind '") +
                               import_kind_name((ImportKind)k) + "'"});
        else if (counts[k] > 1)
            out.push_back({Severity::warning, {}, {},
                           std::string("multiple '") + import_kind_name((ImportKind)k) +
                               "' imports; the last one is used"});
    }
    return out;
}

/// Cross-checks assignments against the schedule and the vehicle catalog.
/// Returns an empty list iff the program is valid.
inline std::vector<Diagnostic> validate_scenario(const ScenarioProgram& program,
                                                 const TransitSchedule& schedule,
                                                 const VehicleCatalog& catalog) {
    std::vector<Diagnostic> out = check_imports(program);
    for (const auto& cfg : program.configurations) {
        // block -> (type, line of first witness)
        std::map<std::string, std::pair<std::string, int>> block_types;
        for (const auto& a : cfg.assignments) {
            const VehicleType* type = catalog.find(a.vehicle_type_id);
            if (!type || !type->is_bus) {
                out.push_back({Severity::error, cfg.id, a.line,
                               "unknown vehicle type '" + a.vehicle_type_id + "'"});
                continue;
            }
            std::string block;
            if (a.target == Assignment::Target::block) {
                if (!schedule.blocks.count(a.id)) {
                    out.push_back({Severity::error, cfg.id, a.line,
                                   "unknown block '" + a.id + "'"});
                    continue;
                }
                block = a.id;
            } else {
                auto trip = schedule.trips.find(a.id);
                if (trip == schedule.trips.end()) {
                    out.push_back({Severity::error, cfg.id, a.line,
                                   "unknown trip '" + a.id + "'"});
                    continue;
                }
                block = trip->second.block_id;
                if (block.empty()) continue;  // blockless trip: nothing to reconcile
            }
            auto [it, inserted] = block_types.try_emplace(block, a.vehicle_type_id, a.line);
            if (!inserted && it->second.first != a.vehicle_type_id)
                out.push_back({Severity::error, cfg.id, a.line,
                               "inconsistent vehicle assignment for block '" + block + "': '" +
                                   it->second.first + "' vs '" + a.vehicle_type_id + "'"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Workspace resolution and interpretation
// ---------------------------------------------------------------------------

/// Maps import keys to files under a workspace root:
///   network.<K> -> <root>/network/<K>.net
///   vehicle.<K> -> <root>/vehicle/<K>.json
///   gtfs.<K>    -> <root>/gtfs/<K>/  (directory of GTFS tables)
///   td.<K>      -> <root>/td/<K>.od and <root>/td/<K>.taz.json
/// Loaded resources are cached and shared between configurations.
class Workspace {
public:
    explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    std::shared_ptr<const RoadNetwork> network(const std::string& key) {
        auto& slot = networks_[key];
        if (!slot) {
            auto path = root_ / "network" / (key + ".net");
            if (!std::filesystem::exists(path))
                throw IoError("network resource '" + key + "' not found at " + path.string());
            slot = std::make_shared<RoadNetwork>(load_network(path.string()));
        }
        return slot;
    }

    std::shared_ptr<const VehicleCatalog> vehicles(const std::string& key) {
        auto& slot = catalogs_[key];
        if (!slot) {
            auto path = root_ / "vehicle" / (key + ".json");
            if (!std::filesystem::exists(path))
                throw IoError("vehicle resource '" + key + "' not found at " + path.string());
            slot = std::make_shared<VehicleCatalog>(load_vehicle_catalog(path.string()));
        }
        return slot;
    }

    std::shared_ptr<const TransitSchedule> gtfs(const std::string& key) {
        auto& slot = schedules_[key];
        if (!slot) {
            auto dir = root_ / "gtfs" / key;
            if (!std::filesystem::is_directory(dir))
                throw IoError("gtfs resource '" + key + "' not found at " + dir.string());
            slot = std::make_shared<TransitSchedule>(load_gtfs(dir.string()));
        }
        return slot;
    }

    std::shared_ptr<const OdMatrix> od(const std::string& key) {
        auto& slot = od_[key];
        if (!slot) {
            auto path = root_ / "td" / (key + ".od");
            if (!std::filesystem::exists(path))
                throw IoError("td resource '" + key + "' not found at " + path.string());
            slot = std::make_shared<OdMatrix>(load_od(path.string()));
        }
        return slot;
    }

    std::shared_ptr<const TazPartition> taz(const std::string& td_key,
                                            const std::string& network_key) {
        auto& slot = taz_[td_key + "\x1f" + network_key];
        if (!slot) {
            auto path = root_ / "td" / (td_key + ".taz.json");
            if (!std::filesystem::exists(path))
                throw IoError("TAZ resource '" + td_key + "' not found at " + path.string());
            auto zones = load_taz(path.string());
            slot = std::make_shared<TazPartition>(assign_edges_to_taz(*network(network_key), zones));
        }
        return slot;
    }

private:
    std::filesystem::path root_;
    std::map<std::string, std::shared_ptr<const RoadNetwork>> networks_;
    std::map<std::string, std::shared_ptr<const VehicleCatalog>> catalogs_;
    std::map<std::string, std::shared_ptr<const TransitSchedule>> schedules_;
    std::map<std::string, std::shared_ptr<const OdMatrix>> od_;
    std::map<std::string, std::shared_ptr<const TazPartition>> taz_;
};

struct ResolvedConfig {
    int id = 0;
    long start_s = 0;
    long end_s = 0;
    DayType schedule_day = DayType::weekday;
    long output_sampling_period_s = 3600;
    std::shared_ptr<const RoadNetwork> net;
    std::shared_ptr<const TransitSchedule> schedule;
    std::shared_ptr<const VehicleCatalog> catalog;
    std::shared_ptr<const OdMatrix> od;
    std::shared_ptr<const TazPartition> taz;
    std::map<std::string, std::string> trip_vehicle_type;  // total over all trips
};

/// Resolve a validated program against a workspace. Pure: loads resources and
/// computes the total trip->vehicle-type map, no simulation side effects.
inline std::vector<ResolvedConfig> interpret(const ScenarioProgram& program, Workspace& workspace) {
    std::map<ImportKind, std::string> keys;
    for (const auto& imp : program.imports) keys[imp.kind] = imp.key;  // last import wins
    for (int k = 0; k < 4; ++k)
        if (!keys.count((ImportKind)k))
            throw ModelError(std::string("program has no '") + import_kind_name((ImportKind)k) +
                             "' import");

    auto net = workspace.network(keys[ImportKind::network]);
    auto catalog = workspace.vehicles(keys[ImportKind::vehicle]);
    auto schedule = workspace.gtfs(keys[ImportKind::gtfs]);
    auto od = workspace.od(keys[ImportKind::td]);
    auto taz = workspace.taz(keys[ImportKind::td], keys[ImportKind::network]);

    std::vector<ResolvedConfig> out;
    for (const auto& cfg : program.configurations) {
        ResolvedConfig rc;
        rc.id = cfg.id;
        rc.start_s = cfg.start_s;
        rc.end_s = cfg.end_s;
        rc.schedule_day = cfg.schedule_day;
        rc.output_sampling_period_s = cfg.output_sampling_period_s;
        rc.net = net;
        rc.schedule = schedule;
        rc.catalog = catalog;
        rc.od = od;
        rc.taz = taz;

        std::map<std::string, std::string> block_type;
        std::map<std::string, std::string> trip_type;
        for (const auto& a : cfg.assignments) {
            if (!catalog->find(a.vehicle_type_id))
                throw ModelError("configuration " + std::to_string(cfg.id) +
                                 ": unknown vehicle type '" + a.vehicle_type_id + "'");
            if (a.target == Assignment::Target::block) {
                if (!schedule->blocks.count(a.id))
                    throw ModelError("configuration " + std::to_string(cfg.id) +
                                     ": unknown block '" + a.id + "'");
                block_type[a.id] = a.vehicle_type_id;
            } else {
                if (!schedule->trips.count(a.id))
                    throw ModelError("configuration " + std::to_string(cfg.id) +
                                     ": unknown trip '" + a.id + "'");
                trip_type[a.id] = a.vehicle_type_id;
            }
        }
        const std::string& fallback = catalog->default_type_id;
        for (const auto& [trip_id, trip] : schedule->trips) {
            auto direct = trip_type.find(trip_id);
            if (direct != trip_type.end()) {
                rc.trip_vehicle_type[trip_id] = direct->second;
                continue;
            }
            auto via_block = block_type.find(trip.block_id);
            rc.trip_vehicle_type[trip_id] =
                via_block != block_type.end() ? via_block->second : fallback;
        }
        out.push_back(std::move(rc));
    }
    return out;
}

} // namespace tsim
