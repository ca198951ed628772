#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsim {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Input data could not be read (missing file, unreadable directory).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data was read but violates a model contract.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class Severity { info, warning, error };

inline const char* severity_name(Severity s) {
    switch (s) {
        case Severity::info: return "info";
        case Severity::warning: return "warning";
        case Severity::error: return "error";
    }
    return "?";
}

/// Structured finding attached to a model or a scenario configuration.
/// Diagnostics are data: producing one never aborts a computation.
struct Diagnostic {
    Severity severity = Severity::warning;
    std::optional<int> config_id;
    std::optional<int> line;
    std::string message;

    std::string str() const {
        std::ostringstream os;
        os << severity_name(severity) << ':';
        if (config_id) os << " config " << *config_id << ':';
        if (line) os << " line " << *line << ':';
        os << ' ' << message;
        return os.str();
    }
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::error) return true;
    return false;
}

// ---------------------------------------------------------------------------
// String utilities
// ---------------------------------------------------------------------------

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Split one CSV line. Handles double-quoted fields with "" escapes; no
/// embedded newlines (GTFS tables in this engine are line-per-record).
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<long> parse_long(std::string_view s) {
    s = trim(s);
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest representation that round-trips through parse_double. All CSV
/// output goes through this so analyses recomputed from files match the
/// in-memory values bit for bit.
inline std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

/// "HH:MM:SS" -> seconds from midnight. Values at or past 24:00:00 are
/// rejected (single-service-day engine).
inline long parse_gtfs_time(std::string_view s, const std::string& context) {
    auto fields = s;
    int h = -1, m = -1, sec = -1;
    if (fields.size() == 8 && fields[2] == ':' && fields[5] == ':') {
        auto hh = parse_long(fields.substr(0, 2));
        auto mm = parse_long(fields.substr(3, 2));
        auto ss = parse_long(fields.substr(6, 2));
        if (hh && mm && ss) { h = (int)*hh; m = (int)*mm; sec = (int)*ss; }
    }
    if (h < 0 || m < 0 || m >= 60 || sec < 0 || sec >= 60)
        throw ModelError(context + ": malformed time '" + std::string(s) + "'");
    long t = h * 3600L + m * 60L + sec;
    if (t >= 86400)
        throw ModelError(context + ": time '" + std::string(s) +
                         "' at or past 24:00:00 is not supported");
    return t;
}

inline std::string format_hms(long t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", t / 3600, (t / 60) % 60, t % 60);
    return buf;
}

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream over std::mt19937_64. Distributions are hand-rolled
/// so sampled values are identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in [0, n). n must be positive.
    size_t uniform_index(size_t n) {
        using u128 = unsigned __int128;
        return (size_t)(((u128)next_u64() * (u128)n) >> 64);
    }

private:
    std::mt19937_64 eng_;
};

/// Mixes a master seed with a tag string so per-entity streams are stable
/// under reordering of the entity list.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL ^ master;
    for (char c : tag) {
        h ^= (unsigned char)c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

// ---------------------------------------------------------------------------
// Logging (level from ENGINE_LOG: debug|info|warning|error, default warning)
// ---------------------------------------------------------------------------

inline int log_threshold() {
    static int level = [] {
        const char* v = std::getenv("ENGINE_LOG");
        if (!v) return 2;
        std::string s = v;
        if (s == "debug") return 0;
        if (s == "info") return 1;
        if (s == "warning" || s == "warn") return 2;
        if (s == "error") return 3;
        return 2;
    }();
    return level;
}

inline void log_msg(int level, const std::string& msg) {
    static const char* names[] = {"debug", "info", "warning", "error"};
    if (level >= log_threshold())
        std::cerr << "tsim " << names[level] << ": " << msg << '\n';
}

inline void log_debug(const std::string& m) { log_msg(0, m); }
inline void log_info(const std::string& m) { log_msg(1, m); }
inline void log_warning(const std::string& m) { log_msg(2, m); }
inline void log_error(const std::string& m) { log_msg(3, m); }

} // namespace tsim
