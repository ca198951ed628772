#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/geometry.hpp"
#include "tsim/network.hpp"

namespace tsim {

enum class DemandMode { car, truck, trailer, person };

inline const char* demand_mode_name(DemandMode m) {
    switch (m) {
        case DemandMode::car: return "car";
        case DemandMode::truck: return "truck";
        case DemandMode::trailer: return "trailer";
        case DemandMode::person: return "person";
    }
    return "?";
}

inline DemandMode parse_demand_mode(const std::string& s, const std::string& context) {
    if (s == "car") return DemandMode::car;
    if (s == "truck") return DemandMode::truck;
    if (s == "trailer") return DemandMode::trailer;
    if (s == "person") return DemandMode::person;
    throw ModelError(context + ": unknown mode '" + s + "'");
}

struct OdCell {
    std::string origin_taz;
    std::string dest_taz;
    long period_start_s = 0;
    long period_end_s = 0;
    DemandMode mode = DemandMode::car;
    double count = 0.0;
};

struct OdMatrix {
    std::vector<OdCell> cells;  // declaration order preserved
};

/// OD text format: `origin dest period_start period_end mode count`,
/// whitespace separated, '#' comments. Zero-count cells are kept.
inline OdMatrix parse_od(std::istream& in, const std::string& source_name) {
    OdMatrix matrix;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        std::ostringstream os;
        os << source_name << ':' << lineno << ": " << msg;
        throw ModelError(os.str());
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        auto fields = split_ws(body);
        if (fields.empty()) continue;
        if (fields.size() != 6)
            fail("malformed OD record (want: origin dest period_start period_end mode count)");
        OdCell cell;
        cell.origin_taz = fields[0];
        cell.dest_taz = fields[1];
        auto ps = parse_long(fields[2]);
        auto pe = parse_long(fields[3]);
        if (!ps || !pe) fail("malformed period bound");
        cell.period_start_s = *ps;
        cell.period_end_s = *pe;
        if (cell.period_start_s < 0 || cell.period_end_s > 86400 ||
            cell.period_start_s >= cell.period_end_s)
            fail("malformed period [" + fields[2] + "," + fields[3] + ")");
        cell.mode = parse_demand_mode(fields[4], source_name + ":" + std::to_string(lineno));
        auto count = parse_double(fields[5]);
        if (!count) fail("malformed count");
        if (*count < 0) fail("negative count");
        cell.count = *count;
        matrix.cells.push_back(std::move(cell));
    }
    return matrix;
}

inline OdMatrix load_od(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OD file '" + path + "'");
    return parse_od(in, path);
}

// ---------------------------------------------------------------------------
// Trip expansion
// ---------------------------------------------------------------------------

struct VehicleTrip {
    std::string id;
    DemandMode mode = DemandMode::car;
    double depart_s = 0.0;
    std::string origin_edge;
    std::string dest_edge;
};

struct PersonTrip {
    std::string id;
    double depart_s = 0.0;
    Point origin;
    Point destination;
};

struct ExpandedDemand {
    std::vector<VehicleTrip> vehicles;
    std::vector<PersonTrip> persons;
};

enum class DeparturePolicy { uniform, random };

/// Round half up; per-cell trip counts are deterministic.
inline long scaled_cell_count(double count, double scale) {
    return (long)std::floor(count * scale + 0.5);
}

/// Expand OD cells into individual trips. Per cell, n = round(count*scale)
/// trips depart uniformly spaced (uniform policy) or i.i.d. uniform from a
/// per-cell seeded stream (random policy). Origin/destination edges are
/// sampled uniformly from the TAZ member edges; when origin and destination
/// zones differ the two edges must differ as well. Cell streams derive from
/// (seed, origin, dest, period, mode), so cell order never affects sampling.
inline ExpandedDemand expand_trips(const OdMatrix& matrix, const TazPartition& taz,
                                   const RoadNetwork& net, DeparturePolicy policy, double scale,
                                   uint64_t seed) {
    if (scale <= 0.0 || scale > 1.0)
        throw ModelError("demand scale must be in (0,1], got " + fmt_double(scale));
    ExpandedDemand out;
    for (const auto& cell : matrix.cells) {
        long n = scaled_cell_count(cell.count, scale);
        if (n <= 0) continue;
        auto members_it = taz.members.find(cell.origin_taz);
        if (members_it == taz.members.end() || members_it->second.empty())
            throw ModelError("TAZ '" + cell.origin_taz + "' has no member edges");
        const auto& origin_edges = members_it->second;
        auto dest_it = taz.members.find(cell.dest_taz);
        if (dest_it == taz.members.end() || dest_it->second.empty())
            throw ModelError("TAZ '" + cell.dest_taz + "' has no member edges");
        const auto& dest_edges = dest_it->second;

        std::ostringstream tag;
        tag << cell.origin_taz << '|' << cell.dest_taz << '|' << cell.period_start_s << '|'
            << cell.period_end_s << '|' << demand_mode_name(cell.mode);
        Rng rng(derive_seed(seed, tag.str()));

        double period_len = (double)(cell.period_end_s - cell.period_start_s);
        for (long i = 0; i < n; ++i) {
            double depart;
            if (policy == DeparturePolicy::uniform)
                depart = (double)cell.period_start_s + (double)i * (period_len / (double)n);
            else
                depart = (double)cell.period_start_s + rng.uniform01() * period_len;

            std::string origin_edge = origin_edges[rng.uniform_index(origin_edges.size())];
            std::string dest_edge = dest_edges[rng.uniform_index(dest_edges.size())];
            if (cell.origin_taz != cell.dest_taz) {
                while (dest_edge == origin_edge)
                    dest_edge = dest_edges[rng.uniform_index(dest_edges.size())];
            }

            std::ostringstream id;
            id << demand_mode_name(cell.mode)[0] << '_' << cell.origin_taz << '_' << cell.dest_taz
               << '_' << cell.period_start_s << '_' << i;

            if (cell.mode == DemandMode::person) {
                const RoadEdge& oe = *net.find_edge(origin_edge);
                const RoadEdge& de = *net.find_edge(dest_edge);
                out.persons.push_back(
                    {id.str(), depart, net.edge_midpoint(oe), net.edge_midpoint(de)});
            } else {
                out.vehicles.push_back({id.str(), cell.mode, depart, origin_edge, dest_edge});
            }
        }
    }
    return out;
}

} // namespace tsim
