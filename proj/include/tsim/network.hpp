#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "tsim/common.hpp"
#include "tsim/geometry.hpp"

#include <nlohmann/json.hpp>

namespace tsim {

struct RoadNode {
    std::string id;
    Point coord;
};

struct RoadEdge {
    std::string id;
    int from_node = -1;
    int to_node = -1;
    double length_m = 0.0;
    double speed_limit_mps = 0.0;
    int lane_count = 1;
};

/// Directed road graph. Immutable after load; all queries are read-only.
class RoadNetwork {
public:
    std::vector<RoadNode> nodes;
    std::vector<RoadEdge> edges;
    std::map<std::string, int> node_index;
    std::map<std::string, int> edge_index;
    std::vector<std::vector<int>> out_edges;  // node -> outgoing edge indices
    std::vector<std::vector<int>> in_edges;   // node -> incoming edge indices
    std::vector<Diagnostic> diagnostics;      // dead ends, disconnected components

    const RoadEdge& edge(int i) const { return edges[(size_t)i]; }

    int edge_idx(const std::string& id) const {
        auto it = edge_index.find(id);
        return it == edge_index.end() ? -1 : it->second;
    }

    const RoadEdge* find_edge(const std::string& id) const {
        int i = edge_idx(id);
        return i < 0 ? nullptr : &edges[(size_t)i];
    }

    Point edge_from(const RoadEdge& e) const { return nodes[(size_t)e.from_node].coord; }
    Point edge_to(const RoadEdge& e) const { return nodes[(size_t)e.to_node].coord; }
    Point edge_midpoint(const RoadEdge& e) const { return midpoint(edge_from(e), edge_to(e)); }

    Point point_at(const RoadEdge& e, double offset_m) const {
        double t = e.length_m > 0 ? offset_m / e.length_m : 0.0;
        if (t < 0) t = 0;
        if (t > 1) t = 1;
        Point a = edge_from(e), b = edge_to(e);
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }

    double free_flow_time(int edge) const {
        const RoadEdge& e = edges[(size_t)edge];
        return e.length_m / e.speed_limit_mps;
    }

    /// Edge ids sorted lexicographically; canonical iteration order.
    std::vector<int> sorted_edge_order() const {
        std::vector<int> order;
        order.reserve(edges.size());
        for (const auto& [id, idx] : edge_index) order.push_back(idx);
        return order;
    }
};

namespace detail {

inline void attach_connectivity_diagnostics(RoadNetwork& net) {
    // Dead ends: nodes a vehicle cannot leave or cannot reach.
    for (size_t n = 0; n < net.nodes.size(); ++n) {
        bool no_out = net.out_edges[n].empty();
        bool no_in = net.in_edges[n].empty();
        if (no_out && no_in) continue;  // isolated node, reported with components
        if (no_out)
            net.diagnostics.push_back({Severity::warning, {}, {},
                                       "dead end: node '" + net.nodes[n].id + "' has no outgoing edge"});
        if (no_in)
            net.diagnostics.push_back({Severity::warning, {}, {},
                                       "dead end: node '" + net.nodes[n].id + "' has no incoming edge"});
    }
    // Weakly connected components over nodes touched by at least one edge.
    std::vector<int> comp(net.nodes.size(), -1);
    std::vector<std::vector<int>> undirected(net.nodes.size());
    std::vector<bool> touched(net.nodes.size(), false);
    for (const auto& e : net.edges) {
        undirected[(size_t)e.from_node].push_back(e.to_node);
        undirected[(size_t)e.to_node].push_back(e.from_node);
        touched[(size_t)e.from_node] = touched[(size_t)e.to_node] = true;
    }
    int ncomp = 0;
    std::vector<std::pair<int, std::string>> comps;  // size, representative node id
    for (size_t s = 0; s < net.nodes.size(); ++s) {
        if (!touched[s] || comp[s] >= 0) continue;
        int size = 0;
        std::queue<int> q;
        q.push((int)s);
        comp[s] = ncomp;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            ++size;
            for (int v : undirected[(size_t)u])
                if (comp[(size_t)v] < 0) {
                    comp[(size_t)v] = ncomp;
                    q.push(v);
                }
        }
        comps.emplace_back(size, net.nodes[s].id);
        ++ncomp;
    }
    if (ncomp > 1) {
        for (const auto& [size, rep] : comps) {
            std::ostringstream os;
            os << "disconnected component: " << size << " node(s), e.g. '" << rep << "'";
            net.diagnostics.push_back({Severity::warning, {}, {}, os.str()});
        }
    }
}

} // namespace detail

/// Parse the flat text network format:
///   node <id> <x> <y>
///   edge <id> <from> <to> <length_m> <speed_mps> <lanes>
/// '#' starts a comment; blank lines are skipped.
inline RoadNetwork parse_network(std::istream& in, const std::string& source_name) {
    RoadNetwork net;
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
        if (fields[0] == "node") {
            if (fields.size() != 4) fail("malformed node record (want: node id x y)");
            auto x = parse_double(fields[2]), y = parse_double(fields[3]);
            if (!x || !y) fail("malformed node coordinate");
            if (net.node_index.count(fields[1])) fail("duplicate node id '" + fields[1] + "'");
            net.node_index[fields[1]] = (int)net.nodes.size();
            net.nodes.push_back({fields[1], {*x, *y}});
        } else if (fields[0] == "edge") {
            if (fields.size() != 7)
                fail("malformed edge record (want: edge id from to length speed lanes)");
            auto len = parse_double(fields[4]);
            auto spd = parse_double(fields[5]);
            auto lanes = parse_long(fields[6]);
            if (!len || !spd || !lanes) fail("malformed edge number");
            if (net.edge_index.count(fields[1])) fail("duplicate edge id '" + fields[1] + "'");
            auto from = net.node_index.find(fields[2]);
            auto to = net.node_index.find(fields[3]);
            if (from == net.node_index.end()) fail("edge references unknown node '" + fields[2] + "'");
            if (to == net.node_index.end()) fail("edge references unknown node '" + fields[3] + "'");
            if (*len <= 0) fail("edge '" + fields[1] + "' has nonpositive length");
            if (*spd <= 0) fail("edge '" + fields[1] + "' has nonpositive speed limit");
            if (*lanes < 1) fail("edge '" + fields[1] + "' has lane count < 1");
            double chord = distance(net.nodes[(size_t)from->second].coord,
                                    net.nodes[(size_t)to->second].coord);
            if (*len < chord * 0.999)
                fail("edge '" + fields[1] + "' is shorter than the straight line between its nodes");
            net.edge_index[fields[1]] = (int)net.edges.size();
            net.edges.push_back({fields[1], from->second, to->second, *len, *spd, (int)*lanes});
        } else {
            fail("unknown record type '" + fields[0] + "'");
        }
    }
    net.out_edges.assign(net.nodes.size(), {});
    net.in_edges.assign(net.nodes.size(), {});
    for (size_t i = 0; i < net.edges.size(); ++i) {
        net.out_edges[(size_t)net.edges[i].from_node].push_back((int)i);
        net.in_edges[(size_t)net.edges[i].to_node].push_back((int)i);
    }
    detail::attach_connectivity_diagnostics(net);
    return net;
}

inline RoadNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file '" + path + "'");
    return parse_network(in, path);
}

inline void save_network(const RoadNetwork& net, std::ostream& out) {
    for (const auto& n : net.nodes)
        out << "node " << n.id << ' ' << fmt_double(n.coord.x) << ' ' << fmt_double(n.coord.y) << '\n';
    for (const auto& e : net.edges)
        out << "edge " << e.id << ' ' << net.nodes[(size_t)e.from_node].id << ' '
            << net.nodes[(size_t)e.to_node].id << ' ' << fmt_double(e.length_m) << ' '
            << fmt_double(e.speed_limit_mps) << ' ' << e.lane_count << '\n';
}

inline void save_network(const RoadNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write network file '" + path + "'");
    save_network(net, out);
}

// ---------------------------------------------------------------------------
// TAZ partition
// ---------------------------------------------------------------------------

struct TazPartition {
    std::map<std::string, std::vector<Point>> zones;
    std::map<std::string, std::string> edge_membership;       // edge id -> taz id
    std::map<std::string, std::vector<std::string>> members;  // taz id -> edge ids (sorted)
    std::vector<Diagnostic> diagnostics;                      // unassigned edges
};

/// Assign each edge to the TAZ containing its midpoint. Containment is
/// boundary-inclusive; when several zones contain the midpoint the
/// lexicographically smallest taz id wins.
inline TazPartition assign_edges_to_taz(const RoadNetwork& net,
                                        const std::map<std::string, std::vector<Point>>& zones) {
    TazPartition part;
    part.zones = zones;
    for (int ei : net.sorted_edge_order()) {
        const RoadEdge& e = net.edges[(size_t)ei];
        Point mid = net.edge_midpoint(e);
        std::optional<std::string> chosen;
        for (const auto& [taz, ring] : zones) {  // std::map: ids ascending
            if (locate_in_polygon(mid, ring) != PolygonLocation::outside) {
                chosen = taz;
                break;
            }
        }
        if (chosen) {
            part.edge_membership[e.id] = *chosen;
            part.members[*chosen].push_back(e.id);
        } else {
            part.diagnostics.push_back({Severity::info, {}, {},
                                        "edge '" + e.id + "' lies outside every TAZ"});
        }
    }
    return part;
}

inline std::map<std::string, std::vector<Point>> parse_taz_json(const nlohmann::json& j) {
    std::map<std::string, std::vector<Point>> zones;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::vector<Point> ring;
        for (const auto& pt : it.value()) ring.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        if (ring.size() < 3) throw ModelError("TAZ '" + it.key() + "' has fewer than 3 vertices");
        zones[it.key()] = std::move(ring);
    }
    return zones;
}

inline std::map<std::string, std::vector<Point>> load_taz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open TAZ file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("TAZ file '" + path + "': " + e.what());
    }
    return parse_taz_json(j);
}

// ---------------------------------------------------------------------------
// Coordinate snapping
// ---------------------------------------------------------------------------

struct SnapResult {
    std::string edge_id;
    double offset_m = 0.0;
    double distance_m = 0.0;
};

/// Nearest edge within max_radius_m, by perpendicular distance to the edge
/// chord. Distances within 1e-9 of the minimum tie-break to the smaller
/// edge id. Returns nullopt when no edge is in range.
inline std::optional<SnapResult> snap_to_edge(const RoadNetwork& net, const Point& coord,
                                              double max_radius_m) {
    constexpr double kTie = 1e-9;
    std::optional<SnapResult> best;
    for (int ei : net.sorted_edge_order()) {
        const RoadEdge& e = net.edges[(size_t)ei];
        auto proj = project_to_segment(coord, net.edge_from(e), net.edge_to(e));
        if (proj.dist > max_radius_m) continue;
        if (!best || proj.dist < best->distance_m - kTie)
            best = SnapResult{e.id, proj.t * e.length_m, proj.dist};
        // ids ascend, so an existing best within the tie band keeps priority
    }
    return best;
}

} // namespace tsim
