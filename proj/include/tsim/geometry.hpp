#pragma once

#include <cmath>
#include <vector>

namespace tsim {

/// Planar coordinate in meters (local projection).
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) {
        return a.x == b.x && a.y == b.y;
    }
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline Point midpoint(const Point& a, const Point& b) {
    return {(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
}

/// Projection of p onto segment [a,b]: parameter t in [0,1] and distance.
struct SegmentProjection {
    double t = 0.0;
    double dist = 0.0;
};

inline SegmentProjection project_to_segment(const Point& p, const Point& a, const Point& b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
        if (t < 0.0) t = 0.0;
        if (t > 1.0) t = 1.0;
    }
    Point q{a.x + t * dx, a.y + t * dy};
    return {t, distance(p, q)};
}

enum class PolygonLocation { outside, boundary, inside };

/// Ray-crossing test with an explicit boundary band of width eps.
/// The polygon ring closes implicitly (last vertex connects to the first).
inline PolygonLocation locate_in_polygon(const Point& p, const std::vector<Point>& ring,
                                         double eps = 1e-9) {
    size_t n = ring.size();
    if (n < 3) return PolygonLocation::outside;
    for (size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        if (project_to_segment(p, a, b).dist <= eps) return PolygonLocation::boundary;
    }
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xint) inside = !inside;
        }
    }
    return inside ? PolygonLocation::inside : PolygonLocation::outside;
}

} // namespace tsim
