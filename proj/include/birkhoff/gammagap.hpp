#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "birkhoff/flow.hpp"
#include "birkhoff/geometry.hpp"
#include "birkhoff/models.hpp"

namespace birkhoff {

struct CurveCrossing {
    Point2 point;
    double s_a = 0.0;  // fractional vertex parameter along the first curve
    double s_b = 0.0;  // same along the second curve
};

// All transversal crossings of two polylines, ordered by s_a.
std::vector<CurveCrossing> crossings(const PolylineCurve& a, const PolylineCurve& b);

// Earliest crossing along `a` among those within `radius` of `near`.
// Throws NotFoundError (with the closest approach in the message) when there is none.
CurveCrossing first_intersection(const PolylineCurve& a, const PolylineCurve& b, Point2 near,
                                 double radius = std::numeric_limits<double>::infinity());

// True when two non-adjacent edges of the closed polygon touch.
bool self_intersects(std::span<const Point2> polygon);

// Unsigned area of a closed simple polygon (the closing edge is implicit; a
// repeated first vertex is dropped). Throws GeometryError on self-intersection.
double shoelace_area(std::span<const Point2> polygon);

// Area swept between the two separatrix arcs of a damped pendulum pair that
// meet at `meeting`: C * (1/beta - 1/alpha) with C the energy drop from the saddle.
double enclosed_area_energy(const HamiltonianModel& model, double alpha, double beta, Point2 meeting);

// A curve that closes up after one period in the lift, measured against the
// zero section: the signed integral of p dtheta, computed as the shoelace area
// of the polygon closed through a baseline under the curve.
double area_over_zero_section(const PolylineCurve& curve);

struct MinAreaRegions {
    double a = 0.0;        // t0 -> t-
    double a_prime = 0.0;  // t0 -> t+
    double b = 0.0;        // t+ -> t0
    double b_prime = 0.0;  // t- -> t0
    double min = 0.0;
    Point2 t0, t_minus, t_plus;
};

// `graph` is a graph over one period [x0, x0 + period] (last point = first point
// shifted by one period); `spiral` is a curve closed in the same way. Crossings
// are taken in the order of the graph; t0 is the crossing nearest to `near_x`
// and t-/t+ its neighbours (which may be the same point of the annulus). Each
// region is bounded by the graph and the spiral arc followed in its own
// orientation between the two crossings. Throws ConfigError when the spiral
// meets the graph fewer than twice per period.
MinAreaRegions min_area_bound(const PolylineCurve& graph, const PolylineCurve& spiral, double period, double near_x);

struct GapOptions {
    ShootConfig shoot = [] {
        ShootConfig c;
        c.truncate_time = 80.0;
        c.resample = 0;
        return c;
    }();
    // Only crossings within this distance of the saddle are considered.
    double search_radius = std::numeric_limits<double>::infinity();
};

struct GapMeasurement {
    double alpha = 0.0;
    double beta = 0.0;
    CurveCrossing crossing;
    double energy_drop = 0.0;  // C
    double area_energy = 0.0;
    double area_shoelace = 0.0;
    double bound_8 = 0.0;  // 8 (1 - beta/alpha)
    double bound_4 = 0.0;  // 4 (1 - beta/alpha)
};

// Damped pendulum with frictions alpha > beta: the upper branch for beta (from
// the left copy of the saddle) and the lower branch for alpha (from the right
// copy), cut at their first crossing near the saddle.
GapMeasurement measure_gap(double alpha, double beta, const GapOptions& options = {});

void write_gap_table(const std::string& path, std::span<const GapMeasurement> rows);

}  // namespace birkhoff
