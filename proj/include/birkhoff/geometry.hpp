#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace birkhoff {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Ordered samples of a curve in the lift of the annulus (x = angle, y = momentum).
struct PolylineCurve {
    std::vector<Point2> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Point2& front() const { return points.front(); }
    const Point2& back() const { return points.back(); }
    double length() const;
    // Point at a fractional segment parameter s in [0, size-1].
    Point2 at(double s) const;
    // Same curve resampled at `count` points uniformly spaced in arclength.
    PolylineCurve resampled(std::size_t count) const;
    PolylineCurve shifted(double dx, double dy = 0.0) const;
    PolylineCurve reversed() const;
    // Sub-curve between fractional parameters s0 <= s1, endpoints interpolated.
    PolylineCurve slice(double s0, double s1) const;
};

// Sign of the orientation of (a, b, c): +1 counter-clockwise, -1 clockwise,
// 0 collinear. Exact for all finite doubles.
int orient2d(Point2 a, Point2 b, Point2 c);
// Floating value of the orientation determinant (not exact).
double orient2d_value(Point2 a, Point2 b, Point2 c);

struct SegmentCrossing {
    Point2 point;
    double t_a;  // parameter along the first segment
    double t_b;  // parameter along the second segment
};

// Transversal (proper) crossing of segments ab and cd, decided with exact orientations.
std::optional<SegmentCrossing> proper_crossing(Point2 a, Point2 b, Point2 c, Point2 d);
// Any contact between segments ab and cd, including touching and overlap.
bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d);

// Signed shoelace area of the closed polygon (counter-clockwise positive), no checks.
double signed_area(std::span<const Point2> polygon);

}  // namespace birkhoff
