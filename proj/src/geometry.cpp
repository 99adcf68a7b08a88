#include "birkhoff/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "birkhoff/error.hpp"

namespace birkhoff {

namespace {

inline void two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
    x = a * b;
    y = std::fma(a, b, -x);
}

// Exact sign of the sum of the terms, by growing a nonoverlapping expansion.
int exact_sign(std::span<const double> terms) {
    std::array<double, 24> e{};
    std::size_t len = 0;
    for (double b : terms) {
        double q = b;
        for (std::size_t i = 0; i < len; ++i) {
            double s, h;
            two_sum(q, e[i], s, h);
            e[i] = h;
            q = s;
        }
        e[len++] = q;
    }
    for (std::size_t i = len; i-- > 0;) {
        if (e[i] > 0.0) return 1;
        if (e[i] < 0.0) return -1;
    }
    return 0;
}

}  // namespace

double orient2d_value(Point2 a, Point2 b, Point2 c) {
    return (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
}

int orient2d(Point2 a, Point2 b, Point2 c) {
    const double left = (a.x - c.x) * (b.y - c.y);
    const double right = (a.y - c.y) * (b.x - c.x);
    const double det = left - right;
    const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    std::array<double, 12> t{};
    two_product(a.x, b.y, t[0], t[1]);
    two_product(-a.x, c.y, t[2], t[3]);
    two_product(-c.x, b.y, t[4], t[5]);
    two_product(-a.y, b.x, t[6], t[7]);
    two_product(a.y, c.x, t[8], t[9]);
    two_product(c.y, b.x, t[10], t[11]);
    return exact_sign(t);
}

std::optional<SegmentCrossing> proper_crossing(Point2 a, Point2 b, Point2 c, Point2 d) {
    const int o1 = orient2d(c, d, a), o2 = orient2d(c, d, b);
    if (o1 * o2 >= 0) return std::nullopt;
    const int o3 = orient2d(a, b, c), o4 = orient2d(a, b, d);
    if (o3 * o4 >= 0) return std::nullopt;
    const double v1 = orient2d_value(c, d, a), v2 = orient2d_value(c, d, b);
    const double v3 = orient2d_value(a, b, c), v4 = orient2d_value(a, b, d);
    const double ta = std::clamp(v1 / (v1 - v2), 0.0, 1.0);
    const double tb = std::clamp(v3 / (v3 - v4), 0.0, 1.0);
    return SegmentCrossing{{a.x + ta * (b.x - a.x), a.y + ta * (b.y - a.y)}, ta, tb};
}

namespace {

bool on_segment(Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
    const int o1 = orient2d(a, b, c), o2 = orient2d(a, b, d), o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double signed_area(std::span<const Point2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    // Shift to the first vertex to limit cancellation.
    const Point2 o = polygon[0];
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = polygon[i], q = polygon[(i + 1) % n];
        twice += (p.x - o.x) * (q.y - o.y) - (q.x - o.x) * (p.y - o.y);
    }
    return 0.5 * twice;
}

double PolylineCurve::length() const {
    double L = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        L += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    return L;
}

Point2 PolylineCurve::at(double s) const {
    if (points.empty()) throw GeometryError("empty polyline");
    const double last = static_cast<double>(points.size() - 1);
    s = std::clamp(s, 0.0, last);
    const auto i = std::min(static_cast<std::size_t>(s), points.size() - 1);
    if (i + 1 >= points.size()) return points.back();
    const double t = s - static_cast<double>(i);
    return {points[i].x + t * (points[i + 1].x - points[i].x), points[i].y + t * (points[i + 1].y - points[i].y)};
}

PolylineCurve PolylineCurve::resampled(std::size_t count) const {
    if (points.size() < 2 || count < 2) return *this;
    std::vector<double> cum(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i)
        cum[i] = cum[i - 1] + std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    PolylineCurve out;
    out.points.reserve(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double target = cum.back() * static_cast<double>(k) / static_cast<double>(count - 1);
        while (seg + 2 < points.size() && cum[seg + 1] < target) ++seg;
        const double span = cum[seg + 1] - cum[seg];
        const double t = span > 0.0 ? std::clamp((target - cum[seg]) / span, 0.0, 1.0) : 0.0;
        out.points.push_back({points[seg].x + t * (points[seg + 1].x - points[seg].x),
                              points[seg].y + t * (points[seg + 1].y - points[seg].y)});
    }
    out.points.back() = points.back();
    return out;
}

PolylineCurve PolylineCurve::shifted(double dx, double dy) const {
    PolylineCurve out = *this;
    for (auto& p : out.points) p.x += dx, p.y += dy;
    return out;
}

PolylineCurve PolylineCurve::reversed() const {
    PolylineCurve out = *this;
    std::reverse(out.points.begin(), out.points.end());
    return out;
}

PolylineCurve PolylineCurve::slice(double s0, double s1) const {
    if (points.empty()) throw GeometryError("empty polyline");
    const double last = static_cast<double>(points.size() - 1);
    s0 = std::clamp(s0, 0.0, last);
    s1 = std::clamp(s1, s0, last);
    PolylineCurve out;
    out.points.push_back(at(s0));
    for (auto i = static_cast<std::size_t>(std::floor(s0)) + 1; static_cast<double>(i) < s1; ++i)
        out.points.push_back(points[i]);
    out.points.push_back(at(s1));
    return out;
}

}  // namespace birkhoff
