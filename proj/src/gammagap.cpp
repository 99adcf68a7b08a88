#include "birkhoff/gammagap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"

namespace birkhoff {

namespace {

// Bounding-box hierarchy over runs of consecutive segments (segment i joins
// starts[i] and ends[i]). Consecutive segments of a curve are close together,
// so index ranges make good boxes even where the sampling is very uneven.
class SegmentTree {
public:
    SegmentTree(std::span<const Point2> starts, std::span<const Point2> ends) : starts_(starts), ends_(ends) {
        if (!starts.empty()) build(0, starts.size());
    }

    bool empty() const { return nodes_.empty(); }

    // Calls f(i, j) for segment pairs with overlapping boxes, i from this tree, j from other.
    template <class F>
    void pairs(const SegmentTree& other, F&& f) const {
        if (!empty() && !other.empty()) visit(0, other, 0, f);
    }

    // Calls f(i, j), i < j, for pairs within this tree.
    template <class F>
    void self_pairs(F&& f) const {
        if (!empty()) visit_self(0, f);
    }

private:
    static constexpr std::size_t leaf = 8;

    struct Node {
        double xmin, xmax, ymin, ymax;
        std::size_t lo, hi;
        std::size_t left = 0, right = 0;  // 0 = leaf (the root is never a child)
    };

    std::size_t build(std::size_t lo, std::size_t hi) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({0, 0, 0, 0, lo, hi});
        if (hi - lo > leaf) {
            const std::size_t mid = lo + (hi - lo) / 2;
            const std::size_t l = build(lo, mid);
            const std::size_t r = build(mid, hi);
            nodes_[id].left = l;
            nodes_[id].right = r;
            Node& n = nodes_[id];
            n.xmin = std::min(nodes_[l].xmin, nodes_[r].xmin);
            n.xmax = std::max(nodes_[l].xmax, nodes_[r].xmax);
            n.ymin = std::min(nodes_[l].ymin, nodes_[r].ymin);
            n.ymax = std::max(nodes_[l].ymax, nodes_[r].ymax);
        } else {
            Node& n = nodes_[id];
            n.xmin = n.ymin = std::numeric_limits<double>::infinity();
            n.xmax = n.ymax = -n.xmin;
            for (std::size_t i = lo; i < hi; ++i) {
                for (const auto& p : {starts_[i], ends_[i]}) {
                    n.xmin = std::min(n.xmin, p.x);
                    n.xmax = std::max(n.xmax, p.x);
                    n.ymin = std::min(n.ymin, p.y);
                    n.ymax = std::max(n.ymax, p.y);
                }
            }
        }
        return id;
    }

    static bool overlap(const Node& a, const Node& b) {
        return a.xmin <= b.xmax && b.xmin <= a.xmax && a.ymin <= b.ymax && b.ymin <= a.ymax;
    }

    template <class F>
    void visit(std::size_t a, const SegmentTree& other, std::size_t b, F& f) const {
        const Node& na = nodes_[a];
        const Node& nb = other.nodes_[b];
        if (!overlap(na, nb)) return;
        const bool leaf_a = na.left == 0, leaf_b = nb.left == 0;
        if (leaf_a && leaf_b) {
            for (std::size_t i = na.lo; i < na.hi; ++i)
                for (std::size_t j = nb.lo; j < nb.hi; ++j) f(i, j);
        } else if (leaf_b || (!leaf_a && na.hi - na.lo >= nb.hi - nb.lo)) {
            visit(na.left, other, b, f);
            visit(na.right, other, b, f);
        } else {
            visit(a, other, nb.left, f);
            visit(a, other, nb.right, f);
        }
    }

    template <class F>
    void visit_self(std::size_t a, F& f) const {
        const Node& n = nodes_[a];
        if (n.left == 0) {
            for (std::size_t i = n.lo; i < n.hi; ++i)
                for (std::size_t j = i + 1; j < n.hi; ++j) f(i, j);
            return;
        }
        visit_self(n.left, f);
        visit_self(n.right, f);
        visit(n.left, *this, n.right, f);
    }

    std::span<const Point2> starts_, ends_;
    std::vector<Node> nodes_;
};

std::vector<Point2> drop_closing_vertex(std::span<const Point2> polygon) {
    std::vector<Point2> pts(polygon.begin(), polygon.end());
    if (pts.size() > 1 && pts.front().x == pts.back().x && pts.front().y == pts.back().y) pts.pop_back();
    return pts;
}

// Periodic graph y = g(x) given over one period by its vertices.
class PeriodicGraph {
public:
    PeriodicGraph(const PolylineCurve& graph, double period) : period_(period) {
        if (graph.size() < 2) throw ConfigError("graph curve needs at least two points");
        if (!(period > 0.0)) throw ConfigError("period must be positive");
        for (std::size_t i = 1; i < graph.size(); ++i)
            if (!(graph.points[i].x > graph.points[i - 1].x))
                throw ConfigError("graph curve must have strictly increasing x");
        const double span = graph.back().x - graph.front().x;
        const double scale = std::max(1.0, std::abs(graph.back().y) + std::abs(graph.front().y));
        if (std::abs(span - period) > 1e-9 * period || std::abs(graph.back().y - graph.front().y) > 1e-9 * scale)
            throw ConfigError("graph curve must cover exactly one period and close up");
        pts_ = graph.points;
        pts_.back() = {pts_.front().x + period, pts_.front().y};
        x0_ = pts_.front().x;
    }

    double period() const { return period_; }
    double x0() const { return x0_; }

    double wrap(double x) const {
        double r = std::fmod(x - x0_, period_);
        if (r < 0.0) r += period_;
        return x0_ + r;
    }

    double operator()(double x) const {
        const double w = wrap(x);
        auto it = std::upper_bound(pts_.begin(), pts_.end(), w, [](double v, const Point2& p) { return v < p.x; });
        const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - pts_.begin()), 1, pts_.size() - 1);
        const Point2 a = pts_[i - 1], b = pts_[i];
        return a.y + (b.y - a.y) * (w - a.x) / (b.x - a.x);
    }

    // Lifted vertices strictly between x_from and x_to, in the direction of travel.
    std::vector<Point2> vertices_between(double x_from, double x_to) const {
        std::vector<Point2> out;
        const double lo = std::min(x_from, x_to), hi = std::max(x_from, x_to);
        const auto k0 = static_cast<long>(std::floor((lo - x0_) / period_)) - 1;
        const auto k1 = static_cast<long>(std::floor((hi - x0_) / period_)) + 1;
        for (long k = k0; k <= k1; ++k) {
            const double shift = static_cast<double>(k) * period_;
            for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
                const double x = pts_[i].x + shift;
                if (x > lo && x < hi) out.push_back({x, pts_[i].y});
            }
        }
        if (x_from > x_to) std::reverse(out.begin(), out.end());
        return out;
    }

private:
    std::vector<Point2> pts_;
    double period_;
    double x0_ = 0.0;
};

// Curve closed after one period: vertex k of the infinite lift.
class PeriodicCurve {
public:
    PeriodicCurve(const PolylineCurve& curve, double period) : period_(period) {
        if (curve.size() < 3) throw ConfigError("curve needs at least three points");
        const Point2 f = curve.front(), l = curve.back();
        const double scale = std::max({1.0, std::abs(f.x), std::abs(f.y)});
        if (std::abs(l.x - f.x - period) > 1e-9 * scale || std::abs(l.y - f.y) > 1e-9 * scale)
            throw ConfigError("curve must close up after one period (last point = first point shifted)");
        pts_.assign(curve.points.begin(), curve.points.end() - 1);
    }

    std::size_t size() const { return pts_.size(); }

    Point2 vertex(long k) const {
        const auto m = static_cast<long>(pts_.size());
        const long q = k >= 0 ? k / m : -((-k + m - 1) / m);
        const Point2 p = pts_[static_cast<std::size_t>(k - q * m)];
        return {p.x + static_cast<double>(q) * period_, p.y};
    }

    Point2 at(double s) const {
        const auto k = static_cast<long>(std::floor(s));
        const double t = s - static_cast<double>(k);
        const Point2 a = vertex(k), b = vertex(k + 1);
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }

private:
    std::vector<Point2> pts_;
    double period_;
};

}  // namespace

std::vector<CurveCrossing> crossings(const PolylineCurve& a, const PolylineCurve& b) {
    std::vector<CurveCrossing> out;
    if (a.size() < 2 || b.size() < 2) return out;
    const std::span<const Point2> ap(a.points), bp(b.points);
    const SegmentTree ta(ap.first(ap.size() - 1), ap.subspan(1));
    const SegmentTree tb(bp.first(bp.size() - 1), bp.subspan(1));
    ta.pairs(tb, [&](std::size_t i, std::size_t j) {
        if (auto c = proper_crossing(ap[i], ap[i + 1], bp[j], bp[j + 1]))
            out.push_back({c->point, static_cast<double>(i) + c->t_a, static_cast<double>(j) + c->t_b});
    });
    std::sort(out.begin(), out.end(), [](const CurveCrossing& x, const CurveCrossing& y) {
        return x.s_a != y.s_a ? x.s_a < y.s_a : x.s_b < y.s_b;
    });
    return out;
}

CurveCrossing first_intersection(const PolylineCurve& a, const PolylineCurve& b, Point2 near, double radius) {
    for (const auto& c : crossings(a, b))
        if (std::hypot(c.point.x - near.x, c.point.y - near.y) <= radius) return c;
    // closest approach between (subsampled) vertices for the diagnostic
    double best = std::numeric_limits<double>::infinity();
    Point2 pa{}, pb{};
    const std::size_t sa = std::max<std::size_t>(1, a.size() / 3000), sb = std::max<std::size_t>(1, b.size() / 3000);
    for (std::size_t i = 0; i < a.size(); i += sa) {
        for (std::size_t j = 0; j < b.size(); j += sb) {
            const double d = std::hypot(a.points[i].x - b.points[j].x, a.points[i].y - b.points[j].y);
            if (d < best) best = d, pa = a.points[i], pb = b.points[j];
        }
    }
    std::ostringstream msg;
    msg << "no transversal crossing within " << radius << " of (" << near.x << ", " << near.y
        << "); closest approach " << best << " between (" << pa.x << ", " << pa.y << ") and (" << pb.x << ", " << pb.y
        << ")";
    throw NotFoundError(msg.str());
}

bool self_intersects(std::span<const Point2> polygon) {
    const auto pts = drop_closing_vertex(polygon);
    const std::size_t n = pts.size();
    if (n < 4) return false;
    std::vector<Point2> ends(n);
    for (std::size_t i = 0; i < n; ++i) ends[i] = pts[(i + 1) % n];
    const SegmentTree tree(pts, ends);
    bool hit = false;
    tree.self_pairs([&](std::size_t i, std::size_t j) {
        if (hit || j == i + 1 || (i == 0 && j == n - 1)) return;  // adjacent edges share a vertex
        hit = segments_touch(pts[i], ends[i], pts[j], ends[j]);
    });
    return hit;
}

double shoelace_area(std::span<const Point2> polygon) {
    const auto pts = drop_closing_vertex(polygon);
    if (pts.size() < 3) throw GeometryError("polygon needs at least three vertices");
    if (self_intersects(pts)) throw GeometryError("polygon is self-intersecting");
    return std::abs(signed_area(pts));
}

double enclosed_area_energy(const HamiltonianModel& model, double alpha, double beta, Point2 meeting) {
    if (!(beta > 0.0) || !(alpha >= beta)) throw ConfigError("need frictions alpha >= beta > 0");
    const double drop = model.H({model.saddle_q(), 0.0}) - model.H({meeting.x, meeting.y});
    if (!(drop > 0.0)) throw ConfigError("meeting point is not below the saddle energy");
    return drop * (1.0 / beta - 1.0 / alpha);
}

double area_over_zero_section(const PolylineCurve& curve) {
    if (curve.size() < 2) throw GeometryError("curve needs at least two points");
    double low = curve.front().y;
    for (const auto& p : curve.points) low = std::min(low, p.y);
    low -= 1.0;
    std::vector<Point2> polygon = curve.points;
    polygon.push_back({curve.back().x, low});
    polygon.push_back({curve.front().x, low});
    if (self_intersects(polygon)) throw GeometryError("curve is not simple over one period");
    return low * (curve.back().x - curve.front().x) - signed_area(polygon);
}

MinAreaRegions min_area_bound(const PolylineCurve& graph, const PolylineCurve& spiral, double period, double near_x) {
    const PeriodicGraph g(graph, period);
    const PeriodicCurve c(spiral, period);
    const auto m = static_cast<long>(c.size());
    auto side = [&](Point2 p) { return p.y - g(p.x) >= 0.0; };

    struct Hit {
        double s;
        Point2 point;
        double key;
    };
    std::vector<Hit> hits;
    for (long k = 0; k < m; ++k) {
        const Point2 p = c.vertex(k), q = c.vertex(k + 1);
        const bool sp = side(p);
        if (sp == side(q)) continue;
        double lo = 0.0, hi = 1.0;
        auto point = [&](double t) { return Point2{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)}; };
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (side(point(mid)) == sp ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        const Point2 x = point(t);
        hits.push_back({static_cast<double>(k) + t, x, g.wrap(x.x)});
    }
    if (hits.size() < 2) throw ConfigError("curve meets the graph fewer than twice per period");
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.key < b.key; });

    auto circular = [&](double a, double b) {
        const double d = std::abs(g.wrap(a) - g.wrap(b));
        return std::min(d, period - d);
    };
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < hits.size(); ++i)
        if (circular(hits[i].key, near_x) < circular(hits[i0].key, near_x)) i0 = i;
    const std::size_t n = hits.size();
    const std::size_t im = (i0 + n - 1) % n, ip = (i0 + 1) % n;

    // spiral from hit i forward to hit j, back along the graph
    auto region = [&](std::size_t i, std::size_t j) {
        const double s0 = hits[i].s;
        double s1 = hits[j].s;
        if (s1 <= s0) s1 += static_cast<double>(m);
        std::vector<Point2> loop{c.at(s0)};
        for (auto k = static_cast<long>(std::floor(s0)) + 1; static_cast<double>(k) < s1; ++k) loop.push_back(c.vertex(k));
        const Point2 end = c.at(s1);
        loop.push_back(end);
        for (const auto& v : g.vertices_between(end.x, loop.front().x)) loop.push_back(v);
        return std::abs(signed_area(loop));
    };

    MinAreaRegions r;
    r.a = region(i0, im);
    r.a_prime = region(i0, ip);
    r.b = region(ip, i0);
    r.b_prime = region(im, i0);
    r.min = std::min({r.a, r.a_prime, r.b, r.b_prime});
    r.t0 = hits[i0].point;
    r.t_minus = hits[im].point;
    r.t_plus = hits[ip].point;
    return r;
}

GapMeasurement measure_gap(double alpha, double beta, const GapOptions& options) {
    if (!(beta > 0.0) || !(alpha > beta)) throw ConfigError("need frictions alpha > beta > 0");
    constexpr double pi = std::numbers::pi;
    const auto weak = HamiltonianModel::pendulum(beta);
    const auto strong = HamiltonianModel::pendulum(alpha);
    // upper branch of the weak spiral from (-pi, 0), lower branch of the strong one from (pi, 0)
    const auto upper = shoot_heteroclinic(weak, Side::right, options.shoot).curve.shifted(-2.0 * pi);
    const auto lower = shoot_heteroclinic(strong, Side::left, options.shoot).curve;
    GapMeasurement g;
    g.alpha = alpha;
    g.beta = beta;
    g.crossing = first_intersection(upper, lower, {pi, 0.0}, options.search_radius);
    g.energy_drop = strong.H({strong.saddle_q(), 0.0}) - strong.H({g.crossing.point.x, g.crossing.point.y});
    g.area_energy = enclosed_area_energy(strong, alpha, beta, g.crossing.point);

    PolylineCurve closed = upper.slice(0.0, g.crossing.s_a);
    const auto back = lower.slice(0.0, g.crossing.s_b).reversed();
    closed.points.insert(closed.points.end(), back.points.begin() + 1, back.points.end());
    g.area_shoelace = area_over_zero_section(closed);
    g.bound_8 = 8.0 * (1.0 - beta / alpha);
    g.bound_4 = 4.0 * (1.0 - beta / alpha);
    return g;
}

void write_gap_table(const std::string& path, std::span<const GapMeasurement> rows) {
    io::CsvWriter csv(path, {"alpha", "beta", "C", "area_energy", "area_shoelace", "bound_8", "bound_4", "theta",
                             "p"});
    for (const auto& r : rows)
        csv.row({r.alpha, r.beta, r.energy_drop, r.area_energy, r.area_shoelace, r.bound_8, r.bound_4,
                 r.crossing.point.x, r.crossing.point.y});
}

}  // namespace birkhoff
