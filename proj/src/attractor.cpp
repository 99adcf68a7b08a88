#include "birkhoff/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/parallel.hpp"

namespace birkhoff {

AnnulusMap annulus_map(const TimeMap& map, std::size_t workers) {
    return {[map, workers](std::span<double> q, std::span<double> p, Direction d) { map.apply(q, p, d, workers); },
            map.model().period()};
}

void check_absorbing(const AnnulusMap& map, const BitmapGeometry& domain, std::size_t samples) {
    samples = std::max<std::size_t>(samples, 1);
    std::vector<double> q(2 * samples), p(2 * samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double theta = domain.theta0 + domain.period * static_cast<double>(k) / static_cast<double>(samples);
        q[k] = q[samples + k] = theta;
        p[k] = domain.p_min;
        p[samples + k] = domain.p_max;
    }
    map.apply(q, p, Direction::forward);
    for (std::size_t k = 0; k < 2 * samples; ++k) {
        if (!(p[k] > domain.p_min) || !(p[k] < domain.p_max)) {
            const double theta = domain.theta0 + domain.period * static_cast<double>(k % samples) / static_cast<double>(samples);
            throw DomainNotAbsorbing("image of boundary point (" + io::format_double(theta) + ", " +
                                     io::format_double(k < samples ? domain.p_min : domain.p_max) +
                                     ") has p = " + io::format_double(p[k]) + ", outside the open domain");
        }
    }
}

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Counter-clockwise convex hull of up to four points (monotone chain).
std::size_t small_hull(std::array<Point2, 4>& pts, std::size_t n, std::array<Point2, 8>& hull) {
    std::sort(pts.begin(), pts.begin() + static_cast<long>(n),
              [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    return n == 1 ? 1 : k - 1;
}

// Open-interior overlap of a convex counter-clockwise polygon and a rectangle.
bool hull_meets_rect(const std::array<Point2, 8>& hull, std::size_t m, double x0, double x1, double y0, double y1) {
    if (m == 1) return hull[0].x >= x0 && hull[0].x < x1 && hull[0].y >= y0 && hull[0].y < y1;
    const Point2 corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (std::size_t e = 0; e < m; ++e) {
        const Point2 a = hull[e], b = hull[(e + 1) % m];
        bool all_right = true, all_left = true;
        for (const auto& c : corners) {
            const double s = cross(a, b, c);
            all_right = all_right && s <= 0.0;
            all_left = all_left && s >= 0.0;
        }
        // a segment (m == 2) has no interior side, so either half-plane separates
        if (all_right || (m == 2 && all_left)) return false;
    }
    return true;
}

}  // namespace

namespace {

C0Result escape_time(const AnnulusMap& map, const AnnulusBitmap& domain, std::size_t n_max) {
    const auto& g = domain.geometry();
    std::vector<std::size_t> alive;
    std::vector<double> q, p;
    for (std::size_t j = 0; j < g.n_p; ++j) {
        for (std::size_t i = 0; i < g.n_theta; ++i) {
            alive.push_back(j * g.n_theta + i);
            q.push_back(domain.theta_center(i));
            p.push_back(domain.p_center(j));
        }
    }
    C0Result result{AnnulusBitmap(g), 0, false, {}};
    for (std::size_t step = 1; step <= n_max && !alive.empty(); ++step) {
        map.apply(q, p, Direction::backward);
        std::size_t kept = 0;
        for (std::size_t k = 0; k < alive.size(); ++k) {
            // blow-up comes back as NaN and fails the test
            if (!(p[k] >= g.p_min && p[k] <= g.p_max) || !std::isfinite(q[k])) continue;
            alive[kept] = alive[k];
            q[kept] = q[k];
            p[kept] = p[k];
            ++kept;
        }
        result.fixpoint = kept == alive.size();
        alive.resize(kept);
        q.resize(kept);
        p.resize(kept);
        result.iterations = step;
        result.counts.push_back(kept);
    }
    for (auto k : alive) result.cells.set(k % g.n_theta, k / g.n_theta);
    return result;
}

}  // namespace

C0Result compute_c0(const AnnulusMap& map, const BitmapGeometry& domain, const C0Options& options) {
    if (options.n_max == 0) throw ConfigError("n_max must be at least 1");
    if (std::abs(map.period - domain.period) > 1e-12 * domain.period)
        throw ConfigError("bitmap period does not match the map period");
    AnnulusBitmap current(domain, true);
    check_absorbing(map, domain, options.boundary_samples);
    if (options.method == C0Method::escape_time) return escape_time(map, current, options.n_max);
    const std::size_t nt = domain.n_theta, np = domain.n_p;
    const double cw = current.cell_width(), ch = current.cell_height();

    std::vector<double> vq(nt * (np + 1)), vp(nt * (np + 1));
    for (std::size_t j = 0; j <= np; ++j) {
        for (std::size_t i = 0; i < nt; ++i) {
            vq[j * nt + i] = domain.theta0 + static_cast<double>(i) * cw;
            vp[j * nt + i] = domain.p_min + static_cast<double>(j) * ch;
        }
    }
    map.apply(vq, vp, Direction::backward);
    auto vertex = [&](std::size_t i, std::size_t j) {
        if (i == nt) return Point2{vq[j * nt] + domain.period, vp[j * nt]};
        return Point2{vq[j * nt + i], vp[j * nt + i]};
    };

    C0Result result{current, 0, false, {}};
    for (std::size_t step = 1; step <= options.n_max; ++step) {
        AnnulusBitmap next(domain);
        for (std::size_t j = 0; j < np; ++j) {
            for (std::size_t i = 0; i < nt; ++i) {
                if (!current.get(i, j)) continue;
                std::array<Point2, 4> pts;
                std::size_t n = 0;
                for (const auto& v : {vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)})
                    if (std::isfinite(v.x) && std::isfinite(v.y)) pts[n++] = v;
                if (n == 0) continue;
                double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
                for (std::size_t k = 1; k < n; ++k) {
                    xmin = std::min(xmin, pts[k].x);
                    xmax = std::max(xmax, pts[k].x);
                    ymin = std::min(ymin, pts[k].y);
                    ymax = std::max(ymax, pts[k].y);
                }
                if (ymax < domain.p_min || ymin >= domain.p_max) continue;
                std::array<Point2, 8> hull;
                const std::size_t m = small_hull(pts, n, hull);
                const long ia = static_cast<long>(std::floor((xmin - domain.theta0) / cw));
                const long ib = std::min(static_cast<long>(std::floor((xmax - domain.theta0) / cw)),
                                         ia + static_cast<long>(nt) - 1);
                const auto ja = static_cast<std::size_t>(std::max(0.0, std::floor((ymin - domain.p_min) / ch)));
                const auto jb = std::min(np - 1, static_cast<std::size_t>(std::max(0.0, std::floor((ymax - domain.p_min) / ch))));
                bool hit = false;
                for (std::size_t jj = ja; jj <= jb && !hit; ++jj) {
                    const double y0 = domain.p_min + static_cast<double>(jj) * ch;
                    for (long ii = ia; ii <= ib && !hit; ++ii) {
                        const long wrapped = ((ii % static_cast<long>(nt)) + static_cast<long>(nt)) % static_cast<long>(nt);
                        if (!current.get(static_cast<std::size_t>(wrapped), jj)) continue;
                        const double x0 = domain.theta0 + static_cast<double>(ii) * cw;
                        hit = hull_meets_rect(hull, m, x0, x0 + cw, y0, y0 + ch);
                    }
                }
                if (hit) next.set(i, j);
            }
        }
        result.iterations = step;
        result.counts.push_back(next.count());
        const bool same = next == current;
        current = std::move(next);
        if (same) {
            result.fixpoint = true;
            if (options.stop_at_fixpoint) break;
        }
    }
    result.cells = std::move(current);
    return result;
}

namespace {

struct Components {
    AnnulusBitmap upper, lower;
    bool separates = false;
};

Components components(const AnnulusBitmap& c0) {
    const auto free = c0.complement();
    Components c{free.flood_from_top(), free.flood_from_bottom()};
    if (c.upper.empty() || c.lower.empty())
        throw DegenerateDomain("complement of the invariant set does not reach both p edges of the domain");
    c.separates = (c.upper & c.lower).empty();
    return c;
}

// Cells touching neither side are unresolved rather than hair, provided the
// cluster they form borders both sides; a blob sunk into one side is hair.
AnnulusBitmap interior_reaching_both(const AnnulusBitmap& c0, const std::vector<std::uint32_t>& du,
                                     const std::vector<std::uint32_t>& dl) {
    const std::size_t nt = c0.n_theta(), np = c0.n_p();
    auto inner = [&](std::size_t k) { return c0.data()[k] != 0 && std::min(du[k], dl[k]) >= 2; };
    AnnulusBitmap kept(c0.geometry());
    std::vector<std::uint8_t> seen(nt * np, 0);
    std::vector<std::size_t> cluster, stack;
    for (std::size_t start = 0; start < nt * np; ++start) {
        if (seen[start] || !inner(start)) continue;
        cluster.clear();
        stack.assign(1, start);
        seen[start] = 1;
        bool up = false, low = false;
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            cluster.push_back(k);
            const std::size_t i = k % nt, j = k / nt;
            for (int dj = -1; dj <= 1; ++dj) {
                if ((dj < 0 && j == 0) || (dj > 0 && j + 1 >= np)) continue;
                for (int di = -1; di <= 1; ++di) {
                    const std::size_t m = static_cast<std::size_t>(static_cast<long>(j) + dj) * nt + (i + nt + static_cast<std::size_t>(di + 1) - 1) % nt;
                    up = up || du[m] == 1;
                    low = low || dl[m] == 1;
                    if (!seen[m] && inner(m)) {
                        seen[m] = 1;
                        stack.push_back(m);
                    }
                }
            }
        }
        if (up && low)
            for (auto k : cluster) kept.set(k % nt, k / nt);
    }
    return kept;
}

C1Result strip_hair(const AnnulusBitmap& c0, AnnulusBitmap upper, AnnulusBitmap lower, bool separates,
                    const C1Options& options) {
    if (options.rule == HairRule::adjacency) {
        auto cells = c0 & upper.dilated(options.radius) & lower.dilated(options.radius);
        return {std::move(cells), std::move(upper), std::move(lower), separates};
    }
    const auto du = upper.chebyshev_distance();
    const auto dl = lower.chebyshev_distance();
    const std::size_t nt = c0.n_theta(), np = c0.n_p();
    const auto deep = interior_reaching_both(c0, du, dl);
    AnnulusBitmap cells(c0.geometry());
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < nt; ++i) {
            const std::size_t k = j * nt + i;
            if (!c0.get(i, j)) continue;
            const long diff = static_cast<long>(du[k]) - static_cast<long>(dl[k]);
            bool keep = diff == 0 || deep.get(i, j);
            if (!keep && (diff == 1 || diff == -1)) {
                // an even-thickness band: the cell across the middle has the mirrored distances
                for (int dj = -1; dj <= 1 && !keep; ++dj) {
                    if ((dj < 0 && j == 0) || (dj > 0 && j + 1 >= np)) continue;
                    for (int di = -1; di <= 1 && !keep; ++di) {
                        const std::size_t a = (i + nt + static_cast<std::size_t>(di + 1) - 1) % nt;
                        const std::size_t b = static_cast<std::size_t>(static_cast<long>(j) + dj);
                        const std::size_t m = b * nt + a;
                        keep = c0.get(a, b) && du[m] == dl[k] && dl[m] == du[k];
                    }
                }
            }
            if (keep) cells.set(i, j);
        }
    }
    return {std::move(cells), std::move(upper), std::move(lower), separates};
}

}  // namespace

C1Result compute_c1(const AnnulusBitmap& c0, const C1Options& options) {
    auto c = components(c0);
    return strip_hair(c0, std::move(c.upper), std::move(c.lower), c.separates, options);
}

C1Result compute_c1(const AnnulusBitmap& c0, const AnnulusMap& map, const C1Options& options) {
    auto c = components(c0);
    // free cells reached from neither edge; the complementary components are
    // invariant, so each takes the label of its first labelled backward image
    const auto pockets = c0.complement() - c.upper - c.lower;
    const auto cells = pockets.cells();
    std::vector<double> theta(cells.size()), p(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        theta[k] = pockets.theta_center(cells[k].first);
        p[k] = pockets.p_center(cells[k].second);
    }
    std::vector<int> label(cells.size(), 0);  // 1 upper, -1 lower
    std::size_t open = cells.size();
    for (std::size_t step = 0; step < options.pocket_steps && open > 0; ++step) {
        map.apply(theta, p, Direction::backward);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (label[k] != 0 || std::isnan(theta[k])) continue;
            const auto cell = c0.cell_of(theta[k], p[k]);
            if (!cell) continue;
            const bool up = c.upper.get(cell->first, cell->second), low = c.lower.get(cell->first, cell->second);
            if (up == low) continue;
            label[k] = up ? 1 : -1;
            --open;
        }
    }
    auto upper = c.upper, lower = c.lower;
    std::size_t resolved = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (label[k] == 0) continue;
        (label[k] > 0 ? upper : lower).set(cells[k].first, cells[k].second);
        ++resolved;
    }
    auto result = strip_hair(c0, std::move(upper), std::move(lower), c.separates, options);
    result.pockets = cells.size();
    result.pockets_resolved = resolved;
    return result;
}

PointIndex::PointIndex(std::vector<Point2> points, double period, double bucket)
    : points_(std::move(points)), period_(period), bucket_(bucket) {
    if (points_.empty()) return;
    if (!(bucket_ > 0.0)) throw ConfigError("point index needs a positive bucket size");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (auto& p : points_) {
        if (period_ > 0.0) p.x -= period_ * std::floor(p.x / period_);
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    // keep the bucket grid proportional to the point count
    const double limit = 4.0 * static_cast<double>(points_.size()) + 1024.0;
    auto cells_for = [&](double b) {
        const double nx = period_ > 0.0 ? std::ceil(period_ / b) : std::floor((xmax - xmin) / b) + 1.0;
        return nx * (std::floor((ymax - ymin) / b) + 1.0);
    };
    while (cells_for(bucket_) > limit) bucket_ *= 2.0;
    if (period_ > 0.0) {
        nx_ = static_cast<std::size_t>(std::max(1.0, std::ceil(period_ / bucket_)));
        bucket_ = std::max(bucket_, period_ / static_cast<double>(nx_));
    } else {
        nx_ = static_cast<std::size_t>(std::floor((xmax - xmin) / bucket_)) + 1;
    }
    x0_ = period_ > 0.0 ? 0.0 : xmin;
    y0_ = ymin;
    ny_ = static_cast<std::size_t>(std::floor((ymax - ymin) / bucket_)) + 1;
    std::vector<std::size_t> key(points_.size());
    start_.assign(nx_ * ny_ + 1, 0);
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const std::size_t by = std::min(ny_ - 1, static_cast<std::size_t>((points_[k].y - y0_) / bucket_));
        key[k] = by * nx_ + bucket_x(points_[k].x);
        ++start_[key[k] + 1];
    }
    for (std::size_t b = 0; b < nx_ * ny_; ++b) start_[b + 1] += start_[b];
    order_.resize(points_.size());
    auto fill = start_;
    for (std::size_t k = 0; k < points_.size(); ++k) order_[fill[key[k]]++] = k;
}

std::size_t PointIndex::bucket_x(double x) const {
    if (period_ > 0.0) {
        x -= period_ * std::floor(x / period_);
        return std::min(nx_ - 1, static_cast<std::size_t>(x / bucket_));
    }
    const double s = std::floor((x - x0_) / bucket_);
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(nx_ - 1)));
}

std::pair<double, Point2> PointIndex::nearest(Point2 q) const {
    if (points_.empty()) throw ConfigError("nearest-neighbour query on an empty set");
    const long cx = static_cast<long>(bucket_x(q.x));
    const long cy = static_cast<long>(std::clamp(std::floor((q.y - y0_) / bucket_), 0.0, static_cast<double>(ny_ - 1)));
    const long nx = static_cast<long>(nx_), ny = static_cast<long>(ny_);
    double best = INFINITY;
    Point2 arg{};
    auto visit = [&](long bx, long by) {
        if (by < 0 || by >= ny) return;
        if (period_ > 0.0) bx = ((bx % nx) + nx) % nx;
        else if (bx < 0 || bx >= nx) return;
        const std::size_t b = static_cast<std::size_t>(by * nx + bx);
        for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
            const Point2& p = points_[order_[k]];
            double dx = std::abs(p.x - q.x);
            if (period_ > 0.0) {
                dx = std::fmod(dx, period_);
                dx = std::min(dx, period_ - dx);
            }
            const double d = std::hypot(dx, p.y - q.y);
            if (d < best) {
                best = d;
                arg = p;
            }
        }
    };
    const long rmax = std::max(nx, ny) + 1;
    for (long r = 0; r <= rmax; ++r) {
        if (best <= static_cast<double>(r - 1) * bucket_) break;
        if (r == 0) {
            visit(cx, cy);
            continue;
        }
        for (long d = -r; d <= r; ++d) {
            visit(cx + d, cy - r);
            visit(cx + d, cy + r);
        }
        for (long d = -r + 1; d <= r - 1; ++d) {
            visit(cx - r, cy + d);
            visit(cx + r, cy + d);
        }
    }
    return {best, arg};
}

namespace {

double suggested_bucket(std::span<const Point2> pts, double period) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double w = period > 0.0 ? period : xmax - xmin;
    const double area = std::max(w, 1e-300) * std::max(ymax - ymin, 1e-300);
    const double b = std::sqrt(area / static_cast<double>(pts.size()));
    return std::max({b, 1e-12 * std::max(w, ymax - ymin), 1e-300});
}

HausdorffResult directed_pair(std::span<const Point2> a, std::span<const Point2> b, double period) {
    if (a.empty() || b.empty()) throw ConfigError("Hausdorff distance needs non-empty sets");
    const PointIndex ib(std::vector<Point2>(b.begin(), b.end()), period, suggested_bucket(b, period));
    const PointIndex ia(std::vector<Point2>(a.begin(), a.end()), period, suggested_bucket(a, period));
    HausdorffResult r;
    for (const auto& p : a) {
        const double d = ib.nearest(p).first;
        if (d > r.forward) {
            r.forward = d;
            r.forward_witness = p;
        }
    }
    for (const auto& p : b) {
        const double d = ia.nearest(p).first;
        if (d > r.backward) {
            r.backward = d;
            r.backward_witness = p;
        }
    }
    r.distance = std::max(r.forward, r.backward);
    return r;
}

std::vector<Point2> centers_in_cells(const AnnulusBitmap& a) {
    std::vector<Point2> out;
    for (const auto& [i, j] : a.cells()) out.push_back({static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5});
    return out;
}

}  // namespace

HausdorffResult hausdorff(std::span<const Point2> a, std::span<const Point2> b, double period) {
    return directed_pair(a, b, period);
}

HausdorffResult hausdorff(const AnnulusBitmap& a, const AnnulusBitmap& b) {
    if (!(a.geometry() == b.geometry())) throw ConfigError("Hausdorff distance between different bitmap geometries");
    const auto ca = a.cell_centers(), cb = b.cell_centers();
    return directed_pair(ca, cb, a.geometry().period);
}

HausdorffResult hausdorff_cells(const AnnulusBitmap& a, const AnnulusBitmap& b) {
    if (!(a.geometry() == b.geometry())) throw ConfigError("Hausdorff distance between different bitmap geometries");
    const auto ca = centers_in_cells(a), cb = centers_in_cells(b);
    return directed_pair(ca, cb, static_cast<double>(a.n_theta()));
}

Point2 to_cell_units(const BitmapGeometry& g, Point2 z) {
    const double cw = g.period / static_cast<double>(g.n_theta);
    const double ch = (g.p_max - g.p_min) / static_cast<double>(g.n_p);
    return {(z.x - g.theta0) / cw, (z.y - g.p_min) / ch};
}

HausdorffResult hausdorff_cells(const AnnulusBitmap& a, std::span<const Point2> points) {
    std::vector<Point2> b;
    b.reserve(points.size());
    for (const auto& p : points) b.push_back(to_cell_units(a.geometry(), p));
    const auto ca = centers_in_cells(a);
    return directed_pair(ca, b, static_cast<double>(a.n_theta()));
}

InclusionResult check_graph_in_attractor(const GridFunction& u, const AnnulusBitmap& c1, double tol_cells,
                                         const KinkOptions& kink_options) {
    const auto& g = c1.geometry();
    if (std::abs(u.period() - g.period) > 1e-12 * g.period)
        throw ConfigError("grid function period does not match the bitmap period");
    InclusionResult result;
    if (c1.empty()) {
        result.inside = false;
        result.max_offset = INFINITY;
        return result;
    }
    const PointIndex index(centers_in_cells(c1), static_cast<double>(c1.n_theta()), 2.0);
    const auto mask = kink_mask(u, detect_kinks(u, kink_options));
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (mask[i]) continue;
        const Point2 z{u.node(i), u.central_difference(i)};
        const double d = index.nearest(to_cell_units(g, z)).first;
        ++result.nodes_checked;
        if (d > tol_cells) {
            if (result.offending_nodes++ == 0) result.offending_lo = z.x;
            result.offending_hi = z.x;
        }
        if (d > result.max_offset) {
            result.max_offset = d;
            result.worst = z;
        }
    }
    result.inside = result.max_offset <= tol_cells;
    return result;
}

}  // namespace birkhoff
