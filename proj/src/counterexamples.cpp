#include "birkhoff/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "birkhoff/error.hpp"

namespace birkhoff {

C1Result attractor_c1(const HamiltonianModel& model, const AttractorGrid& grid) {
    const bool bumped = model.bump() && model.bump()->height != 0.0;
    const TimeMap map(model, grid.map_time, grid.dt, bumped ? Method::rk45 : Method::rk4, grid.rtol, grid.atol);
    const AnnulusMap annulus = annulus_map(map, grid.workers);
    const C0Result c0 = compute_c0(annulus, grid.geometry, grid.c0);
    return compute_c1(c0.cells, annulus, grid.c1);
}

AnnulusBitmap bump_cells(const HamiltonianModel& model, const BitmapGeometry& geometry) {
    AnnulusBitmap out(geometry);
    if (!model.bump()) return out;
    const BumpSpec& b = *model.bump();
    const double hw = 0.5 * out.cell_width();
    const double hh = 0.5 * out.cell_height();
    for (std::size_t j = 0; j < out.n_p(); ++j) {
        const double dp = std::max(0.0, std::abs(out.p_center(j) - b.p0) - hh) / b.radius_p;
        if (dp > 1.0) continue;
        for (std::size_t i = 0; i < out.n_theta(); ++i) {
            double dx = out.theta_center(i) - b.x0;
            dx -= geometry.period * std::round(dx / geometry.period);
            const double sx = std::max(0.0, std::abs(dx) - hw) / b.radius_x;
            if (sx * sx + dp * dp <= 1.0) out.set(i, j);
        }
    }
    return out;
}

BandComparison compare_bitmaps(const AnnulusBitmap& a, const AnnulusBitmap& b, std::size_t band) {
    BandComparison c;
    c.extra = (a - b.dilated(band)).count();
    c.missing = (b - a.dilated(band)).count();
    c.hausdorff_cells = hausdorff_cells(a, b).distance;
    c.within_band = c.extra == 0 && c.missing == 0;
    return c;
}

ViolationWitness q1_violation_witness(const GridFunction& u, const HamiltonianModel& perturbed, double alpha,
                                      const AnnulusBitmap& attractor, std::size_t samples) {
    if (!perturbed.bump()) throw ConfigError("the perturbed model carries no bump");
    if (samples < 2) throw ConfigError("segment scan needs at least 2 samples");
    const AnnulusBitmap overlap = bump_cells(perturbed, attractor.geometry()) & attractor;
    if (!overlap.empty()) {
        const auto [i, j] = overlap.cells().front();
        std::ostringstream msg;
        msg << "bump support meets the attractor (" << overlap.count() << " cells, e.g. theta "
            << attractor.theta_center(i) << ", p " << attractor.p_center(j) << ")";
        throw ConstructionError(msg.str());
    }

    ViolationWitness w;
    w.x = perturbed.focus_q();
    const double fi = w.x / u.spacing();
    const auto node = static_cast<std::size_t>(std::lround(fi));
    if (std::abs(fi - static_cast<double>(node)) > 1e-9 || node >= u.size())
        throw ConfigError("the kink location is not a grid node");
    const OneSidedDerivatives d = one_sided_derivatives(u, node);
    w.segment_lo = d.right;
    w.segment_hi = d.left;
    w.u_value = u[node];
    if (!(w.segment_hi > w.segment_lo)) throw ConstructionError("u has no downward kink at the focus");

    const BumpSpec& b = *perturbed.bump();
    double dx = w.x - b.x0;
    dx -= perturbed.period() * std::round(dx / perturbed.period());
    const double r = dx / b.radius_x;
    const double half = r * r < 1.0 ? b.radius_p * std::sqrt(1.0 - r * r) : -1.0;
    if (half < 0.0 || b.p0 + half < w.segment_lo || b.p0 - half > w.segment_hi)
        throw ConstructionError("bump support misses the superdifferential segment");

    w.value = -INFINITY;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
        const double y = std::min(w.segment_hi, w.segment_lo + (w.segment_hi - w.segment_lo) * t);
        const double g = alpha * w.u_value + perturbed.H({w.x, y});
        if (g > w.value) {
            w.value = g;
            w.y = y;
        }
    }
    return w;
}

InclusionBreakReport q2_inclusion_breaker(const HamiltonianModel& base, const HamiltonianModel& perturbed,
                                          double alpha, const InclusionBreakOptions& options) {
    if (!perturbed.bump()) throw ConfigError("the perturbed model carries no bump");
    InclusionBreakReport r;
    r.height = perturbed.bump()->height;
    auto [u, solve] = solve_discounted_fd(perturbed, alpha, options.n, options.fd);
    r.solve = std::move(solve);
    const C1Result plain = attractor_c1(base, options.grid);
    const C1Result bumped = attractor_c1(perturbed, options.grid);
    r.pockets_plain = plain.pockets;
    r.pockets_bumped = bumped.pockets;
    r.attractors = compare_bitmaps(bumped.cells, plain.cells, 1);
    r.inclusion = check_graph_in_attractor(u, bumped.cells, options.tol_cells);
    return r;
}

nlohmann::json to_json(const ViolationWitness& w) {
    return {{"x", w.x},
            {"y", w.y},
            {"value", w.value},
            {"u", w.u_value},
            {"segment", {w.segment_lo, w.segment_hi}},
            {"violation", w.value > 0.0}};
}

nlohmann::json to_json(const InclusionBreakReport& r) {
    const InclusionResult& in = r.inclusion;
    nlohmann::json j = {{"height", r.height},
                        {"verdict", in.inside},
                        {"max_offset_cells", in.max_offset},
                        {"worst", {in.worst.x, in.worst.y}},
                        {"nodes_checked", in.nodes_checked},
                        {"offending_nodes", in.offending_nodes},
                        {"solve_residual", r.solve.residual},
                        {"solve_iterations", r.solve.iterations},
                        {"attractors",
                         {{"extra_cells", r.attractors.extra},
                          {"missing_cells", r.attractors.missing},
                          {"hausdorff_cells", r.attractors.hausdorff_cells},
                          {"within_one_cell", r.attractors.within_band},
                          {"pockets_plain", r.pockets_plain},
                          {"pockets_bumped", r.pockets_bumped}}}};
    if (in.offending_nodes > 0) j["offending_x"] = {in.offending_lo, in.offending_hi};
    return j;
}

// ---- constructed Hamiltonian ----------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Increasing profiles on [0, 1] from 0 to 1: (e^{lt} - 1)/(e^l - 1).
struct ExpProfile {
    double l;
    double value(double t) const { return std::expm1(l * t) / std::expm1(l); }
    double slope(double t) const { return l * std::exp(l * t) / std::expm1(l); }
    double integral(double t) const { return (std::expm1(l * t) / l - t) / std::expm1(l); }
};

}  // namespace

void Q3Spec::validate() const {
    std::vector<std::string> bad;
    auto need = [&](bool ok, const char* what) {
        if (!ok) bad.emplace_back(what);
    };
    need(f_half > 0.0 && std::isfinite(f_half), "f_half > 0");
    need(rise_end > 0.0 && rise_end < 0.5, "0 < rise_end < 1/2");
    need(plateau_end > 0.5 && plateau_end < cutoff, "1/2 < plateau_end < cutoff");
    need(cutoff < 0.75, "cutoff < 3/4");
    need(two_branch_end > cutoff, "two_branch_end > cutoff");
    need(blend_width > 0.0 && two_branch_end + blend_width <= 1.0 - rise_end,
         "blend_width > 0 and two_branch_end + blend_width <= 1 - rise_end");
    need(two_branch_end + blend_width <= 5.0 / 6.0, "two_branch_end + blend_width <= 5/6");
    need(steepness > 0.0 && steepness <= 200.0, "0 < steepness <= 200");
    need(single_curvature > 0.0, "single_curvature > 0");
    need(smooth_width > 0.0, "smooth_width > 0");
    need(far_start > f_half / std::sin(0.6 * kPi), "far_start above the branches");
    need(far_takeover > far_start, "far_takeover > far_start");
    need(p_range > far_takeover, "p_range > far_takeover");
    need(far_curvature >= 0.0, "far_curvature >= 0");
    if (!bad.empty()) {
        std::string msg = "invalid construction parameters:";
        for (const auto& b : bad) msg += " [" + b + "]";
        throw ConfigError(msg);
    }
}

Q3Branches::Q3Branches(const Q3Spec& spec, double alpha)
    : spec_(spec), alpha_(alpha), omega_(6.0 * kPi / 5.0) {
    spec_.validate();
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("friction alpha must be positive");
    amplitude_ = spec.f_half / std::sin(0.5 * omega_);
}

double Q3Branches::f_plus(double x) const {
    if (x < 0.0 || x > 5.0 / 6.0) return 0.0;
    return amplitude_ * std::sin(omega_ * x);
}

double Q3Branches::df_plus(double x) const {
    if (x < 0.0 || x > 5.0 / 6.0) return 0.0;
    return amplitude_ * omega_ * std::cos(omega_ * x);
}

double Q3Branches::v_plus(double x) const {
    const Q3Spec& s = spec_;
    if (x <= 0.0) return 0.0;
    if (x < s.rise_end) return smoothstep(x / s.rise_end);
    if (x <= s.plateau_end) return 1.0;
    return 1.0 - smoothstep((x - s.plateau_end) / (s.cutoff - s.plateau_end));
}

double Q3Branches::energy_plus(double x) const {
    return -alpha_ * amplitude_ * (1.0 - std::cos(omega_ * x)) / omega_;
}

double Q3Branches::mean_slope(double x) const {
    return (energy_plus(x) - energy_minus(x)) / (f_plus(x) - f_minus(x));
}

class Q3Surface : public Surface {
public:
    Q3Surface(Q3Branches branches, double far_floor, double far_curvature)
        : b_(std::move(branches)), flat_{b_.spec().steepness}, steep_{-b_.spec().steepness},
          far_floor_(far_floor), far_curvature_(far_curvature) {}

    const Q3Branches& branches() const { return b_; }

    Jet jet(double q, double p) const override {
        const double x = wrap(q);
        double ap = 0.0, bp = 0.0;
        const double a = inner(x, p, &ap);
        const double b = far(p, &bp);
        const double delta = b_.spec().smooth_width;
        const double d = a - b;
        if (d <= -delta) return {b, 0.0, bp};
        const double aq = inner_dq(x, p);
        if (d >= delta) return {a, aq, ap};
        const double t = d / delta;
        const double s = 3.0 / 16.0 + t * t * (3.0 / 8.0 - t * t / 16.0);
        const double ds = t * (0.75 - 0.25 * t * t);
        const double wa = 0.5 + ds, wb = 0.5 - ds;
        return {0.5 * (a + b) + delta * s, wa * aq, wa * ap + wb * bp};
    }
    double period() const override { return 1.0; }
    bool fiber_convex() const override { return true; }
    std::pair<double, double> momentum_range() const override { return {-INFINITY, INFINITY}; }

    // H before the far field is merged in.
    double inner(double x, double p, double* dp) const {
        const Q3Spec& s = b_.spec();
        const double e = s.two_branch_end, w = s.blend_width;
        if (x >= 1.0 - e && x <= e) return two(x, p, dp);
        if (x > e && x < e + w) return blend(x, false, smoothstep((x - e) / w), p, dp);
        if (x < 1.0 - e && x > 1.0 - e - w) return blend(x, true, smoothstep((1.0 - e - x) / w), p, dp);
        return one_value(x, p, x < 0.5, dp);
    }

    double far(double p, double* dp) const {
        const double r = std::max(0.0, std::abs(p) - b_.spec().far_start);
        *dp = std::copysign(far_curvature_ * r, p);
        return far_floor_ + 0.5 * far_curvature_ * r * r;
    }

    // Weight of the steep profile that gives mean slope mu; outside [0, 1] when unattainable.
    double profile_weight(double mu) const {
        const double lo = flat_.integral(1.0), hi = steep_.integral(1.0);
        return (mu - lo) / (hi - lo);
    }

private:
    struct Fiber {
        double fm, fp, em, ep, vm, vp, c;
    };

    static double wrap(double q) {
        double x = q - std::floor(q);
        return x >= 1.0 ? 0.0 : x;
    }

    Fiber two_branch(double x) const {
        Fiber f{b_.f_minus(x), b_.f_plus(x), b_.energy_minus(x), b_.energy_plus(x), b_.v_minus(x), b_.v_plus(x), 0.0};
        const double mu = ((f.ep - f.em) / (f.fp - f.fm) - f.vm) / (f.vp - f.vm);
        f.c = std::clamp(profile_weight(mu), 0.0, 1.0);
        return f;
    }

    double fiber_value(const Fiber& f, double p, double* dp) const {
        const double w = f.fp - f.fm, jump = f.vp - f.vm;
        const double t = (p - f.fm) / w;
        auto mix = [&](double a, double b) { return (1.0 - f.c) * a + f.c * b; };
        if (t < 0.0) {
            const double k = jump / w * mix(flat_.slope(0.0), steep_.slope(0.0));
            const double s = p - f.fm;
            *dp = f.vm + k * s;
            return f.em + f.vm * s + 0.5 * k * s * s;
        }
        if (t > 1.0) {
            const double k = jump / w * mix(flat_.slope(1.0), steep_.slope(1.0));
            const double s = p - f.fp;
            *dp = f.vp + k * s;
            return f.ep + f.vp * s + 0.5 * k * s * s;
        }
        *dp = f.vm + jump * mix(flat_.value(t), steep_.value(t));
        return f.em + f.vm * (p - f.fm) + jump * w * mix(flat_.integral(t), steep_.integral(t));
    }

    double two(double x, double p, double* dp) const { return fiber_value(two_branch(x), p, dp); }

    double one_value(double x, double p, bool upper, double* dp) const {
        const double f = upper ? b_.f_plus(x) : b_.f_minus(x);
        const double e = upper ? b_.energy_plus(x) : b_.energy_minus(x);
        const double v = upper ? b_.v_plus(x) : b_.v_minus(x);
        const double s = p - f;
        const double k = b_.spec().single_curvature;
        *dp = v + k * s;
        return e + v * s + 0.5 * k * s * s;
    }

    // Two-branch fiber fading into the single-branch one on the `upper` side.
    double blend(double x, bool upper, double psi, double p, double* dp) const {
        double d2 = 0.0, d1 = 0.0;
        const double h2 = two(x, p, &d2);
        const double h1 = one_value(x, p, upper, &d1);
        *dp = (1.0 - psi) * d2 + psi * d1;
        return (1.0 - psi) * h2 + psi * h1;
    }

    double inner_dq(double x, double p) const {
        constexpr double h = 1e-6;
        double unused = 0.0;
        return (inner(wrap(x + h), p, &unused) - inner(wrap(x - h), p, &unused)) / (2.0 * h);
    }

    Q3Branches b_;
    ExpProfile flat_, steep_;
    double far_floor_, far_curvature_;
};

const Q3Branches& Q3Model::branches() const { return surface->branches(); }

TabulatedSurface Q3Model::tabulate(std::size_t nx, std::size_t np) const {
    if (nx < 4 || np < 4) throw ConfigError("table needs at least 4x4 nodes");
    const double dx = 1.0 / static_cast<double>(nx);
    const double dp = 2.0 * spec.p_range / static_cast<double>(np - 1);
    std::vector<double> values(nx * np);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < np; ++j)
            values[i * np + j] =
                surface->jet(static_cast<double>(i) * dx, -spec.p_range + static_cast<double>(j) * dp).value;
    return TabulatedSurface(nx, np, 0.0, -spec.p_range, dx, dp, std::move(values));
}

namespace {

struct Feasibility {
    double margin = INFINITY;
    double at = 0.5;
    const char* failure = nullptr;
};

Feasibility feasibility(const Q3Branches& b, const Q3Surface& probe) {
    Feasibility f;
    const Q3Spec& s = b.spec();
    const double end = s.two_branch_end + s.blend_width;
    constexpr std::size_t steps = 4000;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double x = 0.5 + (end - 0.5) * static_cast<double>(k) / steps;
        const double m = b.mean_slope(x);
        const double vm = b.v_minus(x), vp = b.v_plus(x);
        const double c = probe.profile_weight((m - vm) / (vp - vm));
        const double margin = std::min(c, 1.0 - c);
        const char* failure = !(m > vm)        ? "(cond1) fails"
                              : !(m < vp)      ? "(cond2) fails"
                              : margin <= 0.0 ? "exponential profiles cannot reach the mean slope"
                                               : nullptr;
        if (margin < f.margin || failure) {
            f.margin = std::min(f.margin, margin);
            f.at = x;
        }
        if (failure) {
            f.failure = failure;
            break;
        }
    }
    return f;
}

}  // namespace

double q3_feasibility_margin(const Q3Spec& spec, double alpha) {
    const Q3Branches b(spec, alpha);
    const Q3Surface probe(b, 0.0, 0.0);
    return feasibility(b, probe).margin;
}

Q3Model q3_build(const Q3Spec& spec, double alpha) {
    const Q3Branches branches(spec, alpha);
    const Q3Surface probe(branches, -INFINITY, 0.0);
    const Feasibility f = feasibility(branches, probe);
    if (f.failure) {
        std::ostringstream msg;
        msg << "construction fails at x = " << f.at << ": " << f.failure;
        throw ConstructionError(msg.str());
    }

    // Floor of the far field: well below the inner part on the flat band.
    constexpr std::size_t nx = 400, np = 200;
    double low = INFINITY;
    double dummy = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / nx;
        for (std::size_t j = 0; j <= np; ++j) {
            const double p = spec.far_start * (2.0 * static_cast<double>(j) / np - 1.0);
            low = std::min(low, probe.inner(x, p, &dummy));
        }
    }
    const double floor = low - 4.0 * spec.smooth_width - 1.0;

    // Smallest curvature with far >= inner + width for |p| >= far_takeover.
    double need = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / nx;
        for (std::size_t j = 0; j <= np; ++j) {
            const double r = spec.far_takeover + (3.0 * spec.p_range - spec.far_takeover) * j / np;
            for (double p : {r, -r}) {
                const double gap = probe.inner(x, p, &dummy) - floor + spec.smooth_width;
                const double span = r - spec.far_start;
                need = std::max(need, 2.0 * gap / (span * span));
            }
        }
    }
    double curvature = spec.far_curvature;
    if (curvature == 0.0) {
        curvature = 1.25 * need;
    } else if (curvature < need) {
        std::ostringstream msg;
        msg << "far_curvature " << curvature << " does not take over at |p| = " << spec.far_takeover << " (needs "
            << need << ")";
        throw ConfigError(msg.str());
    }

    auto surface = std::make_shared<const Q3Surface>(branches, floor, curvature);
    auto model = HamiltonianModel::from_surface(ModelKind::constructed, surface, alpha);
    return Q3Model{spec, alpha, std::move(model), std::move(surface), curvature};
}

Q3Spec q3_search_cutoffs(Q3Spec spec, double alpha) {
    auto feasible = [&](double cutoff) {
        Q3Spec s = spec;
        const double shift = cutoff - spec.cutoff;
        s.cutoff = cutoff;
        s.two_branch_end = spec.two_branch_end + shift;
        try {
            return q3_feasibility_margin(s, alpha) > 0.0 ? std::optional<Q3Spec>(s) : std::nullopt;
        } catch (const ConfigError&) {
            return std::optional<Q3Spec>();
        }
    };
    if (auto s = feasible(spec.cutoff)) return *s;
    // Later cutoffs give the profiles more room; find the first feasible one
    // above the seed, then bisect back toward the seed.
    const double top = std::min(0.75, 5.0 / 6.0) - (spec.two_branch_end - spec.cutoff) - spec.blend_width;
    double lo = spec.cutoff, hi = NAN;
    for (int k = 1; k <= 20; ++k) {
        const double c = spec.cutoff + (top - spec.cutoff) * k / 20.0;
        if (feasible(c)) {
            hi = c;
            break;
        }
        lo = c;
    }
    if (std::isnan(hi)) throw ConstructionError("no feasible cutoff between the seed and 3/4");
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return *feasible(hi);
}

namespace {

// Marks every cell met by the segment a-b (lifted coordinates, sampled at a
// quarter cell); points outside the p range are skipped.
void draw_segment(AnnulusBitmap& bitmap, Point2 a, Point2 b) {
    const double cells = std::max(std::abs(b.x - a.x) / bitmap.cell_width(), std::abs(b.y - a.y) / bitmap.cell_height());
    const auto steps = static_cast<std::size_t>(std::ceil(4.0 * cells)) + 1;
    const double period = bitmap.geometry().period;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps);
        double x = a.x + t * (b.x - a.x);
        x -= period * std::floor((x - bitmap.geometry().theta0) / period);
        if (auto c = bitmap.cell_of(x, a.y + t * (b.y - a.y))) bitmap.set(c->first, c->second);
    }
}

void draw_curve(AnnulusBitmap& bitmap, const std::function<double(double)>& f, double x0, double x1) {
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(x1 - x0) / bitmap.cell_width())) * 4 + 2;
    Point2 prev{x0, f(x0)};
    for (std::size_t k = 1; k <= n; ++k) {
        const double x = x0 + (x1 - x0) * static_cast<double>(k) / static_cast<double>(n);
        const Point2 z{x, f(x)};
        draw_segment(bitmap, prev, z);
        prev = z;
    }
}

// True when the set cuts every path from the top row to the bottom row of its complement.
bool disconnects(const AnnulusBitmap& set) {
    const AnnulusBitmap free = set.complement();
    return (free.flood_from_top() & free.flood_from_bottom()).empty();
}

// Integral of g over [a, b] by composite 5-point Gauss-Legendre.
double gauss_integral(const std::function<double(double)>& g, double a, double b, std::size_t panels = 64) {
    static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
    static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                          0.4786286704993665, 0.2369268850561891};
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double mid = a + (static_cast<double>(k) + 0.5) * h;
        for (int i = 0; i < 5; ++i) sum += weights[i] * g(mid + 0.5 * h * nodes[i]);
    }
    return 0.5 * h * sum;
}

}  // namespace

AnnulusBitmap q3_forward_closure(const Q3Model& model, const BitmapGeometry& geometry, double time,
                                 std::size_t starts) {
    const Q3Branches& b = model.branches();
    AnnulusBitmap out(geometry);
    // The graph itself (t = 0), minus the kink.
    draw_curve(out, [&](double x) { return b.f_plus(x); }, 0.0, 0.5 - 1e-9);
    draw_curve(out, [&](double x) { return b.f_minus(x); }, 0.5 + 1e-9, 1.0);
    constexpr double dt = 0.01;
    const auto steps = static_cast<std::size_t>(std::ceil(time / dt));
    for (std::size_t k = 0; k < starts; ++k) {
        const double s = 0.5 * static_cast<double>(k) / static_cast<double>(starts);
        for (bool upper : {true, false}) {
            PhasePoint z = upper ? PhasePoint{s, b.f_plus(s)} : PhasePoint{1.0 - s, b.f_minus(1.0 - s)};
            for (std::size_t n = 0; n < steps; ++n) {
                const PhasePoint next = rk4_step(model.model, z, dt);
                draw_segment(out, {z.q, z.p}, {next.q, next.p});
                z = next;
            }
        }
    }
    return out;
}

AnnulusBitmap q3_branch_cells(const Q3Model& model, const BitmapGeometry& geometry) {
    const Q3Branches& b = model.branches();
    const double cut = model.spec.cutoff;
    AnnulusBitmap out(geometry);
    draw_curve(out, [&](double x) { return b.f_plus(x); }, 0.0, cut);
    draw_curve(out, [&](double x) { return b.f_minus(x); }, 1.0 - cut, 1.0);
    return out;
}

bool Q3Report::passed() const {
    return std::abs(h00) <= 1e-9 && std::abs(h10) <= 1e-9 && std::abs(kink_gap) <= 1e-9 && lyap_residual <= 1e-9 &&
           cond1_margin > 0.0 && cond2_margin > 0.0 && min_second_difference >= -1e-9 &&
           invariance_residual <= 1e-3 && far_field_x_spread <= 1e-9 && closure_to_branches <= 2.0 &&
           !closure_disconnects && (!attractor_computed || attractor_disconnects);
}

Q3Report q3_verify(const Q3Model& model, const Q3VerifyOptions& options) {
    const Q3Branches& b = model.branches();
    const HamiltonianModel& h = model.model;
    const Q3Spec& spec = model.spec;
    const double alpha = model.alpha;
    Q3Report r;
    r.h00 = h.H({0.0, 0.0});
    r.h10 = h.H({1.0, 0.0});
    r.kink_gap = h.H({0.5, b.f_plus(0.5)}) - h.H({0.5, b.f_minus(0.5)});

    const std::size_t n = std::max<std::size_t>(options.samples, 3);
    auto along = [&](double a, double z, std::size_t k) { return a + (z - a) * static_cast<double>(k) / (n - 1); };
    auto f_plus = [&](double x) { return b.f_plus(x); };
    auto f_minus = [&](double x) { return b.f_minus(x); };
    for (std::size_t k = 0; k < n; ++k) {
        const double x = along(0.0, spec.two_branch_end, k);
        r.lyap_residual =
            std::max(r.lyap_residual, std::abs(h.H({x, b.f_plus(x)}) + alpha * gauss_integral(f_plus, 0.0, x)));
        const double y = 1.0 - x;
        r.lyap_residual =
            std::max(r.lyap_residual, std::abs(h.H({y, b.f_minus(y)}) - alpha * gauss_integral(f_minus, y, 1.0)));
    }

    // A: upper value above the tangent at the lower branch; B: the reverse.
    auto gaps = [&](double x) {
        const double fp = b.f_plus(x), fm = b.f_minus(x);
        const Jet jp = h.jet({x, fp}), jm = h.jet({x, fm});
        return std::pair{jp.value - jm.value - jm.dp * (fp - fm), jm.value - jp.value - jp.dp * (fm - fp)};
    };
    r.cond1_margin = r.cond2_margin = INFINITY;
    for (std::size_t k = 1; k < n; ++k) {
        const double x = along(0.5, spec.cutoff, k);
        const auto [a_right, b_right] = gaps(x);
        const auto [a_left, b_left] = gaps(1.0 - x);
        const double c1 = std::min(a_right, b_left), c2 = std::min(b_right, a_left);
        if (c1 < r.cond1_margin) {
            r.cond1_margin = c1;
            r.cond1_at = a_right <= b_left ? x : 1.0 - x;
        }
        if (c2 < r.cond2_margin) {
            r.cond2_margin = c2;
            r.cond2_at = b_right <= a_left ? x : 1.0 - x;
        }
    }

    r.min_second_difference = model.tabulate(options.table_nx, options.table_np).min_second_difference();

    for (double p : {spec.far_takeover, -spec.far_takeover, spec.p_range, -spec.p_range}) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = h.H({along(0.0, 1.0, k), p});
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        r.far_field_x_spread = std::max(r.far_field_x_spread, hi - lo);
    }

    const auto steps = static_cast<std::size_t>(std::ceil(options.invariance_time / options.invariance_dt));
    for (std::size_t k = 0; k < options.invariance_starts; ++k) {
        const double s = 0.02 + (spec.cutoff - 0.04) * static_cast<double>(k) /
                                    static_cast<double>(std::max<std::size_t>(options.invariance_starts - 1, 1));
        for (bool upper : {true, false}) {
            PhasePoint z = upper ? PhasePoint{s, b.f_plus(s)} : PhasePoint{1.0 - s, b.f_minus(1.0 - s)};
            for (std::size_t m = 0; m < steps; ++m) {
                z = rk4_step(h, z, options.invariance_dt);
                const double x = z.q - std::floor(z.q);
                const double f = upper ? b.f_plus(x) : b.f_minus(x);
                r.invariance_residual = std::max(r.invariance_residual, std::abs(z.p - f));
            }
        }
    }

    const BitmapGeometry& g = options.grid.geometry;
    const AnnulusBitmap closure = q3_forward_closure(model, g, options.closure_time, options.closure_starts);
    const AnnulusBitmap branch = q3_branch_cells(model, g);
    r.closure_cells = closure.count();
    r.closure_to_branches = hausdorff_cells(closure, branch).forward;
    r.closure_disconnects = disconnects(closure);
    if (options.with_attractor) {
        const C1Result c1 =
            options.attractor_table_nx == 0
                ? attractor_c1(h, options.grid)
                : attractor_c1(HamiltonianModel::from_surface(
                                   ModelKind::tabulated,
                                   std::make_shared<const TabulatedSurface>(
                                       model.tabulate(options.attractor_table_nx, options.attractor_table_np)),
                                   alpha),
                               options.grid);
        r.attractor_computed = true;
        r.attractor_cells = c1.cells.count();
        r.attractor_disconnects = disconnects(c1.cells);
    }
    return r;
}

nlohmann::json to_json(const Q3Spec& s) {
    return {{"f_half", s.f_half},
            {"rise_end", s.rise_end},
            {"plateau_end", s.plateau_end},
            {"cutoff", s.cutoff},
            {"two_branch_end", s.two_branch_end},
            {"blend_width", s.blend_width},
            {"steepness", s.steepness},
            {"single_curvature", s.single_curvature},
            {"smooth_width", s.smooth_width},
            {"far_start", s.far_start},
            {"far_takeover", s.far_takeover},
            {"far_curvature", s.far_curvature},
            {"p_range", s.p_range}};
}

Q3Spec q3_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("construction parameters must be an object");
    Q3Spec s;
    const nlohmann::json defaults = to_json(s);
    std::vector<std::string> unknown;
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) {
            unknown.push_back(key);
            continue;
        }
        if (!value.is_number()) throw ConfigError("construction parameter '" + key + "' must be a number");
    }
    if (!unknown.empty()) {
        std::string msg = "unknown construction parameters:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("f_half", s.f_half);
    get("rise_end", s.rise_end);
    get("plateau_end", s.plateau_end);
    get("cutoff", s.cutoff);
    get("two_branch_end", s.two_branch_end);
    get("blend_width", s.blend_width);
    get("steepness", s.steepness);
    get("single_curvature", s.single_curvature);
    get("smooth_width", s.smooth_width);
    get("far_start", s.far_start);
    get("far_takeover", s.far_takeover);
    get("far_curvature", s.far_curvature);
    get("p_range", s.p_range);
    s.validate();
    return s;
}

nlohmann::json to_json(const Q3Report& r) {
    nlohmann::json j = {{"H_00", r.h00},
                        {"H_10", r.h10},
                        {"kink_gap", r.kink_gap},
                        {"lyap_residual", r.lyap_residual},
                        {"cond1_margin", r.cond1_margin},
                        {"cond1_at", r.cond1_at},
                        {"cond2_margin", r.cond2_margin},
                        {"cond2_at", r.cond2_at},
                        {"min_second_difference", r.min_second_difference},
                        {"invariance_residual", r.invariance_residual},
                        {"far_field_x_spread", r.far_field_x_spread},
                        {"closure_cells", r.closure_cells},
                        {"closure_to_branches_cells", r.closure_to_branches},
                        {"closure_disconnects", r.closure_disconnects},
                        {"passed", r.passed()}};
    if (r.attractor_computed) {
        j["attractor_cells"] = r.attractor_cells;
        j["attractor_disconnects"] = r.attractor_disconnects;
    }
    return j;
}

}  // namespace birkhoff
