#include <cmath>
#include <random>

#include "birkhoff/counterexamples.hpp"
#include "birkhoff/error.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {

constexpr double kAlpha = 0.5;
const BumpSpec kBump{0.5, 1.72, 0.06, 0.06, 5.0};

struct Unbumped {
    HamiltonianModel model = HamiltonianModel::appendix_pendulum(kAlpha);
    GridFunction u = GridFunction::constant(16, 1.0, 0.0);
    AnnulusBitmap c1{BitmapGeometry{}};
    double top = 0.0;  // upper branch at x = 1/2, from shooting
};

double branch_at_half(const HamiltonianModel& m) {
    const auto& pts = shoot_heteroclinic(m, Side::right).curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a = pts[i - 1].x - 0.5, c = pts[i].x - 0.5;
        if (a * c <= 0.0 && a != c) return pts[i - 1].y + (pts[i].y - pts[i - 1].y) * a / (a - c);
    }
    return NAN;
}

const Unbumped& unbumped() {
    static const Unbumped s = [] {
        Unbumped r;
        r.u = solve_discounted_lo(r.model, kAlpha, 2048).first;
        r.c1 = attractor_c1(r.model, AttractorGrid{}).cells;
        r.top = branch_at_half(r.model);
        return r;
    }();
    return s;
}

HamiltonianModel bumped(double height) {
    BumpSpec b = kBump;
    b.height = height;
    return build_perturbed(HamiltonianModel::appendix_pendulum(kAlpha), b);
}

}  // namespace

TEST_CASE("bump cells cover the support ellipse and nothing far from it") {
    const BitmapGeometry g{128, 128, 0.0, 1.0, -2.5, 2.5};
    const auto m = bumped(5.0);
    const AnnulusBitmap cells = bump_cells(m, g);
    REQUIRE_FALSE(cells.empty());
    for (std::size_t j = 0; j < g.n_p; ++j)
        for (std::size_t i = 0; i < g.n_theta; ++i) {
            const double x = cells.theta_center(i), p = cells.p_center(j);
            if (m.bump_value(x, p) > 0.0) CHECK(cells.get(i, j));
            if (cells.get(i, j)) {
                CHECK(std::abs(x - kBump.x0) <= kBump.radius_x + cells.cell_width());
                CHECK(std::abs(p - kBump.p0) <= kBump.radius_p + cells.cell_height());
            }
        }
    CHECK(bump_cells(HamiltonianModel::appendix_pendulum(kAlpha), g).empty());
}

TEST_CASE("bitmap comparison up to a band") {
    const BitmapGeometry g{64, 64, 0.0, 1.0, -1.0, 1.0};
    AnnulusBitmap a(g), b(g), c(g);
    for (std::size_t i = 0; i < 64; ++i) {
        a.set(i, 10);
        b.set(i, 11);
        c.set(i, 12);
    }
    const auto ab = compare_bitmaps(a, b, 1);
    CHECK(ab.within_band);
    CHECK(ab.hausdorff_cells == doctest::Approx(1.0));
    const auto ac = compare_bitmaps(a, c, 1);
    CHECK_FALSE(ac.within_band);
    CHECK(ac.extra == 64);
    CHECK(ac.missing == 64);
    CHECK(compare_bitmaps(a, c, 2).within_band);
}

TEST_CASE("no violation without a bump height") {
    const auto& s = unbumped();
    const auto w = q1_violation_witness(s.u, bumped(0.0), kAlpha, s.c1);
    CHECK(w.value <= 1e-3);
    CHECK(w.segment_lo <= w.y);
    CHECK(w.y <= w.segment_hi);
    CHECK(std::abs(w.segment_hi - s.top) <= 5.0 / 2048.0);
    CHECK(std::abs(w.segment_lo + s.top) <= 5.0 / 2048.0);
}

TEST_CASE("a tall bump off the attractor breaks the viscosity inequality") {
    const auto& s = unbumped();
    const auto m = bumped(5.0);
    const auto w = q1_violation_witness(s.u, m, kAlpha, s.c1);
    // alpha u(1/2) = -H(1/2, f+(1/2)) = 2 - f+^2/2, so the scan is oracle-computable from the shot branch.
    double oracle = -INFINITY;
    for (int k = 0; k <= 20000; ++k) {
        const double y = -s.top + 2.0 * s.top * k / 20000.0;
        oracle = std::max(oracle, m.bump_value(0.5, y) + 0.5 * (y * y - s.top * s.top));
    }
    CHECK(w.value >= 4.0);
    CHECK(std::abs(w.value - oracle) <= 1e-2);
    CHECK(std::abs(w.y - kBump.p0) <= kBump.radius_p);
    CHECK(std::abs(w.x - kBump.x0) <= kBump.radius_x);
}

TEST_CASE("witness preconditions") {
    const auto& s = unbumped();
    const auto on_attractor = build_perturbed(s.model, {0.5, 0.0, 0.05, 0.2, 5.0});
    CHECK_THROWS_AS(q1_violation_witness(s.u, on_attractor, kAlpha, s.c1), ConstructionError);
    const auto off_segment = build_perturbed(s.model, {0.2, 2.2, 0.05, 0.05, 5.0});
    CHECK_THROWS_AS(q1_violation_witness(s.u, off_segment, kAlpha, s.c1), ConstructionError);
    CHECK_THROWS_AS(q1_violation_witness(s.u, s.model, kAlpha, s.c1), ConfigError);
}

TEST_CASE("inclusion verdict never recovers as the bump grows") {
    // C1 of every bumped model is C1 of the plain one (checked in the acceptance run).
    const auto& s = unbumped();
    FdOptions fd;
    fd.local_viscosity = true;
    bool failed = false;
    for (double height : {0.0, 1.0, 2.0, 5.0}) {
        const auto u = solve_discounted_fd(bumped(height), kAlpha, 1024, fd).first;
        const auto r = check_graph_in_attractor(u, s.c1, 2.0);
        CAPTURE(height);
        CAPTURE(r.max_offset);
        if (height == 0.0) CHECK(r.inside);
        if (height == 5.0) {
            CHECK_FALSE(r.inside);
            CHECK(r.max_offset > 10.0);
            CHECK(r.offending_nodes > 0);
            CHECK(r.offending_lo <= 0.5);
            CHECK(r.offending_hi >= r.offending_lo);
        }
        if (failed) CHECK_FALSE(r.inside);
        failed = failed || !r.inside;
    }
}

TEST_CASE("construction parameters are validated") {
    Q3Spec s;
    CHECK_NOTHROW(s.validate());
    s.cutoff = 0.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = Q3Spec{};
    s.far_start = 0.9;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(q3_spec_from_json({{"cutoff", 0.7}, {"bogus", 1}}), ConfigError);
    CHECK(q3_spec_from_json(to_json(Q3Spec{})).cutoff == Q3Spec{}.cutoff);
}

TEST_CASE("branch profiles follow the symmetry rule") {
    const Q3Branches b(Q3Spec{}, kAlpha);
    CHECK(b.v_plus(0.0) == 0.0);
    CHECK(b.f_plus(0.0) == 0.0);
    CHECK(b.f_plus(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : {0.25, 0.4, 0.55}) CHECK(b.v_plus(x) == 1.0);
    for (double x : {0.7, 0.8, 1.0}) CHECK(b.v_plus(x) == 0.0);
    for (double x : {0.1, 0.3, 0.5, 0.66}) {
        CHECK(b.f_minus(x) == -b.f_plus(1.0 - x));
        CHECK(b.v_minus(x) == -b.v_plus(1.0 - x));
        CHECK(b.energy_minus(x) == b.energy_plus(1.0 - x));
    }
}

TEST_CASE("construction reports infeasible profiles") {
    Q3Spec s;
    s.steepness = 3.0;
    CHECK(q3_feasibility_margin(s, kAlpha) <= 0.0);
    try {
        q3_build(s, kAlpha);
        FAIL("expected a construction error");
    } catch (const ConstructionError& e) {
        CHECK(std::string(e.what()).find("x =") != std::string::npos);
    }
    CHECK_THROWS_AS(q3_search_cutoffs(s, kAlpha), ConstructionError);
    const Q3Spec seed{};
    const Q3Spec found = q3_search_cutoffs(seed, kAlpha);
    CHECK(found.cutoff == seed.cutoff);
    CHECK(found.plateau_end == seed.plateau_end);
}

TEST_CASE("constructed H is symmetric, convex in p, with consistent jets") {
    const Q3Model m = q3_build(Q3Spec{}, kAlpha);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 1.0), up(-3.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const double x = ux(rng), p = up(rng);
        CAPTURE(x);
        CAPTURE(p);
        const Jet j = m.model.jet({x, p});
        CHECK(j.value == doctest::Approx(m.model.H({1.0 - x, -p})).epsilon(1e-12));
        const double h = 1e-6;
        const double fd_p = (m.model.H({x, p + h}) - m.model.H({x, p - h})) / (2.0 * h);
        const double fd_q = (m.model.H({x + h, p}) - m.model.H({x - h, p})) / (2.0 * h);
        CHECK(std::abs(j.dp - fd_p) <= 1e-5 * (1.0 + std::abs(j.dp)));
        CHECK(std::abs(j.dq - fd_q) <= 1e-3 * (1.0 + std::abs(j.dq)));
        const double d = 1e-2;
        CHECK(m.model.H({x, p + d}) - 2.0 * j.value + m.model.H({x, p - d}) >= -1e-12);
    }
}

TEST_CASE("constructed H passes the branch checks") {
    const Q3Model m = q3_build(Q3Spec{}, kAlpha);
    Q3VerifyOptions o;
    o.with_attractor = false;
    const Q3Report r = q3_verify(m, o);
    CHECK(std::abs(r.h00) <= 1e-12);
    CHECK(std::abs(r.h10) <= 1e-12);
    CHECK(std::abs(r.kink_gap) <= 1e-9);
    CHECK(r.lyap_residual <= 1e-9);
    CHECK(r.cond1_margin > 0.0);
    CHECK(r.cond2_margin > 0.0);
    CHECK(r.min_second_difference >= -1e-9);
    CHECK(r.invariance_residual <= 1e-3);
    CHECK(r.far_field_x_spread == 0.0);
    CHECK(r.closure_to_branches <= 2.0);
    CHECK_FALSE(r.closure_disconnects);
    CHECK(r.passed());
}

TEST_CASE("the graph with its kink segment disconnects, the forward closure does not") {
    const Q3Model m = q3_build(Q3Spec{}, kAlpha);
    const BitmapGeometry g{256, 256, 0.0, 1.0, -3.0, 3.0};
    AnnulusBitmap closure = q3_forward_closure(m, g, 20.0, 200);
    const auto& b = m.branches();
    // Adding the vertical segment at the kink closes a loop around the annulus.
    for (int k = 0; k <= 2000; ++k) {
        const double y = b.f_minus(0.5) + (b.f_plus(0.5) - b.f_minus(0.5)) * k / 2000.0;
        if (auto c = closure.cell_of(0.5, y)) closure.set(c->first, c->second);
    }
    const AnnulusBitmap free = closure.complement();
    CHECK((free.flood_from_top() & free.flood_from_bottom()).empty());
}
