#include <cmath>
#include <cstdio>
#include <filesystem>

#include "birkhoff/attractor.hpp"
#include "birkhoff/error.hpp"
#include "birkhoff/weakkam.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {

// (theta, p) -> (theta, p/2) on [0,1) x [-1,1]; odd row count so p = 0 is a row centre.
AnnulusMap halving_map() {
    return {[](std::span<double>, std::span<double> p, Direction d) {
                for (auto& v : p) v = d == Direction::forward ? 0.5 * v : 2.0 * v;
            },
            1.0};
}

BitmapGeometry small_geometry(std::size_t nt = 64, std::size_t np = 65) { return {nt, np, 0.0, 1.0, -1.0, 1.0}; }

AnnulusBitmap row_bitmap(const BitmapGeometry& g, std::size_t row) {
    AnnulusBitmap b(g);
    for (std::size_t i = 0; i < g.n_theta; ++i) b.set(i, row);
    return b;
}

struct PendulumAttractor {
    HamiltonianModel model = HamiltonianModel::pendulum(0.5);
    BitmapGeometry geometry{512, 512, 0.0, 2.0 * M_PI, -3.0, 3.0};
    C0Result c0{AnnulusBitmap(geometry), 0, false, {}};
    C1Result c1{AnnulusBitmap(geometry), AnnulusBitmap(geometry), AnnulusBitmap(geometry), false};
    std::vector<Point2> branches;
};

PendulumAttractor compute_pendulum(double alpha, std::size_t n) {
    PendulumAttractor a;
    a.model = HamiltonianModel::pendulum(alpha);
    a.geometry = {n, n, 0.0, 2.0 * M_PI, -3.0, 3.0};
    a.c0 = compute_c0(annulus_map(TimeMap(a.model, 2.0, 0.01)), a.geometry);
    a.c1 = compute_c1(a.c0.cells);
    return a;
}

const PendulumAttractor& pendulum() {
    static const PendulumAttractor a = [] {
        auto r = compute_pendulum(0.5, 512);
        for (Side s : {Side::left, Side::right}) {
            const auto c = shoot_heteroclinic(r.model, s).curve.resampled(20000);
            r.branches.insert(r.branches.end(), c.points.begin(), c.points.end());
        }
        r.branches.push_back({0.0, 0.0});
        r.branches.push_back({M_PI, 0.0});
        return r;
    }();
    return a;
}

}  // namespace

TEST_CASE("bitmap geometry, set algebra and serialization") {
    CHECK_THROWS_AS(AnnulusBitmap(BitmapGeometry{32, 64, 0.0, 1.0, -1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(AnnulusBitmap(BitmapGeometry{64, 64, 0.0, 1.0, 1.0, 1.0}), ConfigError);
    const auto g = small_geometry();
    AnnulusBitmap a(g), b(g);
    a.set(3, 4);
    a.set(63, 10);
    b.set(3, 4);
    b.set(5, 5);
    CHECK((a & b).count() == 1);
    CHECK((a | b).count() == 3);
    CHECK((a - b).count() == 1);
    CHECK((a | b).geometry() == g);
    CHECK(a.complement().count() == 64 * 65 - 2);
    // periodic in theta, clamped in p
    const auto d = a.dilated(1);
    CHECK(d.get(0, 10));
    CHECK(d.get(62, 11));
    CHECK(d.count() == 18);
    CHECK(AnnulusBitmap(g).dilated(3).empty());
    const auto cell = a.cell_of(-0.001, 0.0);
    REQUIRE(cell);
    CHECK(cell->first == 63);
    CHECK(cell->second == 32);
    CHECK_FALSE(a.cell_of(0.5, 1.5));
    const auto dir = std::filesystem::temp_directory_path() / "birkhoff_bitmap_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "set.pbm").string();
    (a | b).write_pbm(path);
    CHECK(std::filesystem::exists(dir / "set.json"));
    CHECK(AnnulusBitmap::read_pbm(path) == (a | b));
    std::filesystem::remove_all(dir);
}

TEST_CASE("linear contraction: escape time gives exactly the zero-section row") {
    const auto g = small_geometry();
    const auto row = row_bitmap(g, 32);
    const auto c0 = compute_c0(halving_map(), g, {.method = C0Method::escape_time});
    CHECK(c0.cells == row);
    CHECK(c0.iterations == 60);
    const auto c1 = compute_c1(c0.cells);
    CHECK(c1.cells == row);
    CHECK(c1.separates);
    CHECK(hausdorff_cells(c1.cells, row).distance == 0.0);
    // nested intersection
    const auto shallow = compute_c0(halving_map(), g, {.n_max = 3, .method = C0Method::escape_time});
    CHECK(c0.cells.subset_of(shallow.cells));
    CHECK(shallow.cells.count() > c0.cells.count());
}

TEST_CASE("linear contraction: cell recursion is within one cell, and hair removal recovers the row") {
    const auto g = small_geometry();
    const auto row = row_bitmap(g, 32);
    const auto c0 = compute_c0(halving_map(), g);
    CHECK(c0.fixpoint);
    CHECK(row.subset_of(c0.cells));
    CHECK(hausdorff_cells(c0.cells, row).distance <= 1.0);
    CHECK(compute_c1(c0.cells).cells == row);
    const auto early = compute_c0(halving_map(), g, {.n_max = 2, .stop_at_fixpoint = false});
    CHECK(c0.cells.subset_of(early.cells));
    CHECK(early.cells.count() > c0.cells.count());
}

TEST_CASE("expanding map is refused as not absorbing") {
    const AnnulusMap doubling{[](std::span<double>, std::span<double> p, Direction d) {
                                  for (auto& v : p) v = d == Direction::forward ? 2.0 * v : 0.5 * v;
                              },
                              1.0};
    CHECK_THROWS_AS(compute_c0(doubling, small_geometry()), DomainNotAbsorbing);
}

TEST_CASE("hair removal on synthetic sets") {
    const auto g = small_geometry();
    const auto row = row_bitmap(g, 32);
    auto spiked = row;
    for (std::size_t j = 33; j < 45; ++j) spiked.set(20, j);
    CHECK(compute_c1(row).cells == row);
    CHECK(compute_c1(spiked).cells == row);
    CHECK(compute_c1(spiked, {HairRule::adjacency, 1}).cells == row);
    // three rows thick: the middle row survives; two rows thick: both survive
    const auto thick = row_bitmap(g, 31) | row | row_bitmap(g, 33);
    CHECK(compute_c1(thick).cells == row);
    CHECK(compute_c1(thick, {HairRule::adjacency, 1}).cells.empty());
    const auto doubled = row | row_bitmap(g, 33);
    CHECK(compute_c1(doubled).cells == doubled);
    // complement cannot reach the top edge
    CHECK_THROWS_AS(compute_c1(row_bitmap(g, 64)), DegenerateDomain);
    // a closed loop that does not wind around the annulus does not separate it
    AnnulusBitmap loop(g);
    for (std::size_t i = 10; i <= 20; ++i) loop.set(i, 20), loop.set(i, 30);
    for (std::size_t j = 20; j <= 30; ++j) loop.set(10, j), loop.set(20, j);
    CHECK_FALSE(compute_c1(loop).separates);
}

TEST_CASE("Hausdorff distance") {
    const auto g = small_geometry();
    const auto a = row_bitmap(g, 10);
    CHECK(hausdorff(a, a).distance == 0.0);
    const auto b = row_bitmap(g, 14);
    CHECK(hausdorff_cells(a, b).distance == doctest::Approx(4.0));
    CHECK(hausdorff(a, b).distance == doctest::Approx(4.0 * a.cell_height()));
    // the theta metric is periodic
    const std::vector<Point2> p{{0.01, 0.0}}, q{{0.99, 0.0}};
    CHECK(hausdorff(p, q, 1.0).distance == doctest::Approx(0.02));
    CHECK(hausdorff(p, q, 0.0).distance == doctest::Approx(0.98));
    const std::vector<Point2> line{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, point{{1.0, 3.0}};
    const auto h = hausdorff(line, point, 0.0);
    CHECK(h.forward == doctest::Approx(std::hypot(1.0, 3.0)));
    CHECK(h.backward == doctest::Approx(3.0));
    CHECK_THROWS_AS(hausdorff(line, std::vector<Point2>{}, 0.0), ConfigError);
}

TEST_CASE("pendulum attractor matches the heteroclinic branches") {
    const auto& a = pendulum();
    CHECK(a.c0.fixpoint);
    CHECK(a.c1.separates);
    CHECK(a.c1.cells.subset_of(a.c0.cells));
    for (double theta : {0.0, M_PI}) {
        const auto cell = a.c0.cells.cell_of(theta, 0.0);
        REQUIRE(cell);
        CHECK(a.c0.cells.get(cell->first, cell->second));
    }
    const auto h = hausdorff_cells(a.c1.cells, a.branches);
    MESSAGE("C1 vs branches: " << h.forward << " / " << h.backward << " cells");
    CHECK(h.distance <= 3.0);
}

TEST_CASE("pendulum attractor is invariant up to one cell") {
    const auto& a = pendulum();
    const TimeMap map(a.model, 2.0, 0.01);
    auto centers = a.c1.cells.cell_centers();
    std::vector<double> q, p;
    for (const auto& c : centers) q.push_back(c.x), p.push_back(c.y);
    map.apply(q, p, Direction::forward);
    AnnulusBitmap image(a.geometry);
    for (std::size_t k = 0; k < q.size(); ++k) {
        const auto cell = image.cell_of(q[k], p[k]);
        REQUIRE(cell);
        image.set(cell->first, cell->second);
    }
    CHECK(image.subset_of(a.c1.cells.dilated(1)));
}

TEST_CASE("pendulum attractor: resolution stability and friction dependence") {
    const auto& fine = pendulum();
    const auto coarse = compute_pendulum(0.5, 256);
    const auto shift = hausdorff(coarse.c1.cells.cell_centers(), fine.c1.cells.cell_centers(), 2.0 * M_PI);
    CHECK(shift.distance <= 2.0 * coarse.c1.cells.cell_height());
    const auto near = compute_pendulum(0.45, 256);
    const auto weak = compute_pendulum(0.05, 256);
    const double d_near = hausdorff(coarse.c1.cells, near.c1.cells).distance;
    const double d_weak = hausdorff(coarse.c1.cells, weak.c1.cells).distance;
    MESSAGE("d(0.5, 0.45) = " << d_near << ", d(0.5, 0.05) = " << d_weak);
    CHECK(d_near < 0.1);
    CHECK(d_weak > 3.0 * d_near);
}

TEST_CASE("graph inclusion in the attractor") {
    const auto& a = pendulum();
    // u built by integrating the branches: p < 0 on (0, pi), p > 0 on (pi, 2 pi)
    auto right = shoot_heteroclinic(a.model, Side::right).curve;
    auto left = shoot_heteroclinic(a.model, Side::left).curve;
    auto momentum = [](const PolylineCurve& c, double x) {
        for (std::size_t i = 1; i < c.size(); ++i) {
            const double d0 = c.points[i - 1].x - x, d1 = c.points[i].x - x;
            if (d0 * d1 <= 0.0 && d0 != d1) return c.points[i - 1].y + (c.points[i].y - c.points[i - 1].y) * d0 / (d0 - d1);
        }
        return 0.0;
    };
    const std::size_t n = 512;
    const double h = 2.0 * M_PI / n;
    std::vector<double> slope(n + 1), u(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = h * static_cast<double>(i);
        slope[i] = x < M_PI ? momentum(left, x) : momentum(right, x);
    }
    u[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) u[i] = u[i - 1] + 0.5 * h * (slope[i - 1] + slope[i]);
    const GridFunction branch_u(u, 2.0 * M_PI);
    const auto built = check_graph_in_attractor(branch_u, a.c1.cells, 2.0);
    MESSAGE("branch integral offset " << built.max_offset);
    CHECK(built.inside);

    const auto [solution, report] = solve_discounted_lo(a.model, 0.5, n);
    const auto solved = check_graph_in_attractor(solution, a.c1.cells, 3.0);
    MESSAGE("Lax-Oleinik offset " << solved.max_offset);
    CHECK(solved.inside);
    // only the kink band is skipped
    CHECK(solved.nodes_checked + 16 >= n);

    CHECK_THROWS_AS(check_graph_in_attractor(GridFunction::constant(64, 1.0, 0.0), a.c1.cells, 2.0), ConfigError);
}
