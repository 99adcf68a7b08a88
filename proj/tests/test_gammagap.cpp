#include <cmath>
#include <filesystem>
#include <numbers>

#include "birkhoff/error.hpp"
#include "birkhoff/gammagap.hpp"
#include "birkhoff/io.hpp"
#include "doctest.h"

using namespace birkhoff;
using std::numbers::pi;

namespace {

PolylineCurve sampled(std::size_t n, double t0, double t1, auto&& f) {
    PolylineCurve c;
    for (std::size_t k = 0; k <= n; ++k) c.points.push_back(f(t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n)));
    return c;
}

PolylineCurve zero_section(std::size_t n = 64) {
    return sampled(n, 0.0, 2.0 * pi, [](double t) { return Point2{t, 0.0}; });
}

PolylineCurve graph_of(auto&& f, std::size_t n = 20000) {
    return sampled(n, 0.0, 2.0 * pi, [&](double t) { return Point2{t, f(t)}; });
}

const GapMeasurement& gap(double alpha, double beta) {
    static std::vector<GapMeasurement> cache;
    for (const auto& g : cache)
        if (g.alpha == alpha && g.beta == beta) return g;
    cache.push_back(measure_gap(alpha, beta));
    return cache.back();
}

double circle_distance(double a, double b) {
    const double d = std::abs(std::remainder(a - b, 2.0 * pi));
    return d;
}

}  // namespace

TEST_CASE("crossing of two segments") {
    const PolylineCurve a{{{0.0, 0.0}, {3.0, 1.0}}};
    const PolylineCurve b{{{1.0, -1.0}, {1.0, 5.0}}};
    const auto c = first_intersection(a, b, {1.0, 0.0});
    CHECK(std::abs(c.point.x - 1.0) <= 1e-12);
    CHECK(std::abs(c.point.y - 1.0 / 3.0) <= 1e-12);
    CHECK(c.s_a == doctest::Approx(1.0 / 3.0));
    CHECK(c.s_b == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("identical curves have no transversal crossing") {
    const auto c = graph_of([](double t) { return std::sin(t); }, 200);
    CHECK(crossings(c, c).empty());
    CHECK_THROWS_AS(first_intersection(c, c, {0.0, 0.0}), NotFoundError);
}

TEST_CASE("earliest crossing along the first curve, restricted to a disc") {
    // zigzag crossing the x axis at x = 1 and x = 3
    const PolylineCurve zig{{{0.0, -1.0}, {2.0, 1.0}, {4.0, -1.0}}};
    const PolylineCurve axis{{{5.0, 0.0}, {-1.0, 0.0}}};
    CHECK(crossings(zig, axis).size() == 2);
    CHECK(first_intersection(zig, axis, {0.0, 0.0}).point.x == doctest::Approx(1.0));
    CHECK(first_intersection(zig, axis, {3.0, 0.0}, 0.5).point.x == doctest::Approx(3.0));
    CHECK(first_intersection(zig.reversed(), axis, {0.0, 0.0}).point.x == doctest::Approx(3.0));
    CHECK_THROWS_AS(first_intersection(zig, axis, {10.0, 10.0}, 1.0), NotFoundError);
}

TEST_CASE("shoelace area") {
    const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(shoelace_area(square) == doctest::Approx(1.0));
    const std::vector<Point2> triangle{{0, 0}, {2, 0}, {0, 2}, {0, 0}};
    CHECK(shoelace_area(triangle) == doctest::Approx(2.0));
    std::vector<Point2> reversed(square.rbegin(), square.rend());
    CHECK(shoelace_area(reversed) == doctest::Approx(1.0));
    const std::vector<Point2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK(self_intersects(bowtie));
    CHECK_THROWS_AS(shoelace_area(bowtie), GeometryError);
    // a vertex touching a non-adjacent edge
    const std::vector<Point2> pinched{{0, 0}, {2, 0}, {2, 2}, {1, 0}, {0, 2}};
    CHECK_THROWS_AS(shoelace_area(pinched), GeometryError);
    CHECK_THROWS_AS(shoelace_area(std::vector<Point2>{{0, 0}, {1, 1}}), GeometryError);
}

TEST_CASE("frictionless separatrix encloses area 8 over the zero section") {
    ShootConfig dense;
    dense.resample = 0;
    const auto branch = shoot_heteroclinic(HamiltonianModel::pendulum(0.0), Side::right, dense).curve.shifted(-2.0 * pi);
    // close along the zero section
    auto polygon = branch.points;
    polygon.push_back({branch.back().x, 0.0});
    CHECK(shoelace_area(polygon) == doctest::Approx(8.0).epsilon(1e-3 / 8.0));
    CHECK(area_over_zero_section(branch) == doctest::Approx(8.0).epsilon(1e-3 / 8.0));
}

TEST_CASE("area against the zero section of a graph") {
    // integral of 1 + sin over one period
    const auto c = graph_of([](double t) { return 1.0 + std::sin(t); }, 4000);
    CHECK(area_over_zero_section(c) == doctest::Approx(2.0 * pi).epsilon(1e-9));
    // negative graphs give negative areas
    const auto d = graph_of([](double t) { return -2.0 + 0.5 * std::cos(t); }, 4000);
    CHECK(area_over_zero_section(d) == doctest::Approx(-4.0 * pi).epsilon(1e-9));
}

TEST_CASE("energy formula for the enclosed area") {
    const auto m = HamiltonianModel::pendulum(0.1);
    CHECK(enclosed_area_energy(m, 0.1, 0.1, {3.0, -0.1}) == 0.0);
    // energy drop 1 - E at (pi/2, -1) is 1 - 1/2
    CHECK(enclosed_area_energy(m, 0.1, 0.01, {pi / 2.0, -1.0}) == doctest::Approx(0.5 * 90.0));
    CHECK_THROWS_AS(enclosed_area_energy(m, 0.1, 0.01, {0.0, 3.0}), ConfigError);
    CHECK_THROWS_AS(enclosed_area_energy(m, 0.01, 0.1, {0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(enclosed_area_energy(m, 0.1, 0.0, {0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(measure_gap(0.1, 0.1), ConfigError);
}

TEST_CASE("gap between the alpha = 0.1 and beta = 0.01 spirals") {
    const auto& g = gap(0.1, 0.01);
    MESSAGE("crossing (" << g.crossing.point.x << ", " << g.crossing.point.y << "), area " << g.area_energy);
    CHECK(g.crossing.point.y < 0.0);
    CHECK(g.area_energy >= 4.0 * (1.0 - 0.1));
    CHECK(std::abs(g.area_energy - 7.2) <= 0.15 * 7.2);
    CHECK(std::abs(g.area_energy - g.area_shoelace) <= 0.02 * g.area_shoelace);
}

TEST_CASE("the crossing moves to the saddle as the weak friction vanishes") {
    double previous = std::numeric_limits<double>::infinity();
    for (double beta : {0.01, 0.002, 5e-4, 2e-4}) {
        const auto& g = gap(0.1, beta);
        const double d = std::hypot(g.crossing.point.x - pi, g.crossing.point.y);
        CHECK(d < previous);
        previous = d;
    }
    CHECK(circle_distance(gap(0.1, 2e-4).crossing.point.x, -pi) <= 0.3);
}

TEST_CASE("area lower bound and oracle agreement over a friction grid") {
    for (double alpha : {0.1, 0.2}) {
        for (double ratio : {10.0, 50.0}) {
            const auto& g = gap(alpha, alpha / ratio);
            CAPTURE(alpha);
            CAPTURE(ratio);
            CHECK(g.area_energy >= g.bound_4);
            CHECK(std::abs(g.area_energy - g.area_shoelace) <= 0.02 * g.area_shoelace);
        }
    }
}

TEST_CASE("energy drop over the weak friction tends to the separatrix area") {
    std::vector<double> excess;
    for (double beta : {0.02, 0.01, 0.004, 0.002, 0.001}) excess.push_back(gap(0.1, beta).energy_drop / beta - 8.0);
    for (std::size_t k = 1; k < excess.size(); ++k) CHECK(excess[k] <= excess[k - 1] + 0.05 * 8.0);
    CHECK(std::abs(excess.back()) <= 0.05 * 8.0);
}

TEST_CASE("gap table") {
    const auto path = (std::filesystem::temp_directory_path() / "birkhoff_gap_table.csv").string();
    const std::vector<GapMeasurement> rows{gap(0.1, 0.01), gap(0.2, 0.004)};
    write_gap_table(path, rows);
    std::vector<std::string> header;
    const auto table = io::read_numeric_csv(path, &header);
    REQUIRE(table.size() == 2);
    CHECK(header.at(3) == "area_energy");
    CHECK(table[1][1] == doctest::Approx(0.004));
    CHECK(table[0][3] == doctest::Approx(rows[0].area_energy));
    std::filesystem::remove(path);
}

TEST_CASE("min-area regions of a sine graph") {
    const double eps = 0.3;
    const auto r = min_area_bound(zero_section(), graph_of([&](double t) { return eps * std::sin(t); }), 2.0 * pi, pi);
    CHECK(r.t0.x == doctest::Approx(pi));
    for (double v : {r.a, r.a_prime, r.b, r.b_prime}) CHECK(std::abs(v - 2.0 * eps) <= 1e-6);
    CHECK(r.min == doctest::Approx(2.0 * eps));
}

TEST_CASE("min-area regions of a folded curve") {
    // x = t - 1.5 sin t folds back near t = 0; each lobe has area 2 eps
    const double eps = 0.2;
    const auto curve = sampled(40000, 0.0, 2.0 * pi, [&](double t) { return Point2{t - 1.5 * std::sin(t), eps * std::sin(t)}; });
    const auto r = min_area_bound(zero_section(), curve, 2.0 * pi, pi);
    for (double v : {r.a, r.a_prime, r.b, r.b_prime}) CHECK(std::abs(v - 2.0 * eps) <= 1e-6);
}

TEST_CASE("min-area identity and symmetry") {
    const double eps = 0.25;
    // four crossings per period, not symmetric
    const auto r = min_area_bound(zero_section(), graph_of([&](double t) { return eps * (std::sin(t) + 1.2 * std::cos(2.0 * t)); }),
                                  2.0 * pi, pi);
    CHECK(std::abs((r.a + r.b) - (r.a_prime + r.b_prime)) <= 1e-6);
    CHECK(std::abs(r.a_prime - r.b_prime) > 0.05);
    // symmetric under (x, p) -> (2 pi - x, -p)
    const auto s = min_area_bound(zero_section(), graph_of([&](double t) { return eps * (std::sin(t) + 0.3 * std::sin(3.0 * t)); }),
                                  2.0 * pi, pi);
    for (double v : {s.a_prime, s.b, s.b_prime}) CHECK(std::abs(v - s.a) <= 1e-6);
}

TEST_CASE("min-area preconditions") {
    const auto above = graph_of([](double t) { return 1.0 + 0.1 * std::sin(t); }, 400);
    CHECK_THROWS_AS(min_area_bound(zero_section(), above, 2.0 * pi, pi), ConfigError);
    const PolylineCurve open{{{0.0, 0.0}, {1.0, 1.0}, {2.0, -1.0}, {3.0, 0.5}}};
    CHECK_THROWS_AS(min_area_bound(zero_section(), open, 2.0 * pi, pi), ConfigError);
    const PolylineCurve not_graph{{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}, {2.0 * pi, 0.0}}};
    CHECK_THROWS_AS(min_area_bound(not_graph, graph_of([](double t) { return std::sin(t); }, 400), 2.0 * pi, pi),
                    ConfigError);
}
