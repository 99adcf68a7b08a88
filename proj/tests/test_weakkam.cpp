#include <array>
#include <cmath>
#include <random>

#include "birkhoff/contraction.hpp"
#include "birkhoff/error.hpp"
#include "birkhoff/flow.hpp"
#include "birkhoff/weakkam.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {

// Momentum where a shot branch first crosses the vertical x = target (linear interpolation).
double branch_momentum_at(const Branch& b, double target) {
    const auto& pts = b.curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a = pts[i - 1].x - target, c = pts[i].x - target;
        if (a * c <= 0.0 && a != c) return pts[i - 1].y + (pts[i].y - pts[i - 1].y) * a / (a - c);
    }
    return NAN;
}

struct AppendixSolutions {
    std::size_t n = 2048;
    double alpha = 0.5;
    HamiltonianModel model = HamiltonianModel::appendix_pendulum(0.5);
    GridFunction lo;
    SolveReport lo_report;
    GridFunction fd;
    SolveReport fd_report;
    Branch right, left;
};

const AppendixSolutions& appendix() {
    static const AppendixSolutions s = [] {
        AppendixSolutions r{.lo = GridFunction::constant(16, 1.0, 0.0), .fd = GridFunction::constant(16, 1.0, 0.0)};
        std::tie(r.lo, r.lo_report) = solve_discounted_lo(r.model, r.alpha, r.n);
        std::tie(r.fd, r.fd_report) = solve_discounted_fd(r.model, r.alpha, r.n);
        r.right = shoot_heteroclinic(r.model, Side::right);
        r.left = shoot_heteroclinic(r.model, Side::left);
        return r;
    }();
    return s;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("Lax-Oleinik step keeps zero for the free model") {
    const auto free = HamiltonianModel::constant_potential(0.0, 0.5);
    for (double tau : {0.01, 0.05, 0.2}) {
        const auto u = lax_oleinik_step(free, 0.5, GridFunction::constant(128, 1.0, 0.0), tau, 2.0);
        CHECK(u.sup_norm() <= 1e-15);
    }
}

TEST_CASE("Lax-Oleinik refuses oversized windows and non-convex models") {
    const auto m = HamiltonianModel::appendix_pendulum(0.5);
    CHECK_THROWS_AS(LaxOleinikOperator(m, 0.5, 64, 0.2, 6.0), ConfigError);
    CHECK_THROWS_AS(LaxOleinikOperator(m, 0.5, 64, 0.3), ConfigError);
    const auto bumped = build_perturbed(m, {0.5, 0.0, 0.05, 0.5, 5.0});
    CHECK_THROWS_AS(LaxOleinikOperator(bumped, 0.5, 64, 0.05), UnsupportedOperation);
}

TEST_CASE("Lax-Oleinik step is monotone and an exact contraction") {
    std::mt19937_64 rng(7);
    const std::size_t n = 256;
    for (double alpha : {0.1, 0.5, 1.0}) {
        const auto m = HamiltonianModel::appendix_pendulum(alpha);
        const LaxOleinikOperator T(m, alpha, n, 0.05);
        std::vector<double> a(n), b(n);
        for (int trial = 0; trial < 40; ++trial) {
            const auto u1 = random_values(rng, n, 1.0);
            auto u2 = random_values(rng, n, 1.0);
            T.apply(u1, a);
            T.apply(u2, b);
            double in = 0.0, out = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                in = std::max(in, std::abs(u1[i] - u2[i]));
                out = std::max(out, std::abs(a[i] - b[i]));
            }
            CHECK(out <= T.contraction() * in + 1e-12);
            // u3 >= u1 pointwise must give T u3 >= T u1
            auto u3 = u1;
            for (std::size_t i = 0; i < n; ++i) u3[i] += std::abs(u2[i]);
            T.apply(u3, b);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(b[i] >= a[i]);
        }
    }
}

TEST_CASE("constant potential solves to c/alpha") {
    const double c = 0.3, alpha = 0.5;
    const auto m = HamiltonianModel::constant_potential(c, alpha);
    auto [lo, lo_report] = solve_discounted_lo(m, alpha, 64, {.tol = 1e-12});
    auto [fd, fd_report] = solve_discounted_fd(m, alpha, 64, {.tol = 1e-12});
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(lo[i] == doctest::Approx(c / alpha).epsilon(1e-10));
        CHECK(std::abs(fd[i] - c / alpha) <= 1e-10);
    }
    CHECK(lo_report.kinks.empty());
    const auto report = check_viscosity(fd, discounted_equation(m, alpha), 1e-9);
    CHECK(report.pass);
    CHECK(report.violations.empty());
}

TEST_CASE("one-sided derivatives on sampled functions") {
    const std::size_t n = 2048;
    const auto s = GridFunction::sample(n, 1.0, [](double x) { return std::sin(2.0 * M_PI * x); });
    const auto d = one_sided_derivatives(s, 0);
    CHECK(std::abs(d.left - 2.0 * M_PI) <= 1e-3);
    CHECK(std::abs(d.right - 2.0 * M_PI) <= 1e-3);
    CHECK(d.reliable);
    const auto a = GridFunction::sample(n, 1.0, [](double x) { return std::abs(x - 0.5); });
    const auto k = one_sided_derivatives(a, n / 2);
    CHECK(std::abs(k.left + 1.0) <= 1e-6);
    CHECK(std::abs(k.right - 1.0) <= 1e-6);
}

TEST_CASE("kink detection finds sharp and smeared corners") {
    const std::size_t n = 1024;
    const auto sharp = GridFunction::sample(n, 1.0, [](double x) { return 0.3 - std::abs(x - 0.3); });
    auto kinks = detect_kinks(sharp);
    // the periodic extension also has an upward corner at x = 0.8
    REQUIRE(kinks.size() == 2);
    CHECK(kinks[0].downward() != kinks[1].downward());
    // a corner smoothed over a few cells
    const double h = 1.0 / n;
    const auto smooth = GridFunction::sample(n, 1.0, [h](double x) {
        const double y = x - 0.5;
        return std::sin(2.0 * M_PI * x) / 10.0 - std::sqrt(y * y + 4.0 * h * h);
    });
    kinks = detect_kinks(smooth);
    bool found = false;
    for (const auto& k : kinks)
        if (std::abs(k.x - 0.5) <= 2.0 * h) {
            found = true;
            // slopes of the two pieces are 1 - pi/5 and -1 - pi/5
            CHECK(k.left - k.right > 1.5);
            CHECK(k.left > 0.0);
        }
    CHECK(found);
}

TEST_CASE("appendix pendulum: a single kink at x = 1/2 matching the branches") {
    const auto& s = appendix();
    const double h = 1.0 / static_cast<double>(s.n);
    REQUIRE(s.lo_report.kinks.size() == 1);
    const auto& k = s.lo_report.kinks.front();
    CHECK(std::abs(k.x - 0.5) <= 2.0 * h);
    CHECK(k.left > k.right);
    const double top = branch_momentum_at(s.right, 0.5);
    const double bottom = branch_momentum_at(s.left, -0.5);
    REQUIRE(std::isfinite(top));
    REQUIRE(std::isfinite(bottom));
    CHECK(top == doctest::Approx(-bottom).epsilon(1e-9));
    const auto d = one_sided_derivatives(s.lo, k.node);
    CHECK(std::abs(d.left - top) <= 5.0 * h);
    CHECK(std::abs(d.right - bottom) <= 5.0 * h);
}

TEST_CASE("appendix pendulum: residuals and solver agreement") {
    const auto& s = appendix();
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.n));
    CHECK(s.lo_report.residual <= 5.0 * bound);
    CHECK(s.fd_report.residual <= 5.0 * bound);
    CHECK(s.lo.sup_distance(s.fd) <= 10.0 * bound);
    CHECK(s.lo_report.residual == hj_residual(s.model, s.alpha, s.lo, s.lo_report.kinks));
    REQUIRE(s.fd_report.kinks.size() == 1);
    CHECK(std::abs(s.fd_report.kinks.front().x - 0.5) <= 2.0 / static_cast<double>(s.n));
}

TEST_CASE("appendix pendulum: viscosity check passes for the solution") {
    const auto& s = appendix();
    const double tol = 10.0 / std::sqrt(static_cast<double>(s.n));
    const auto report = check_viscosity(s.lo, discounted_equation(s.model, s.alpha), tol);
    CHECK(report.pass);
    CHECK(report.kinks.size() == 1);
}

TEST_CASE("bumped equation rejects the unperturbed solution at the kink") {
    const auto& s = appendix();
    const auto bumped = build_perturbed(s.model, {0.5, 0.0, 0.05, 0.5, 5.0});
    const double tol = 10.0 / std::sqrt(static_cast<double>(s.n));
    const auto report = check_viscosity(s.lo, discounted_equation(bumped, s.alpha), tol);
    CHECK_FALSE(report.pass);
    bool witnessed = false;
    for (const auto& v : report.violations) {
        if (v.kind != ViscosityViolation::Kind::superdifferential) continue;
        witnessed = true;
        CHECK(v.value > 0.0);
        CHECK(v.p > branch_momentum_at(s.left, -0.5));
        CHECK(v.p < branch_momentum_at(s.right, 0.5));
    }
    CHECK(witnessed);
}

TEST_CASE("solution on [0, 1/2] integrates the top branch") {
    const auto& s = appendix();
    const double tol = 10.0 / std::sqrt(static_cast<double>(s.n));
    // trapezoid integral of p dx along the branch until it first reaches x = 1/2
    const auto& pts = s.right.curve.points;
    std::vector<std::pair<double, double>> primitive{{pts[0].x, 0.0}};
    for (std::size_t i = 1; i < pts.size() && pts[i - 1].x < 0.5; ++i)
        primitive.emplace_back(pts[i].x, primitive.back().second + 0.5 * (pts[i].y + pts[i - 1].y) * (pts[i].x - pts[i - 1].x));
    double worst = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i <= s.n / 2; ++i) {
        const double x = s.lo.node(i);
        while (j + 1 < primitive.size() && primitive[j].first < x) ++j;
        const auto [x0, y0] = primitive[j - 1];
        const auto [x1, y1] = primitive[j];
        const double integral = x1 > x0 ? y0 + (y1 - y0) * (x - x0) / (x1 - x0) : y0;
        worst = std::max(worst, std::abs(s.lo[i] - (s.lo[0] + integral)));
    }
    CHECK(worst <= tol);
    CHECK(std::abs(s.lo[0]) <= 1e-12);
}

TEST_CASE("finite differences: monotone update and viscosity refusal") {
    const auto m = HamiltonianModel::appendix_pendulum(0.5);
    const std::size_t n = 128;
    const double h = 1.0 / n;
    CHECK_THROWS_AS(solve_discounted_fd(m, 0.5, n, {.sigma = 1.0}), ConfigError);
    const auto sigma = momentum_lipschitz(m, n, 3.0);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int trial = 0; trial < 200; ++trial) {
        // random states whose central differences stay within the momentum bound
        auto u = random_values(rng, n, 0.5 * h);
        const auto base = fd_sweep(m, 0.5, u, sigma);
        const std::size_t i = pick(rng);
        const std::size_t j = (i + (trial % 2 ? 1 : n - 1)) % n;
        u[j] += 0.5 * h;
        const auto bumped = fd_sweep(m, 0.5, u, sigma);
        REQUIRE(bumped[i] >= base[i]);
    }
}

TEST_CASE("grid refinement converges for both solvers") {
    const auto m = HamiltonianModel::appendix_pendulum(0.5);
    auto coarse_gap = [&](auto solve) {
        std::vector<GridFunction> u;
        for (std::size_t n : {256, 512, 1024}) u.push_back(solve(n));
        auto gap = [](const GridFunction& a, const GridFunction& b) {
            double g = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[2 * i]));
            return g;
        };
        return std::pair{gap(u[0], u[1]), gap(u[1], u[2])};
    };
    const auto [lo1, lo2] = coarse_gap([&](std::size_t n) { return solve_discounted_lo(m, 0.5, n).first; });
    const auto [fd1, fd2] = coarse_gap([&](std::size_t n) { return solve_discounted_fd(m, 0.5, n).first; });
    MESSAGE("LO gaps " << lo1 << " " << lo2 << ", FD gaps " << fd1 << " " << fd2);
    CHECK(std::log2(lo1 / lo2) >= 0.5);
    CHECK(std::log2(fd1 / fd2) >= 0.5);
}

TEST_CASE("vanishing discount: gaps shrink and normalization is enforced") {
    const auto m = HamiltonianModel::appendix_pendulum(0.8);
    const auto result = vanishing_discount_driver(m, {0.8, 0.4, 0.2, 0.1}, 1024);
    CHECK(std::abs(result.critical_value) <= 1e-9);
    REQUIRE(result.gaps.size() == 3);
    CHECK(result.gaps[1] < result.gaps[0]);
    CHECK(result.gaps[2] < result.gaps[1]);
    for (const auto& e : result.entries) CHECK(e.u.sup_norm() <= 2.0);
    const auto shifted = HamiltonianModel::constant_potential(0.3, 0.5);
    CHECK(estimate_critical_value(shifted, 64) == doctest::Approx(-0.3));
    CHECK_THROWS_AS(vanishing_discount_driver(shifted, {0.8, 0.4, 0.2}, 64), ConfigError);
    CHECK_THROWS_AS(vanishing_discount_driver(m, {0.8, 0.4}, 64), ConfigError);
    CHECK_THROWS_AS(vanishing_discount_driver(m, {0.4, 0.8, 0.2}, 64), ConfigError);
}

TEST_CASE("varying contractions: closed-form limits") {
    using P2 = std::array<double, 2>;
    auto dist2 = [](const P2& a, const P2& b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); };
    {
        // T_k x = x/2 + (1/k, 0) has limit map x/2 with fixed point 0
        ContractionOptions o{.lipschitz = 0.5, .tol = 1e-8, .max_iterations = 400'000'000};
        o.deviation = [](std::size_t k) { return 1.0 / static_cast<double>(k); };
        const auto r = iterate_varying_contractions(
            [](std::size_t k, const P2& x) { return P2{0.5 * x[0] + 1.0 / static_cast<double>(k), 0.5 * x[1]}; },
            P2{3.0, -2.0}, dist2, o);
        CHECK(dist2(r.limit, P2{0.0, 0.0}) <= 1e-8);
    }
    {
        const auto r = iterate_varying_contractions(
            [](std::size_t, const P2& x) { return P2{0.25 * x[1] + 1.0, 0.25 * x[0] - 1.0}; }, P2{0.0, 0.0}, dist2,
            {.lipschitz = 0.25, .tol = 1e-12});
        // fixed point of the constant map: x = y/4 + 1, y = x/4 - 1
        CHECK(r.limit[0] == doctest::Approx(12.0 / 15.0).epsilon(1e-11));
        CHECK(r.limit[1] == doctest::Approx(-12.0 / 15.0).epsilon(1e-11));
    }
    {
        const double c = 0.7;
        ContractionOptions o{.lipschitz = 0.9, .tol = 1e-7, .keep_iterates = true};
        o.deviation = [](std::size_t k) { return std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 1000))); };
        auto map = [c](std::size_t k, double x) { return 0.9 * x + c + std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 1000))); };
        const auto r = iterate_varying_contractions(map, 0.0, [](double a, double b) { return std::abs(a - b); }, o);
        CHECK(std::abs(r.limit - c / 0.1) <= 1e-6);
        CHECK(r.iterates.size() == r.iterations + 1);
    }
    CHECK_THROWS_AS(iterate_varying_contractions([](std::size_t, double x) { return x + 1.0; }, 0.0,
                                                 [](double a, double b) { return std::abs(a - b); },
                                                 {.lipschitz = 0.5, .max_iterations = 10}),
                    ConvergenceError);
}
