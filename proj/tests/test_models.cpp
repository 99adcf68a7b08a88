#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "birkhoff/error.hpp"
#include "birkhoff/models.hpp"
#include "doctest.h"

using namespace birkhoff;
constexpr double pi = std::numbers::pi;

namespace {

// Brute-force sup_p (p v - H) on a fine momentum grid.
double grid_legendre(const HamiltonianModel& m, double q, double v, double p_lo, double p_hi) {
    double best = -INFINITY;
    const int n = 200001;
    for (int k = 0; k < n; ++k) {
        const double p = p_lo + (p_hi - p_lo) * k / (n - 1);
        best = std::max(best, p * v - m.H({q, p}));
    }
    return best;
}

}  // namespace

TEST_CASE("pendulum energy at the equilibria") {
    const auto m = HamiltonianModel::pendulum(0.5);
    CHECK(m.H({0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(m.H({pi, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.H({0.3, 1.7}) == doctest::Approx(0.5 * 1.7 * 1.7 - std::cos(0.3)).epsilon(1e-15));
}

TEST_CASE("appendix pendulum is normalized with the saddle at x=0") {
    const auto m = HamiltonianModel::appendix_pendulum(0.5);
    CHECK(std::abs(m.H({0.0, 0.0})) < 1e-15);
    CHECK(m.H({0.5, 0.0}) == doctest::Approx(-2.0));
    CHECK(m.saddle_q() == 0.0);
    CHECK(m.focus_q() == doctest::Approx(0.5));
    // max_x min_p H = 0
    double crit = -INFINITY;
    for (int i = 0; i < 1000; ++i) crit = std::max(crit, m.H({i / 1000.0, 0.0}));
    CHECK(std::abs(crit) < 1e-12);
}

TEST_CASE("models are periodic in the base variable") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uq(-10.0, 10.0), up(-3.0, 3.0);
    const auto pend = HamiltonianModel::pendulum(0.1);
    const auto app = HamiltonianModel::appendix_pendulum(0.1);
    const auto pert = build_perturbed(app, {0.5, 1.6, 0.05, 0.1, 5.0});
    for (int k = 0; k < 200; ++k) {
        const double q = uq(rng), p = up(rng);
        CHECK(std::abs(pend.H({q, p}) - pend.H({q + 2 * pi, p})) < 1e-12);
        CHECK(std::abs(app.H({q, p}) - app.H({q + 1.0, p})) < 1e-12);
        CHECK(std::abs(pert.H({q, p}) - pert.H({q + 1.0, p})) < 1e-12);
    }
}

TEST_CASE("damped vector field") {
    const auto m = HamiltonianModel::pendulum(0.5);
    auto f = m.field({0.0, 1.0});
    CHECK(f.q == doctest::Approx(1.0));
    CHECK(f.p == doctest::Approx(-0.5));
    f = m.field({pi, 0.0});
    CHECK(f.q == 0.0);
    CHECK(std::abs(f.p) < 1e-15);
    f = HamiltonianModel::pendulum(0.0).field({pi / 2, 0.0});
    CHECK(f.q == 0.0);
    CHECK(f.p == doctest::Approx(-1.0));
}

TEST_CASE("field divergence equals -alpha") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uq(0.0, 1.0), up(-2.5, 2.5);
    for (double alpha : {0.0, 0.5, 1.3}) {
        const auto app = HamiltonianModel::appendix_pendulum(alpha);
        const auto pert = build_perturbed(app, {0.5, 1.6, 0.08, 0.2, 3.0});
        for (const auto* m : {&app, &pert}) {
            for (int k = 0; k < 100; ++k) {
                const double q = uq(rng), p = up(rng), h = 1e-6;
                const double div = (m->field({q + h, p}).q - m->field({q - h, p}).q) / (2 * h) +
                                   (m->field({q, p + h}).p - m->field({q, p - h}).p) / (2 * h);
                CHECK(std::abs(div + alpha) < 1e-6);
            }
        }
    }
}

TEST_CASE("Legendre transform of the pendulum family") {
    const auto pend = HamiltonianModel::pendulum(0.5);
    CHECK(pend.lagrangian(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(pend.lagrangian(pi, 2.0) == doctest::Approx(1.0));
    const auto app = HamiltonianModel::appendix_pendulum(0.5);
    for (double x : {0.0, 0.2, 0.5, 0.77}) {
        for (double v : {-1.5, 0.0, 0.7}) {
            const double closed = 0.5 * v * v - std::cos(2 * pi * x) + 1.0;
            CHECK(app.lagrangian(x, v) == doctest::Approx(closed).epsilon(1e-14));
            CHECK(std::abs(grid_legendre(app, x, v, -6.0, 6.0) - closed) < 1e-8);
        }
    }
}

TEST_CASE("Fenchel inequality and double Legendre") {
    const auto m = HamiltonianModel::pendulum(0.2);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uq(0.0, 2 * pi), up(-3.0, 3.0);
    for (int k = 0; k < 300; ++k) {
        const double q = uq(rng), p = up(rng), v = up(rng);
        CHECK(p * v <= m.H({q, p}) + m.lagrangian(q, v) + 1e-9);
    }
    for (int k = 0; k < 20; ++k) {
        const double q = uq(rng), p = up(rng);
        double sup = -INFINITY;
        for (int i = 0; i <= 20000; ++i) {
            const double v = -6.0 + 12.0 * i / 20000.0;
            sup = std::max(sup, p * v - m.lagrangian(q, v));
        }
        CHECK(std::abs(sup - m.H({q, p})) < 1e-6);
    }
}

TEST_CASE("Legendre refuses the non-convex perturbation") {
    const auto pert = build_perturbed(HamiltonianModel::appendix_pendulum(0.5), {0.5, 1.6, 0.05, 0.1, 5.0});
    CHECK_FALSE(pert.fiber_convex());
    CHECK_THROWS_AS(pert.lagrangian(0.5, 0.0), UnsupportedOperation);
}

TEST_CASE("bump perturbation") {
    const auto base = HamiltonianModel::appendix_pendulum(0.5);
    const BumpSpec spec{0.5, 1.6, 0.05, 0.1, 5.0};
    const auto pert = build_perturbed(base, spec);
    CHECK(pert.H({0.5, 1.6}) == doctest::Approx(base.H({0.5, 1.6}) + 5.0));
    CHECK(pert.H({0.5, 1.75}) == base.H({0.5, 1.75}));
    CHECK(pert.H({0.56, 1.6}) == base.H({0.56, 1.6}));
    const auto box = *pert.bump_support();
    CHECK(box.q_lo == doctest::Approx(0.45));
    CHECK(box.p_hi == doctest::Approx(1.7));
    const auto flat = build_perturbed(base, {0.5, 1.6, 0.05, 0.1, 0.0});
    for (double p = -2.0; p <= 2.0; p += 0.05) CHECK(flat.H({0.5, p}) == base.H({0.5, p}));
    CHECK(flat.fiber_convex());
    CHECK_THROWS_AS(build_perturbed(base, {0.5, 1.6, 0.0, 0.1, 1.0}), ConfigError);
    CHECK_THROWS_AS(build_perturbed(base, {0.5, 1.6, 0.1, -0.1, 1.0}), ConfigError);
}

TEST_CASE("bump partials are analytic") {
    const auto pert = build_perturbed(HamiltonianModel::appendix_pendulum(0.5), {0.5, 1.6, 0.05, 0.1, 5.0});
    for (double x : {0.47, 0.5, 0.52}) {
        for (double p : {1.55, 1.6, 1.66}) {
            const double h = 1e-7;
            const auto j = pert.jet({x, p});
            CHECK(j.dq == doctest::Approx((pert.H({x + h, p}) - pert.H({x - h, p})) / (2 * h)).epsilon(1e-5));
            CHECK(j.dp == doctest::Approx((pert.H({x, p + h}) - pert.H({x, p - h})) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("tabulated surface reproduces the pendulum") {
    const std::size_t nx = 256, np = 121;
    const double dx = 1.0 / nx, dp = 0.05, p0 = -3.0;
    std::vector<double> values(nx * np);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            const double x = i * dx, p = p0 + j * dp;
            values[i * np + j] = 0.5 * p * p + std::cos(2 * pi * x) - 1.0;
        }
    auto table = std::make_shared<TabulatedSurface>(nx, np, 0.0, p0, dx, dp, values);
    CHECK(table->fiber_convex());
    const auto tab = HamiltonianModel::from_surface(ModelKind::tabulated, table, 0.5);
    const auto exact = HamiltonianModel::appendix_pendulum(0.5);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uq(-1.0, 2.0), up(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const PhasePoint z{uq(rng), up(rng)};
        const auto a = tab.jet(z), b = exact.jet(z);
        CHECK(std::abs(a.value - b.value) < 1e-5);
        CHECK(std::abs(a.dp - b.dp) < 1e-9);  // exact for quadratics in p
        CHECK(std::abs(a.dq - b.dq) < 2e-3);
    }
    CHECK_THROWS_AS(tab.H({0.1, 3.2}), DomainError);
    CHECK(tab.lagrangian(0.3, 0.4) == doctest::Approx(exact.lagrangian(0.3, 0.4)).epsilon(1e-5));
}

TEST_CASE("tabulated convexity flag and csv round trip") {
    const std::size_t nx = 8, np = 9;
    std::vector<double> values(nx * np);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < np; ++j) values[i * np + j] = std::pow(j - 4.0, 2) + 0.1 * i;
    TabulatedSurface convex(nx, np, 0.0, -1.0, 0.125, 0.25, values);
    CHECK(convex.fiber_convex());
    values[3 * np + 4] += 3.0;
    TabulatedSurface bent(nx, np, 0.0, -1.0, 0.125, 0.25, values);
    CHECK_FALSE(bent.fiber_convex());

    const std::string path = "tabulated_roundtrip.csv";
    bent.write_csv(path);
    const auto back = TabulatedSurface::read_csv(path);
    CHECK(back.values() == bent.values());
    CHECK(back.dp() == bent.dp());
    std::remove(path.c_str());
}
