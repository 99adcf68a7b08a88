#include <algorithm>
#include <cmath>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/kernels.hpp"
#include "birkhoff/parallel.hpp"
#include "birkhoff/weakkam.hpp"

namespace birkhoff {

double hj_residual(const HamiltonianModel& model, double alpha, const GridFunction& u, const std::vector<Kink>& kinks) {
    const auto mask = kink_mask(u, kinks);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (mask[i]) continue;
        const double r = alpha * u[i] + model.H({u.node(i), u.central_difference(i)});
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

LaxOleinikOperator::LaxOleinikOperator(const HamiltonianModel& model, double alpha, std::size_t n, double tau,
                                       double v_max)
    : n_(n), period_(model.period()) {
    if (n < 16) throw ConfigError("Lax-Oleinik grid needs at least 16 nodes");
    if (!(tau > 0.0) || tau > 0.2) throw ConfigError("Lax-Oleinik step tau must lie in (0, 0.2]");
    if (!(v_max > 0.0)) throw ConfigError("velocity bound v_max must be positive");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (!model.fiber_convex())
        throw UnsupportedOperation("Lax-Oleinik needs a fiberwise convex Hamiltonian; use the finite-difference solver");
    const double h = period_ / static_cast<double>(n);
    half_window_ = static_cast<std::size_t>(std::floor(v_max * tau / h + 1e-9));
    if (half_window_ == 0) throw ConfigError("velocity window is smaller than one grid cell; increase tau or v_max");
    if (static_cast<double>(half_window_) * h > 0.5 * period_)
        throw ConfigError("velocity window v_max*tau exceeds half the period; reduce tau");
    discount_ = std::exp(-alpha * tau);
    // exact integral of the discount factor over one step; the Lagrangian itself is taken at the midpoint
    const double weight = alpha > 0.0 ? -std::expm1(-alpha * tau) / alpha : tau;
    const std::size_t K = half_window_, width = 2 * K + 1;
    zeros_.assign(width, 0.0);
    separable_ = model.potential().has_value() && !model.surface();
    if (separable_) {
        kinetic_.resize(width);
        for (std::size_t s = 0; s < width; ++s) {
            const double v = (static_cast<double>(K) - static_cast<double>(s)) * h / tau;
            kinetic_[s] = weight * 0.5 * v * v;
        }
        potential_.resize(2 * n + 2 * K + 1);
        for (std::size_t t = 0; t < potential_.size(); ++t) {
            const double mid = (static_cast<double>(t) - static_cast<double>(K)) * 0.5 * h;
            potential_[t] = -weight * model.potential()->value(mid);
        }
        kappa_.assign(width, weight * 0.5 * (h / tau) * (h / tau));
    } else {
        dense_.resize(n * width);
        kappa_.resize(n * width);
        std::vector<double> d2(width);
        for (std::size_t j = 0; j < n; ++j) {
            double* row = dense_.data() + j * width;
            for (std::size_t s = 0; s < width; ++s) {
                const double k = static_cast<double>(K) - static_cast<double>(s);
                const double mid = (2.0 * static_cast<double>(j) - k) * 0.5 * h;
                row[s] = weight * model.lagrangian(model.wrap(mid), k * h / tau);
            }
            for (std::size_t s = 0; s < width; ++s) {
                const std::size_t a = std::clamp<std::size_t>(s, 1, width - 2);
                d2[s] = row[a - 1] - 2.0 * row[a] + row[a + 1];
            }
            double* kap = kappa_.data() + j * width;
            for (std::size_t s = 0; s + 1 < width; ++s) kap[s] = 0.5 * std::max(0.0, std::min(d2[s], d2[s + 1]));
            kap[width - 1] = 0.0;
        }
    }
}

void LaxOleinikOperator::apply(std::span<const double> u, std::span<double> out, std::size_t workers) const {
    if (u.size() != n_ || out.size() != n_) throw ConfigError("grid function does not match the operator grid");
    const std::size_t K = half_window_, width = 2 * K + 1;
    std::vector<double> ext(n_ + 2 * K);
    for (std::size_t m = 0; m < ext.size(); ++m) ext[m] = u[(m + n_ * (K / n_ + 1) - K) % n_];
    parallel_for(n_, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            kernels::WindowArgs args{};
            args.u = ext.data() + j;
            args.scale = discount_;
            args.count = width;
            if (separable_) {
                args.g1 = kinetic_.data();
                args.g2 = potential_.data() + 2 * j;
                args.kappa = kappa_.data();
            } else {
                args.g1 = dense_.data() + j * width;
                args.g2 = zeros_.data();
                args.kappa = kappa_.data() + j * width;
            }
            out[j] = kernels::window_min(args).value;
        }
    });
}

GridFunction LaxOleinikOperator::apply(const GridFunction& u, std::size_t workers) const {
    std::vector<double> out(n_);
    apply(u.values(), out, workers);
    return GridFunction(std::move(out), period_);
}

GridFunction lax_oleinik_step(const HamiltonianModel& model, double alpha, const GridFunction& u, double tau,
                              double v_max) {
    if (std::abs(u.period() - model.period()) > 1e-12 * model.period())
        throw ConfigError("grid period does not match the model period");
    return LaxOleinikOperator(model, alpha, u.size(), tau, v_max).apply(u);
}

std::pair<GridFunction, SolveReport> solve_discounted_lo(const HamiltonianModel& model, double alpha, std::size_t n,
                                                         const LoOptions& options) {
    if (!(options.tol > 0.0)) throw ConfigError("tolerance must be positive");
    if (!(alpha > 0.0)) throw ConfigError("the discounted solver needs alpha > 0");
    const LaxOleinikOperator op(model, alpha, n, options.tau, options.v_max);
    std::vector<double> u(n, 0.0), next(n);
    const double stop = options.tol * (1.0 - op.contraction());
    SolveReport report;
    report.method = "lax-oleinik";
    for (std::size_t it = 1;; ++it) {
        op.apply(u, next, options.workers);
        report.final_change = kernels::max_abs_diff(u.data(), next.data(), n);
        u.swap(next);
        report.iterations = it;
        if (report.final_change <= stop) break;
        if (it >= options.max_iterations)
            throw ConvergenceError("Lax-Oleinik iteration cap reached with sup-change " +
                                   io::format_double(report.final_change));
    }
    GridFunction result(std::move(u), model.period());
    report.kinks = detect_kinks(result);
    report.residual = hj_residual(model, alpha, result, report.kinks);
    return {std::move(result), std::move(report)};
}

}  // namespace birkhoff
