#include <algorithm>
#include <cmath>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/kernels.hpp"
#include "birkhoff/weakkam.hpp"

namespace birkhoff {

std::vector<double> momentum_lipschitz(const HamiltonianModel& model, std::size_t n, double momentum_bound) {
    auto [lo, hi] = model.momentum_range();
    lo = std::max(lo, -momentum_bound);
    hi = std::min(hi, momentum_bound);
    const double h = model.period() / static_cast<double>(n);
    const int samples = 401;
    std::vector<double> bound(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = h * static_cast<double>(i);
        double m = 0.0;
        for (int k = 0; k < samples; ++k) {
            const double p = lo + (hi - lo) * k / (samples - 1);
            m = std::max(m, std::abs(model.jet({x, p}).dp));
        }
        bound[i] = m;
    }
    return bound;
}

namespace {

double lf_update(const HamiltonianModel& model, double alpha, double x, double um, double u0, double up, double sigma,
                 double h) {
    const double d = (up - um) / (2.0 * h);
    const double f = alpha * u0 + model.H({x, d}) - sigma * ((up - u0) - (u0 - um)) / (2.0 * h);
    return u0 - h / (2.0 * sigma + alpha * h) * f;
}

}  // namespace

std::vector<double> fd_sweep(const HamiltonianModel& model, double alpha, std::span<const double> u,
                             std::span<const double> sigma) {
    const std::size_t n = u.size();
    const double h = model.period() / static_cast<double>(n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lf_update(model, alpha, h * static_cast<double>(i), u[(i + n - 1) % n], u[i], u[(i + 1) % n], sigma[i], h);
    return out;
}

std::pair<GridFunction, SolveReport> solve_discounted_fd(const HamiltonianModel& model, double alpha, std::size_t n,
                                                         const FdOptions& options) {
    if (n < 16) throw ConfigError("finite-difference grid needs at least 16 nodes");
    if (!(alpha > 0.0)) throw ConfigError("the discounted solver needs alpha > 0");
    if (!(options.tol > 0.0) || !(options.momentum_bound > 0.0))
        throw ConfigError("finite-difference solver needs positive tolerance and momentum bound");
    const double h = model.period() / static_cast<double>(n);
    const auto lipschitz = momentum_lipschitz(model, n, options.momentum_bound);
    const auto worst = std::max_element(lipschitz.begin(), lipschitz.end());
    const double required = *worst;
    if (options.sigma && *options.sigma < required * (1.0 - 1e-12)) {
        throw ConfigError("viscosity sigma=" + io::format_double(*options.sigma) +
                          " is below the Lipschitz bound " + io::format_double(required) + " of dH/dp at x=" +
                          io::format_double(h * static_cast<double>(worst - lipschitz.begin())) +
                          "; the scheme would not be monotone");
    }
    std::vector<double> sigma(n), viscosity(n), step(n), potential(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sigma[i] = options.local_viscosity ? lipschitz[i] : options.sigma.value_or(required);
        sigma[i] = std::max(sigma[i], 1e-12);
        viscosity[i] = sigma[i] / (2.0 * h);
        step[i] = h / (2.0 * sigma[i] + alpha * h);
    }
    const double min_step = *std::min_element(step.begin(), step.end());

    const bool fast = model.potential().has_value() && !model.surface();
    std::vector<std::size_t> bump_nodes;
    if (fast) {
        for (std::size_t i = 0; i < n; ++i) potential[i] = model.potential()->value(h * static_cast<double>(i));
        if (const auto& b = model.bump()) {
            for (std::size_t i = 0; i < n; ++i) {
                double dx = h * static_cast<double>(i) - b->x0;
                dx -= model.period() * std::round(dx / model.period());
                if (std::abs(dx) < b->radius_x) bump_nodes.push_back(i);
            }
        }
    }

    std::vector<double> ext(n + 2, 0.0), out(n);
    SolveReport report;
    report.method = "finite-difference";
    const double stop = options.tol * alpha * min_step;
    double previous = INFINITY;
    int growth = 0;
    for (std::size_t sweep = 1;; ++sweep) {
        ext[0] = ext[n];
        ext[n + 1] = ext[1];
        if (fast) {
            kernels::lf_sweep({ext.data(), potential.data(), viscosity.data(), step.data(), alpha, 1.0 / (2.0 * h),
                               out.data(), n});
            for (std::size_t i : bump_nodes) {
                const double d = (ext[i + 2] - ext[i]) / (2.0 * h);
                out[i] -= step[i] * model.bump_value(h * static_cast<double>(i), d);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i)
                out[i] = lf_update(model, alpha, h * static_cast<double>(i), ext[i], ext[i + 1], ext[i + 2], sigma[i], h);
        }
        const double change = kernels::max_abs_diff(out.data(), ext.data() + 1, n);
        std::copy(out.begin(), out.end(), ext.begin() + 1);
        report.iterations = sweep;
        report.final_change = change;
        if (!std::isfinite(change)) throw ConvergenceError("finite-difference iteration produced non-finite values");
        if (change <= stop) break;
        growth = (change > previous * (1.0 + 1e-12) && change > 1e-13) ? growth + 1 : 0;
        if (growth >= 10)
            throw ConvergenceError("finite-difference sup-change grew for 10 consecutive sweeps (monotonicity lost)");
        previous = change;
        if (sweep >= options.max_sweeps)
            throw ConvergenceError("finite-difference sweep cap reached with sup-change " + io::format_double(change));
    }
    GridFunction result(std::vector<double>(ext.begin() + 1, ext.end() - 1), model.period());
    report.kinks = detect_kinks(result);
    report.residual = hj_residual(model, alpha, result, report.kinks);
    return {std::move(result), std::move(report)};
}

}  // namespace birkhoff
