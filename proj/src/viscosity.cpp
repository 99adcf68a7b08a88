#include <algorithm>
#include <cmath>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/weakkam.hpp"

namespace birkhoff {

ViscosityReport check_viscosity(const GridFunction& u, const ViscosityFunction& g, double tol, std::size_t p_samples,
                                const KinkOptions& kink_options) {
    ViscosityReport report;
    report.kinks = detect_kinks(u, kink_options);
    const auto mask = kink_mask(u, report.kinks);
    std::vector<ViscosityViolation> violations;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (mask[i]) continue;
        const double p = u.central_difference(i);
        const double value = g(u.node(i), p, u[i]);
        report.worst_smooth = std::max(report.worst_smooth, std::abs(value));
        if (std::abs(value) > tol) violations.push_back({ViscosityViolation::Kind::smooth, u.node(i), p, value});
    }
    const std::size_t samples = std::max<std::size_t>(p_samples, 2);
    for (const auto& k : report.kinks) {
        const double lo = std::min(k.left, k.right), hi = std::max(k.left, k.right);
        const bool down = k.downward();
        // downward corner: superdifferential [u'_+, u'_-], needs G <= 0
        // upward corner: subdifferential [u'_-, u'_+], needs G >= 0
        double worst = down ? -INFINITY : INFINITY;
        double witness = lo;
        for (std::size_t s = 0; s < samples; ++s) {
            const double p = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(samples - 1);
            const double value = g(k.x, p, u[k.node]);
            if (down ? value > worst : value < worst) {
                worst = value;
                witness = p;
            }
        }
        const double excess = down ? worst : -worst;
        report.worst_kink = std::max(report.worst_kink, std::max(excess, 0.0));
        if (excess > tol) {
            violations.push_back({down ? ViscosityViolation::Kind::superdifferential
                                       : ViscosityViolation::Kind::subdifferential,
                                  k.x, witness, worst});
        }
    }
    std::sort(violations.begin(), violations.end(),
              [](const auto& a, const auto& b) { return std::abs(a.value) > std::abs(b.value); });
    if (violations.size() > 16) violations.resize(16);
    report.pass = violations.empty();
    report.violations = std::move(violations);
    return report;
}

ViscosityFunction discounted_equation(const HamiltonianModel& model, double alpha) {
    return [model, alpha](double x, double p, double u) { return alpha * u + model.H({x, p}); };
}

double estimate_critical_value(const HamiltonianModel& model, std::size_t n, double momentum_bound) {
    auto [lo, hi] = model.momentum_range();
    lo = std::max(lo, -momentum_bound);
    hi = std::min(hi, momentum_bound);
    const int samples = 401;
    const double dp = (hi - lo) / (samples - 1);
    double best = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = model.period() * static_cast<double>(i) / static_cast<double>(n);
        auto h = [&](double p) { return model.H({x, p}); };
        int arg = 0;
        double m = INFINITY;
        for (int k = 0; k < samples; ++k) {
            const double v = h(lo + dp * k);
            if (v < m) {
                m = v;
                arg = k;
            }
        }
        // golden-section refinement inside the bracketing cells
        double a = lo + dp * std::max(arg - 1, 0), b = lo + dp * std::min(arg + 1, samples - 1);
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 60; ++it) {
            const double c = b - r * (b - a), d = a + r * (b - a);
            if (h(c) < h(d)) b = d; else a = c;
        }
        m = std::min(m, h(0.5 * (a + b)));
        best = std::max(best, m);
    }
    return best;
}

VanishingDiscountResult vanishing_discount_driver(const HamiltonianModel& model, const std::vector<double>& alphas,
                                                  std::size_t n, const LoOptions& options) {
    if (alphas.size() < 3) throw ConfigError("vanishing-discount driver needs at least 3 discount values");
    for (std::size_t k = 1; k < alphas.size(); ++k)
        if (!(alphas[k] < alphas[k - 1])) throw ConfigError("discount values must be strictly decreasing");
    if (!(alphas.back() > 0.0)) throw ConfigError("discount values must be positive");
    VanishingDiscountResult result;
    result.critical_value = estimate_critical_value(model, n);
    if (std::abs(result.critical_value) > 0.05) {
        throw ConfigError("critical value max_x min_p H = " + io::format_double(result.critical_value) +
                          " is not normalized to 0; shift H by this constant first");
    }
    for (double a : alphas) {
        try {
            auto [u, report] = solve_discounted_lo(model.with_alpha(a), a, n, options);
            result.entries.push_back({a, std::move(u), std::move(report)});
        } catch (const NumericalError& e) {
            throw ConvergenceError("solve at alpha=" + io::format_double(a) + " failed: " + e.what());
        }
    }
    for (std::size_t k = 1; k < result.entries.size(); ++k)
        result.gaps.push_back(result.entries[k].u.sup_distance(result.entries[k - 1].u));
    return result;
}

}  // namespace birkhoff
