#include <cmath>

#include "birkhoff/kernels.hpp"

namespace birkhoff::kernels::scalar {

namespace {

// Minimum of the segment parabola between node costs a and b with curvature kappa.
inline double segment_min(double a, double b, double kappa, double& t) {
    const double diff = a - b;
    if (kappa > 0.0 && std::abs(diff) < kappa) {
        t = 0.5 + diff / (2.0 * kappa);
        return 0.5 * (a + b) - 0.25 * kappa - diff * diff / (4.0 * kappa);
    }
    t = diff > 0.0 ? 1.0 : 0.0;
    return diff > 0.0 ? b : a;
}

}  // namespace

WindowMin window_min(const WindowArgs& args) {
    WindowMin best{INFINITY, 0.0};
    double prev = 0.0;
    for (std::size_t s = 0; s < args.count; ++s) {
        const double c = args.scale * args.u[s] + args.g1[s] + args.g2[s];
        if (c < best.value) best = {c, static_cast<double>(s)};
        if (s > 0) {
            double t;
            const double m = segment_min(prev, c, args.kappa[s - 1], t);
            if (m < best.value) best = {m, static_cast<double>(s - 1) + t};
        }
        prev = c;
    }
    return best;
}

void lf_sweep(const SweepArgs& a) {
    for (std::size_t i = 0; i < a.n; ++i) {
        const double um = a.u_ext[i], u0 = a.u_ext[i + 1], up = a.u_ext[i + 2];
        const double d = (up - um) * a.inv_2h;
        const double lap = (up - u0) - (u0 - um);
        const double f = a.alpha * u0 + 0.5 * d * d + a.potential[i] - a.viscosity[i] * lap;
        a.out[i] = u0 - a.step[i] * f;
    }
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

void sine_flow_rk4(const SineFlowArgs& a) {
    const double h = a.dt, h2 = 0.5 * a.dt, h6 = a.dt / 6.0;
    auto force = [&](double q, double p) { return -a.alpha * p - a.amplitude * std::sin(a.frequency * q); };
    for (std::size_t i = 0; i < a.n; ++i) {
        double q = a.q[i], p = a.p[i];
        for (std::size_t k = 0; k < a.steps; ++k) {
            const double k1q = p, k1p = force(q, p);
            const double k2q = p + h2 * k1p, k2p = force(q + h2 * k1q, k2q);
            const double k3q = p + h2 * k2p, k3p = force(q + h2 * k2q, k3q);
            const double k4q = p + h * k3p, k4p = force(q + h * k3q, k4q);
            q += h6 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            p += h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        a.q[i] = q;
        a.p[i] = p;
    }
}

void sin_batch(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(x[i]);
}

}  // namespace birkhoff::kernels::scalar
