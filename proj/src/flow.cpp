#include "birkhoff/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/kernels.hpp"
#include "birkhoff/parallel.hpp"

namespace birkhoff {

Trajectory::Trajectory(std::vector<TrajectorySample> samples, double dt) : samples_(std::move(samples)), dt_(dt) {}

void Trajectory::write_csv(const std::string& path) const {
    io::CsvWriter w(path, {"t", "q", "p", "E"});
    for (const auto& s : samples_) w.row({s.t, s.q, s.p, s.energy});
}

PhasePoint rk4_step(const HamiltonianModel& model, PhasePoint z, double h) {
    const PhasePoint k1 = model.field(z);
    const PhasePoint k2 = model.field({z.q + 0.5 * h * k1.q, z.p + 0.5 * h * k1.p});
    const PhasePoint k3 = model.field({z.q + 0.5 * h * k2.q, z.p + 0.5 * h * k2.p});
    const PhasePoint k4 = model.field({z.q + h * k3.q, z.p + h * k3.p});
    return {z.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            z.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
}

namespace {

// One Dormand-Prince 5(4) step; returns the fifth-order solution and an error norm.
PhasePoint dp45_step(const HamiltonianModel& m, PhasePoint z, double h, double rtol, double atol, double& err) {
    auto at = [&](std::initializer_list<std::pair<double, PhasePoint>> terms) {
        PhasePoint y = z;
        for (auto [c, k] : terms) y.q += h * c * k.q, y.p += h * c * k.p;
        return y;
    };
    const PhasePoint k1 = m.field(z);
    const PhasePoint k2 = m.field(at({{1.0 / 5, k1}}));
    const PhasePoint k3 = m.field(at({{3.0 / 40, k1}, {9.0 / 40, k2}}));
    const PhasePoint k4 = m.field(at({{44.0 / 45, k1}, {-56.0 / 15, k2}, {32.0 / 9, k3}}));
    const PhasePoint k5 =
        m.field(at({{19372.0 / 6561, k1}, {-25360.0 / 2187, k2}, {64448.0 / 6561, k3}, {-212.0 / 729, k4}}));
    const PhasePoint k6 = m.field(at(
        {{9017.0 / 3168, k1}, {-355.0 / 33, k2}, {46732.0 / 5247, k3}, {49.0 / 176, k4}, {-5103.0 / 18656, k5}}));
    const PhasePoint y5 = at(
        {{35.0 / 384, k1}, {500.0 / 1113, k3}, {125.0 / 192, k4}, {-2187.0 / 6784, k5}, {11.0 / 84, k6}});
    const PhasePoint k7 = m.field(y5);
    const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
    const double eq = h * (e1 * k1.q + e3 * k3.q + e4 * k4.q + e5 * k5.q + e6 * k6.q + e7 * k7.q);
    const double ep = h * (e1 * k1.p + e3 * k3.p + e4 * k4.p + e5 * k5.p + e6 * k6.p + e7 * k7.p);
    const double sq = atol + rtol * std::max(std::abs(z.q), std::abs(y5.q));
    const double sp = atol + rtol * std::max(std::abs(z.p), std::abs(y5.p));
    err = std::sqrt(0.5 * ((eq / sq) * (eq / sq) + (ep / sp) * (ep / sp)));
    return y5;
}

// Adaptive integration over signed time t; h is the running step guess.
PhasePoint dp45_advance(const HamiltonianModel& m, PhasePoint z, double t, double rtol, double atol, double& h) {
    const double dir = t >= 0.0 ? 1.0 : -1.0;
    double done = 0.0;
    const double total = std::abs(t);
    if (!(h > 0.0)) h = std::min(0.01, total);
    std::size_t guard = 0;
    while (done < total) {
        const double step = std::min(h, total - done);
        double err;
        const PhasePoint y = dp45_step(m, z, dir * step, rtol, atol, err);
        if (!std::isfinite(err) || !std::isfinite(y.q) || !std::isfinite(y.p)) {
            h = 0.25 * step;
            if (h < 1e-14) throw IntegrationError("adaptive step underflow", dir * done);
            continue;
        }
        if (err <= 1.0) {
            z = y;
            done += step;
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = step * std::clamp(factor, 0.2, 5.0);
        if (h < 1e-14) throw IntegrationError("adaptive step underflow", dir * done);
        if (++guard > 50'000'000) throw IntegrationError("adaptive step budget exhausted", dir * done);
    }
    return z;
}

double wrapped_distance(const HamiltonianModel& m, PhasePoint a, PhasePoint b) {
    double dq = a.q - b.q;
    dq -= m.period() * std::round(dq / m.period());
    return std::hypot(dq, a.p - b.p);
}

}  // namespace

PhasePoint flow_for(const HamiltonianModel& model, PhasePoint z, double t, double dt, Method method, double rtol,
                    double atol) {
    if (t == 0.0) return z;
    if (method == Method::rk45) {
        double h = dt;
        return dp45_advance(model, z, t, rtol, atol, h);
    }
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t) / dt - 1e-9));
    const double h = t / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) z = rk4_step(model, z, h);
    if (!std::isfinite(z.q) || !std::isfinite(z.p)) throw IntegrationError("non-finite state", t);
    return z;
}

Trajectory integrate(const HamiltonianModel& model, PhasePoint start, const FlowConfig& config, Direction direction) {
    if (!(config.dt > 0.0) || !(config.t_max >= 0.0) || !(config.rtol > 0.0) || !(config.atol > 0.0))
        throw ConfigError("flow config needs dt > 0, t_max >= 0 and positive tolerances");
    if (!std::isfinite(start.q) || !std::isfinite(start.p)) throw ConfigError("start point must be finite");
    const double sign = direction == Direction::forward ? 1.0 : -1.0;
    const auto steps = static_cast<std::size_t>(std::ceil(config.t_max / config.dt - 1e-9));
    const std::size_t every = std::max<std::size_t>(1, config.record_every);

    std::vector<TrajectorySample> samples;
    samples.reserve(std::min<std::size_t>(steps / every + 2, 1u << 24));
    auto record = [&](double t, PhasePoint z) { samples.push_back({t, z.q, z.p, model.H(z)}); };

    PhasePoint z = start;
    double t = 0.0;
    double h45 = config.dt;
    record(t, z);
    std::optional<double> stopped;
    for (std::size_t k = 0; k < steps; ++k) {
        const double h = std::min(config.dt, config.t_max - t);
        if (h <= 0.0) break;
        z = config.method == Method::rk4 ? rk4_step(model, z, sign * h)
                                          : dp45_advance(model, z, sign * h, config.rtol, config.atol, h45);
        t = (k + 1 == steps) ? config.t_max : static_cast<double>(k + 1) * config.dt;
        if (!std::isfinite(z.q) || !std::isfinite(z.p)) throw IntegrationError("non-finite state (blowup)", t);
        if (config.momentum_box && (z.p < config.momentum_box->first || z.p > config.momentum_box->second))
            throw PhaseBoxExit("trajectory left the phase box at t=" + io::format_double(t), t);
        bool stop = false;
        if (config.stop_ball && wrapped_distance(model, z, config.stop_ball->center) < config.stop_ball->radius)
            stop = true;
        if (config.energy_below && model.H(z) < *config.energy_below) stop = true;
        if (stop || (k + 1) % every == 0 || k + 1 == steps) record(t, z);
        if (stop) {
            stopped = t;
            break;
        }
    }
    Trajectory out(std::move(samples), config.dt * static_cast<double>(every));
    out.stopped_at = stopped;
    return out;
}

double energy_dissipation_audit(const Trajectory& trajectory, double alpha) {
    const auto& s = trajectory.samples();
    const std::size_t n = s.size();
    if (n < 2) return 0.0;
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = s[i].p * s[i].p;
    // Cumulative integral: Simpson on pairs, a three-point rule on odd prefixes.
    std::vector<double> integral(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double h = s[i].t - s[i - 1].t;
        const bool uniform = i >= 2 && std::abs((s[i - 1].t - s[i - 2].t) - h) <= 1e-9 * h;
        if (i % 2 == 0 && uniform) {
            integral[i] = integral[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (uniform) {
            integral[i] = integral[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        } else if (i + 1 < n && std::abs((s[i + 1].t - s[i].t) - h) <= 1e-9 * h) {
            integral[i] = integral[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        } else {
            integral[i] = integral[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(s[i].energy - s[0].energy + alpha * integral[i]));
    return worst;
}

double rotation_number(const Trajectory& trajectory) {
    const double T = trajectory.back().t - trajectory.front().t;
    if (!(T > 0.0)) throw ConfigError("rotation number needs a trajectory of positive length");
    return (trajectory.back().q - trajectory.front().q) / T;
}

TimeMap::TimeMap(HamiltonianModel model, double t, double dt, Method method, double rtol, double atol)
    : model_(std::move(model)), t_(t), dt_(dt), method_(method), rtol_(rtol), atol_(atol) {
    if (!(t > 0.0)) throw ConfigError("time map needs t > 0");
    if (!(dt > 0.0)) throw ConfigError("time map needs dt > 0");
}

PhasePoint TimeMap::flow(PhasePoint z, double signed_t) const {
    return flow_for(model_, z, signed_t, dt_, method_, rtol_, atol_);
}

PhasePoint TimeMap::forward(PhasePoint z) const { return flow(z, t_); }

PhasePoint TimeMap::backward(PhasePoint z) const { return flow(z, -t_); }

void TimeMap::apply(std::span<double> q, std::span<double> p, Direction direction, std::size_t workers) const {
    if (q.size() != p.size()) throw ConfigError("time map batch needs matching coordinate arrays");
    const double signed_t = direction == Direction::forward ? t_ : -t_;
    const auto& pot = model_.potential();
    if (model_.separable() && method_ == Method::rk4) {
        const auto steps = static_cast<std::size_t>(std::ceil(t_ / dt_ - 1e-9));
        const double h = signed_t / static_cast<double>(steps);
        parallel_for(q.size(), workers, [&](std::size_t b, std::size_t e) {
            kernels::sine_flow_rk4({q.data() + b, p.data() + b, e - b, model_.alpha(),
                                    -pot->amplitude * pot->frequency, pot->frequency, h, steps});
        });
        return;
    }
    parallel_for(q.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            try {
                const PhasePoint z = flow({q[i], p[i]}, signed_t);
                q[i] = z.q;
                p[i] = z.p;
            } catch (const Error&) {
                q[i] = p[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });
}

Branch shoot_heteroclinic(const HamiltonianModel& model, Side side, const ShootConfig& config) {
    if (!model.potential() || model.surface())
        throw UnsupportedOperation("heteroclinic shooting needs a pendulum-family model");
    if (!(config.delta_launch > 0.0) || !(config.stop_radius > 0.0) || !(config.dt > 0.0))
        throw ConfigError("shooting needs positive launch offset, stop radius and step");
    const double alpha = model.alpha(), period = model.period();
    const double qs = model.saddle_q();
    const double curvature = model.potential()->curvature(qs);  // negative at the saddle
    // Jacobian [[0, 1], [-V''(qs), -alpha]]: lambda^2 + alpha lambda + V'' = 0.
    const double lambda = 0.5 * (-alpha + std::sqrt(alpha * alpha - 4.0 * curvature));
    const double norm = std::hypot(1.0, lambda);
    const double s = side == Side::right ? 1.0 : -1.0;

    Branch branch;
    branch.unstable_eigenvalue = lambda;
    branch.saddle = {qs, 0.0};
    double target_q;
    if (alpha > 0.0) {
        const double qf = model.focus_q();
        if (side == Side::right) {
            target_q = qf + period * std::ceil((qs - qf) / period);
            if (target_q <= qs) target_q += period;
        } else {
            target_q = qf + period * std::floor((qs - qf) / period);
            if (target_q >= qs) target_q -= period;
        }
    } else {
        target_q = qs + s * period;
    }
    branch.target = {target_q, 0.0};

    PhasePoint z{qs + s * config.delta_launch / norm, s * config.delta_launch * lambda / norm};
    PolylineCurve raw;
    raw.points.push_back({qs, 0.0});
    raw.points.push_back({z.q, z.p});
    double t = 0.0, closest = INFINITY;
    const double limit = config.truncate_time ? std::min(*config.truncate_time, config.t_max) : config.t_max;
    while (true) {
        z = rk4_step(model, z, config.dt);
        t += config.dt;
        if (!std::isfinite(z.q) || !std::isfinite(z.p)) throw ShootingError("branch integration blew up");
        raw.points.push_back({z.q, z.p});
        const double dist = std::hypot(z.q - target_q, z.p);
        closest = std::min(closest, dist);
        if (dist < config.stop_radius) {
            branch.reached_target = true;
            break;
        }
        if (t >= limit) {
            if (config.truncate_time && *config.truncate_time <= config.t_max) break;
            throw ShootingError("branch did not enter the stop ball of radius " + io::format_double(config.stop_radius) +
                                " within t_max=" + io::format_double(config.t_max) +
                                "; closest approach " + io::format_double(closest) + ", final point (" +
                                io::format_double(z.q) + ", " + io::format_double(z.p) + ")");
        }
    }
    branch.duration = t;
    branch.curve = config.resample > 1 ? raw.resampled(config.resample) : std::move(raw);
    return branch;
}

}  // namespace birkhoff
