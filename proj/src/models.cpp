#include "birkhoff/models.hpp"

#include <cmath>
#include <numbers>

#include "birkhoff/error.hpp"

namespace birkhoff {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::pendulum: return "pendulum";
    case ModelKind::appendix_pendulum: return "appendix_pendulum";
    case ModelKind::constant_potential: return "constant_potential";
    case ModelKind::perturbed: return "perturbed";
    case ModelKind::tabulated: return "tabulated";
    case ModelKind::constructed: return "constructed";
    }
    return "unknown";
}

double CosinePotential::value(double q) const { return amplitude * std::cos(frequency * q) + offset; }

double CosinePotential::slope(double q) const { return -amplitude * frequency * std::sin(frequency * q); }

double CosinePotential::curvature(double q) const {
    return -amplitude * frequency * frequency * std::cos(frequency * q);
}

namespace {

void require_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("friction alpha must be finite and >= 0");
}

}  // namespace

HamiltonianModel HamiltonianModel::pendulum(double alpha) {
    require_alpha(alpha);
    HamiltonianModel m;
    m.kind_ = ModelKind::pendulum;
    m.alpha_ = alpha;
    m.period_ = 2.0 * std::numbers::pi;
    m.potential_ = CosinePotential{-1.0, 1.0, 0.0};
    return m;
}

HamiltonianModel HamiltonianModel::appendix_pendulum(double alpha) {
    require_alpha(alpha);
    HamiltonianModel m;
    m.kind_ = ModelKind::appendix_pendulum;
    m.alpha_ = alpha;
    m.period_ = 1.0;
    // Saddle at x = 0, focus at x = 1/2, critical value max_x min_p H = 0.
    m.potential_ = CosinePotential{1.0, 2.0 * std::numbers::pi, -1.0};
    return m;
}

HamiltonianModel HamiltonianModel::constant_potential(double c, double alpha, double period) {
    require_alpha(alpha);
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    HamiltonianModel m;
    m.kind_ = ModelKind::constant_potential;
    m.alpha_ = alpha;
    m.period_ = period;
    m.potential_ = CosinePotential{0.0, 1.0, -c};
    return m;
}

HamiltonianModel HamiltonianModel::from_surface(ModelKind kind, std::shared_ptr<const Surface> surface,
                                                double alpha) {
    require_alpha(alpha);
    if (!surface) throw ConfigError("null Hamiltonian surface");
    HamiltonianModel m;
    m.kind_ = kind;
    m.alpha_ = alpha;
    m.period_ = surface->period();
    m.surface_ = std::move(surface);
    return m;
}

HamiltonianModel HamiltonianModel::with_alpha(double alpha) const {
    require_alpha(alpha);
    HamiltonianModel m = *this;
    m.alpha_ = alpha;
    return m;
}

double HamiltonianModel::wrap(double q) const {
    double r = std::fmod(q, period_);
    if (r < 0.0) r += period_;
    if (r >= period_) r = 0.0;
    return r;
}

double HamiltonianModel::bump_value(double q, double p) const {
    if (!bump_) return 0.0;
    const BumpSpec& b = *bump_;
    double dx = q - b.x0;
    dx -= period_ * std::round(dx / period_);
    const double sx = dx / b.radius_x;
    const double sp = (p - b.p0) / b.radius_p;
    const double r2 = sx * sx + sp * sp;
    if (r2 >= 1.0) return 0.0;
    const double w = 1.0 - r2;
    return b.height * w * w * w;
}

Jet HamiltonianModel::jet(PhasePoint z) const {
    if (surface_) return surface_->jet(z.q, z.p);
    const CosinePotential& v = *potential_;
    Jet j{0.5 * z.p * z.p + v.value(z.q), v.slope(z.q), z.p};
    if (bump_) {
        const BumpSpec& b = *bump_;
        double dx = z.q - b.x0;
        dx -= period_ * std::round(dx / period_);
        const double sx = dx / b.radius_x;
        const double sp = (z.p - b.p0) / b.radius_p;
        const double r2 = sx * sx + sp * sp;
        if (r2 < 1.0) {
            const double w = 1.0 - r2;
            j.value += b.height * w * w * w;
            const double g = -6.0 * b.height * w * w;
            j.dq += g * sx / b.radius_x;
            j.dp += g * sp / b.radius_p;
        }
    }
    return j;
}

double HamiltonianModel::H(PhasePoint z) const {
    if (surface_) return surface_->jet(z.q, z.p).value;
    return 0.5 * z.p * z.p + potential_->value(z.q) + bump_value(z.q, z.p);
}

PhasePoint HamiltonianModel::field(PhasePoint z) const {
    if (!surface_ && !bump_) return {z.p, -potential_->slope(z.q) - alpha_ * z.p};
    const Jet j = jet(z);
    return {j.dp, -j.dq - alpha_ * z.p};
}

bool HamiltonianModel::fiber_convex() const {
    if (surface_) return surface_->fiber_convex();
    return !bump_ || bump_->height == 0.0;
}

std::pair<double, double> HamiltonianModel::momentum_range() const {
    if (surface_) return surface_->momentum_range();
    return {-INFINITY, INFINITY};
}

double HamiltonianModel::lagrangian(double q, double v) const {
    if (!fiber_convex()) {
        throw UnsupportedOperation("Legendre transform requires a fiberwise convex Hamiltonian (kind " +
                                   to_string(kind_) + ")");
    }
    if (!surface_) return 0.5 * v * v - potential_->value(q);

    // The maximizer of p v - H solves dH/dp = v; dH/dp is monotone in p.
    auto [lo, hi] = surface_->momentum_range();
    auto slope = [&](double p) { return surface_->jet(q, p).dp - v; };
    double a = std::isfinite(lo) ? lo : -1.0;
    double b = std::isfinite(hi) ? hi : 1.0;
    if (!std::isfinite(lo)) {
        while (slope(a) > 0.0) a *= 2.0;
    }
    if (!std::isfinite(hi)) {
        while (slope(b) < 0.0) b *= 2.0;
    }
    double p;
    if (slope(a) >= 0.0) {
        p = a;
    } else if (slope(b) <= 0.0) {
        p = b;
    } else {
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
            const double m = 0.5 * (a + b);
            (slope(m) < 0.0 ? a : b) = m;
        }
        p = 0.5 * (a + b);
    }
    return p * v - surface_->jet(q, p).value;
}

std::optional<Box> HamiltonianModel::bump_support() const {
    if (!bump_) return std::nullopt;
    return Box{bump_->x0 - bump_->radius_x, bump_->x0 + bump_->radius_x, bump_->p0 - bump_->radius_p,
               bump_->p0 + bump_->radius_p};
}

double HamiltonianModel::saddle_q() const {
    if (!potential_ || potential_->amplitude == 0.0)
        throw UnsupportedOperation("saddle is defined for pendulum-family models only");
    // The saddle sits at the maximum of V.
    const CosinePotential& v = *potential_;
    return v.amplitude > 0.0 ? 0.0 : std::numbers::pi / v.frequency;
}

double HamiltonianModel::focus_q() const {
    if (!potential_ || potential_->amplitude == 0.0)
        throw UnsupportedOperation("focus is defined for pendulum-family models only");
    const CosinePotential& v = *potential_;
    return v.amplitude > 0.0 ? std::numbers::pi / v.frequency : 0.0;
}

HamiltonianModel build_perturbed(const HamiltonianModel& base, const BumpSpec& bump) {
    if (!(bump.radius_x > 0.0) || !(bump.radius_p > 0.0)) throw ConfigError("bump radii must be positive");
    if (!std::isfinite(bump.height) || !std::isfinite(bump.x0) || !std::isfinite(bump.p0))
        throw ConfigError("bump parameters must be finite");
    if (!base.potential() || base.bump()) throw ConfigError("perturbation requires an unperturbed pendulum-family base");
    HamiltonianModel m = base;
    m.kind_ = ModelKind::perturbed;
    m.bump_ = bump;
    return m;
}

}  // namespace birkhoff
