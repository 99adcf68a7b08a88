#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/models.hpp"

namespace birkhoff {

namespace {

// Catmull-Rom weights for nodes -1..2 at fractional offset t, and their derivatives.
std::array<double, 4> cr_weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {0.5 * (-t + 2.0 * t2 - t3), 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3), 0.5 * (t + 4.0 * t2 - 3.0 * t3),
            0.5 * (t3 - t2)};
}

std::array<double, 4> cr_slopes(double t) {
    const double t2 = t * t;
    return {0.5 * (-1.0 + 4.0 * t - 3.0 * t2), 0.5 * (-10.0 * t + 9.0 * t2), 0.5 * (1.0 + 8.0 * t - 9.0 * t2),
            0.5 * (3.0 * t2 - 2.0 * t)};
}

}  // namespace

TabulatedSurface::TabulatedSurface(std::size_t nx, std::size_t np, double x0, double p0, double dx, double dp,
                                   std::vector<double> values)
    : nx_(nx), np_(np), x0_(x0), p0_(p0), dx_(dx), dp_(dp), values_(std::move(values)) {
    if (nx_ < 4 || np_ < 4) throw ConfigError("tabulated model needs at least 4x4 nodes");
    if (!(dx_ > 0.0) || !(dp_ > 0.0)) throw ConfigError("tabulated spacings must be positive");
    if (values_.size() != nx_ * np_) throw ConfigError("tabulated value count does not match nx*np");
    for (double v : values_)
        if (!std::isfinite(v)) throw ConfigError("tabulated values must be finite");
    min_second_difference_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nx_; ++i)
        for (std::size_t j = 1; j + 1 < np_; ++j)
            min_second_difference_ =
                std::min(min_second_difference_, node(i, j + 1) - 2.0 * node(i, j) + node(i, j - 1));
    convex_ = min_second_difference_ >= -1e-9;
}

std::pair<double, double> TabulatedSurface::momentum_range() const {
    return {p0_, p0_ + static_cast<double>(np_ - 1) * dp_};
}

double TabulatedSurface::padded(long i, long j) const {
    const long nx = static_cast<long>(nx_), np = static_cast<long>(np_);
    i %= nx;
    if (i < 0) i += nx;
    const std::size_t row = static_cast<std::size_t>(i) * np_;
    // Quadratic extrapolation keeps the interpolant exact for quadratics in p.
    if (j < 0) return 3.0 * values_[row] - 3.0 * values_[row + 1] + values_[row + 2];
    if (j >= np) {
        const std::size_t e = row + np_ - 1;
        return 3.0 * values_[e] - 3.0 * values_[e - 1] + values_[e - 2];
    }
    return values_[row + static_cast<std::size_t>(j)];
}

Jet TabulatedSurface::jet(double q, double p) const {
    const auto [p_lo, p_hi] = momentum_range();
    const double slack = 1e-12 * (p_hi - p_lo);
    if (!std::isfinite(q) || !(p >= p_lo - slack && p <= p_hi + slack))
        throw DomainError("tabulated model queried outside its momentum range at p=" + io::format_double(p));
    const double u = (q - x0_) / dx_;
    const double v = std::clamp((p - p0_) / dp_, 0.0, static_cast<double>(np_ - 1));
    const double fi = std::floor(u);
    const long i = static_cast<long>(fi);
    const long j = std::min(static_cast<long>(v), static_cast<long>(np_) - 2);
    const double tx = u - fi, tp = v - static_cast<double>(j);
    const auto wx = cr_weights(tx), gx = cr_slopes(tx), wp = cr_weights(tp), gp = cr_slopes(tp);
    Jet out;
    for (int a = 0; a < 4; ++a) {
        double row_v = 0.0, row_d = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double f = padded(i + a - 1, j + b - 1);
            row_v += wp[b] * f;
            row_d += gp[b] * f;
        }
        out.value += wx[a] * row_v;
        out.dq += gx[a] * row_v;
        out.dp += wx[a] * row_d;
    }
    out.dq /= dx_;
    out.dp /= dp_;
    return out;
}

void TabulatedSurface::write_csv(const std::string& path) const {
    io::CsvWriter w(path, {"nx", "np", "x0", "p0", "dx", "dp"});
    w.row({static_cast<double>(nx_), static_cast<double>(np_), x0_, p0_, dx_, dp_});
    for (std::size_t i = 0; i < nx_; ++i) w.row(std::span<const double>(values_.data() + i * np_, np_));
}

TabulatedSurface TabulatedSurface::read_csv(const std::string& path) {
    auto rows = io::read_numeric_csv(path);
    if (rows.empty() || rows[0].size() != 6) throw ConfigError("tabulated csv needs a geometry row after the header");
    const auto& g = rows[0];
    const auto nx = static_cast<std::size_t>(g[0]), np = static_cast<std::size_t>(g[1]);
    if (rows.size() != nx + 1) throw ConfigError("tabulated csv row count does not match nx");
    std::vector<double> values;
    values.reserve(nx * np);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != np) throw ConfigError("tabulated csv row length does not match np");
        values.insert(values.end(), rows[i].begin(), rows[i].end());
    }
    return TabulatedSurface(nx, np, g[2], g[3], g[4], g[5], std::move(values));
}

}  // namespace birkhoff
