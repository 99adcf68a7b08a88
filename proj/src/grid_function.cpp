#include "birkhoff/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"

namespace birkhoff {

GridFunction::GridFunction(std::vector<double> values, double period) : values_(std::move(values)), period_(period) {
    if (values_.size() < 16) throw ConfigError("grid functions need at least 16 nodes");
    if (!(period_ > 0.0)) throw ConfigError("grid period must be positive");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("grid function has a non-finite value");
}

GridFunction GridFunction::sample(std::size_t n, double period, const std::function<double(double)>& f) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(period * static_cast<double>(i) / static_cast<double>(n));
    return GridFunction(std::move(v), period);
}

GridFunction GridFunction::constant(std::size_t n, double period, double value) {
    return GridFunction(std::vector<double>(n, value), period);
}

double GridFunction::at(long i) const {
    const long n = static_cast<long>(values_.size());
    i %= n;
    if (i < 0) i += n;
    return values_[static_cast<std::size_t>(i)];
}

double GridFunction::interpolate(double x) const {
    const double s = x / spacing();
    const double f = std::floor(s);
    const long i = static_cast<long>(f);
    const double t = s - f;
    return (1.0 - t) * at(i) + t * at(i + 1);
}

double GridFunction::central_difference(std::size_t i) const {
    const long k = static_cast<long>(i);
    return (at(k + 1) - at(k - 1)) / (2.0 * spacing());
}

double GridFunction::sup_distance(const GridFunction& other) const {
    if (other.size() != size()) throw ConfigError("grid functions on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, std::abs(values_[i] - other.values_[i]));
    return m;
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

OneSidedDerivatives one_sided_derivatives(const GridFunction& u, std::size_t i) {
    const long k = static_cast<long>(i);
    const double h = u.spacing();
    const double u0 = u.at(k);
    // Second-order one-sided stencils with spacing h and 2h.
    const double left_h = (3.0 * u0 - 4.0 * u.at(k - 1) + u.at(k - 2)) / (2.0 * h);
    const double left_2h = (3.0 * u0 - 4.0 * u.at(k - 2) + u.at(k - 4)) / (4.0 * h);
    const double right_h = (-3.0 * u0 + 4.0 * u.at(k + 1) - u.at(k + 2)) / (2.0 * h);
    const double right_2h = (-3.0 * u0 + 4.0 * u.at(k + 2) - u.at(k + 4)) / (4.0 * h);
    OneSidedDerivatives d;
    d.left = (4.0 * left_h - left_2h) / 3.0;
    d.right = (4.0 * right_h - right_2h) / 3.0;
    const double scale = 0.1 * (1.0 + std::abs(left_h) + std::abs(right_h));
    d.reliable = std::abs(left_h - left_2h) <= scale && std::abs(right_h - right_2h) <= scale;
    return d;
}

namespace {

double threshold_for(std::vector<double> jumps, double floor, double factor) {
    const std::size_t mid = jumps.size() / 2;
    std::nth_element(jumps.begin(), jumps.begin() + static_cast<long>(mid), jumps.end());
    return std::max(floor, factor * jumps[mid]);
}

}  // namespace

std::vector<Kink> detect_kinks(const GridFunction& u, const KinkOptions& options) {
    const std::size_t n = u.size();
    const long w = static_cast<long>(options.width);
    std::vector<OneSidedDerivatives> d(n);
    std::vector<double> jump(n), wide(n), curvature(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = one_sided_derivatives(u, i);
        jump[i] = std::abs(d[i].right - d[i].left);
        const long k = static_cast<long>(i);
        curvature[i] = std::abs(u.at(k + 1) - 2.0 * u[i] + u.at(k - 1));
    }
    auto wrap = [n](long j) { return static_cast<std::size_t>(((j % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n)); };
    for (std::size_t i = 0; i < n; ++i) {
        const long k = static_cast<long>(i);
        wide[i] = w > 0 ? std::abs(d[wrap(k + w)].right - d[wrap(k - w)].left) : 0.0;
    }
    const double floor = options.scale * std::sqrt(u.spacing());
    const double narrow_cut = threshold_for(jump, floor, options.median_factor);
    const double wide_cut = threshold_for(wide, floor, options.median_factor);

    std::vector<bool> above(n);
    for (std::size_t i = 0; i < n; ++i) above[i] = jump[i] > narrow_cut || wide[i] > wide_cut;
    std::vector<Kink> kinks;
    if (std::all_of(above.begin(), above.end(), [](bool b) { return b; })) {
        // Everything is rough: report a single kink at the largest jump.
        const auto i = static_cast<std::size_t>(std::max_element(jump.begin(), jump.end()) - jump.begin());
        kinks.push_back({i, u.node(i), d[i].left, d[i].right, 0, static_cast<long>(n) - 1});
        return kinks;
    }
    // Walk clusters of consecutive flagged nodes, starting after an unflagged node.
    std::size_t start = 0;
    while (above[start]) ++start;
    for (std::size_t off = 0; off < n; ++off) {
        const std::size_t i = (start + off) % n;
        if (!above[i]) continue;
        std::size_t len = 0, best = i;
        while (above[(i + len) % n]) {
            const std::size_t j = (i + len) % n;
            if (curvature[j] > curvature[best]) best = j;
            ++len;
        }
        const std::size_t last = (i + len - 1) % n;
        Kink k;
        k.node = best;
        k.x = u.node(best);
        if (jump[best] > narrow_cut) {
            k.left = d[best].left;
            k.right = d[best].right;
        } else {
            // smeared corner: read the slopes just outside the cluster
            k.left = d[i].left;
            k.right = d[last].right;
        }
        k.band_lo = static_cast<long>(i) - static_cast<long>(options.margin);
        k.band_hi = static_cast<long>(i + len - 1 + options.margin);
        kinks.push_back(k);
        off += len - 1;
    }
    return kinks;
}

std::vector<bool> kink_mask(const GridFunction& u, const std::vector<Kink>& kinks) {
    const long n = static_cast<long>(u.size());
    std::vector<bool> mask(u.size(), false);
    for (const auto& k : kinks)
        for (long j = k.band_lo; j <= k.band_hi; ++j) mask[static_cast<std::size_t>(((j % n) + n) % n)] = true;
    return mask;
}

void write_grid_function_csv(const std::string& path, const GridFunction& u) {
    io::CsvWriter w(path, {"x", "u", "du_minus", "du_plus"});
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto d = one_sided_derivatives(u, i);
        w.row({u.node(i), u[i], d.left, d.right});
    }
}

}  // namespace birkhoff
