#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace birkhoff {

// Periodic function sampled at x_i = period * i / n.
class GridFunction {
public:
    GridFunction(std::vector<double> values, double period = 1.0);
    static GridFunction sample(std::size_t n, double period, const std::function<double(double)>& f);
    static GridFunction constant(std::size_t n, double period, double value);

    std::size_t size() const { return values_.size(); }
    double period() const { return period_; }
    double spacing() const { return period_ / static_cast<double>(values_.size()); }
    double node(std::size_t i) const { return period_ * static_cast<double>(i) / static_cast<double>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    // Value at any integer index, wrapped periodically.
    double at(long i) const;
    // Piecewise-linear periodic interpolation.
    double interpolate(double x) const;
    double central_difference(std::size_t i) const;
    double sup_distance(const GridFunction& other) const;
    double sup_norm() const;

private:
    std::vector<double> values_;
    double period_;
};

struct OneSidedDerivatives {
    double left = 0.0;
    double right = 0.0;
    // False when the two stencil windows on one side disagree (under-resolved).
    bool reliable = true;
};

// Richardson-extrapolated one-sided three-point stencils at node i.
OneSidedDerivatives one_sided_derivatives(const GridFunction& u, std::size_t i);

struct Kink {
    std::size_t node = 0;
    double x = 0.0;
    double left = 0.0;   // u'_-
    double right = 0.0;  // u'_+
    // Nodes [band_lo, band_hi] (periodic, may wrap) whose stencils see the kink.
    long band_lo = 0;
    long band_hi = 0;
    bool downward() const { return left > right; }
};

struct KinkOptions {
    double scale = 10.0;        // threshold scale * sqrt(h)
    double median_factor = 20.0;
    std::size_t margin = 2;     // extra nodes added to each side of a kink band
    // Half width of the wide stencil comparing u'_+(x+w) with u'_-(x-w); it
    // catches kinks that a viscous scheme has smeared over a few cells.
    std::size_t width = 4;
};

std::vector<Kink> detect_kinks(const GridFunction& u, const KinkOptions& options = {});
// Mask of nodes inside any kink band.
std::vector<bool> kink_mask(const GridFunction& u, const std::vector<Kink>& kinks);

// CSV with columns x,u,du_minus,du_plus.
void write_grid_function_csv(const std::string& path, const GridFunction& u);

}  // namespace birkhoff
