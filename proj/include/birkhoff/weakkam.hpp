#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "birkhoff/grid_function.hpp"
#include "birkhoff/models.hpp"

namespace birkhoff {

struct SolveReport {
    std::string method;
    std::size_t iterations = 0;
    double final_change = 0.0;
    // sup over non-kink nodes of |alpha u + H(x, D_c u)|, recomputed from the result.
    double residual = 0.0;
    std::vector<Kink> kinks;
};

// |alpha u + H(x, D_c u)| maximized over nodes outside the kink bands.
double hj_residual(const HamiltonianModel& model, double alpha, const GridFunction& u, const std::vector<Kink>& kinks);

struct LoOptions {
    double tau = 0.0125;
    double v_max = 6.0;
    double tol = 1e-9;
    std::size_t max_iterations = 100000;
    std::size_t workers = 1;
};

// One step of the discounted Lax-Oleinik operator on a fixed grid. The cost
// of reaching q_j from q' uses the midpoint Lagrangian with straight-line
// velocity; candidates are all grid nodes in the velocity window and the
// segments between them, so the operator is monotone and an exact
// exp(-alpha tau) contraction.
class LaxOleinikOperator {
public:
    LaxOleinikOperator(const HamiltonianModel& model, double alpha, std::size_t n, double tau, double v_max = 6.0);

    std::size_t size() const { return n_; }
    double contraction() const { return discount_; }
    std::size_t window() const { return half_window_; }

    void apply(std::span<const double> u, std::span<double> out, std::size_t workers = 1) const;
    GridFunction apply(const GridFunction& u, std::size_t workers = 1) const;

private:
    std::size_t n_;
    double period_;
    double discount_;
    std::size_t half_window_;
    bool separable_;
    std::vector<double> kinetic_;   // per window offset
    std::vector<double> potential_; // per half node, padded
    std::vector<double> kappa_;     // segment curvature (separable) or per row (dense)
    std::vector<double> dense_;     // n rows of window costs for general Lagrangians
    std::vector<double> zeros_;
};

GridFunction lax_oleinik_step(const HamiltonianModel& model, double alpha, const GridFunction& u, double tau,
                              double v_max = 6.0);

std::pair<GridFunction, SolveReport> solve_discounted_lo(const HamiltonianModel& model, double alpha, std::size_t n,
                                                         const LoOptions& options = {});

struct FdOptions {
    // Artificial viscosity; defaults to the Lipschitz bound of dH/dp on |p| <= momentum_bound.
    std::optional<double> sigma;
    // Use the per-node bound instead of one global sigma.
    bool local_viscosity = false;
    double momentum_bound = 3.0;
    double tol = 1e-8;
    std::size_t max_sweeps = 50'000'000;
    std::size_t workers = 1;
};

// Per-node bound max_{|p| <= P} |dH/dp(x_i, p)|.
std::vector<double> momentum_lipschitz(const HamiltonianModel& model, std::size_t n, double momentum_bound);

std::pair<GridFunction, SolveReport> solve_discounted_fd(const HamiltonianModel& model, double alpha, std::size_t n,
                                                         const FdOptions& options = {});

// One Lax-Friedrichs pseudo-time sweep with per-node viscosity sigma_i (for monotonicity tests).
std::vector<double> fd_sweep(const HamiltonianModel& model, double alpha, std::span<const double> u,
                             std::span<const double> sigma);

using ViscosityFunction = std::function<double(double x, double p, double u)>;

struct ViscosityViolation {
    enum class Kind { smooth, superdifferential, subdifferential };
    Kind kind = Kind::smooth;
    double x = 0.0;
    double p = 0.0;
    double value = 0.0;
};

struct ViscosityReport {
    bool pass = true;
    std::vector<Kink> kinks;
    double worst_smooth = 0.0;  // max |G| at smooth nodes
    double worst_kink = 0.0;    // largest sign violation at kinks (0 when none)
    std::vector<ViscosityViolation> violations;  // worst first, at most 16
};

ViscosityReport check_viscosity(const GridFunction& u, const ViscosityFunction& g, double tol,
                                std::size_t p_samples = 401, const KinkOptions& kink_options = {});

// G(x, p, u) = alpha u + H(x, p).
ViscosityFunction discounted_equation(const HamiltonianModel& model, double alpha);

// Estimate of max_x min_p H on a grid of n base points.
double estimate_critical_value(const HamiltonianModel& model, std::size_t n, double momentum_bound = 3.0);

struct VanishingDiscountEntry {
    double alpha;
    GridFunction u;
    SolveReport report;
};

struct VanishingDiscountResult {
    double critical_value = 0.0;
    std::vector<VanishingDiscountEntry> entries;
    std::vector<double> gaps;  // sup-norm distance between consecutive solutions
};

VanishingDiscountResult vanishing_discount_driver(const HamiltonianModel& model, const std::vector<double>& alphas,
                                                  std::size_t n, const LoOptions& options = {});

}  // namespace birkhoff
