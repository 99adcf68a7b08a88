#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace birkhoff {

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

// H together with its first partials at one point.
struct Jet {
    double value = 0.0;
    double dq = 0.0;
    double dp = 0.0;
};

enum class ModelKind { pendulum, appendix_pendulum, constant_potential, perturbed, tabulated, constructed };

std::string to_string(ModelKind kind);

// Compactly supported bump height*(1-r^2)^3 with r the elliptic radius.
struct BumpSpec {
    double x0 = 0.5;
    double p0 = 0.0;
    double radius_x = 0.05;
    double radius_p = 0.1;
    double height = 0.0;
};

struct Box {
    double q_lo = 0.0;
    double q_hi = 0.0;
    double p_lo = 0.0;
    double p_hi = 0.0;
};

// V(q) = amplitude*cos(frequency*q) + offset, so that H = p^2/2 + V(q).
struct CosinePotential {
    double amplitude = 0.0;
    double frequency = 1.0;
    double offset = 0.0;

    double value(double q) const;
    double slope(double q) const;
    double curvature(double q) const;
};

// Arbitrary Hamiltonian surface on T^1 x [p_lo, p_hi]. Used by the tabulated
// and constructed kinds.
class Surface {
public:
    virtual ~Surface() = default;
    virtual Jet jet(double q, double p) const = 0;
    virtual double period() const = 0;
    virtual bool fiber_convex() const = 0;
    virtual std::pair<double, double> momentum_range() const = 0;
};

class HamiltonianModel {
public:
    static HamiltonianModel pendulum(double alpha);
    // Pendulum on the unit circle normalized so that max_x min_p H = 0.
    static HamiltonianModel appendix_pendulum(double alpha);
    // H = p^2/2 - c on a circle of the given period.
    static HamiltonianModel constant_potential(double c, double alpha, double period = 1.0);
    static HamiltonianModel from_surface(ModelKind kind, std::shared_ptr<const Surface> surface, double alpha);

    HamiltonianModel with_alpha(double alpha) const;

    ModelKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double period() const { return period_; }

    double H(PhasePoint z) const;
    Jet jet(PhasePoint z) const;
    // The damped field (dH/dp, -dH/dq - alpha*p).
    PhasePoint field(PhasePoint z) const;

    bool fiber_convex() const;
    // sup_p (p v - H(q,p)); throws UnsupportedOperation for non-convex kinds.
    double lagrangian(double q, double v) const;

    // True when H = p^2/2 + V(q) exactly.
    bool separable() const { return potential_.has_value() && !bump_.has_value() && !surface_; }
    // The cosine potential of pendulum-family models, including the base of a perturbed model.
    const std::optional<CosinePotential>& potential() const { return potential_; }
    const std::optional<BumpSpec>& bump() const { return bump_; }
    std::optional<Box> bump_support() const;
    double bump_value(double q, double p) const;
    const std::shared_ptr<const Surface>& surface() const { return surface_; }

    // Momentum interval on which H is defined (infinite for analytic kinds).
    std::pair<double, double> momentum_range() const;

    // Saddle and focus base points of pendulum-family models.
    double saddle_q() const;
    double focus_q() const;

    // Wrap q into [0, period).
    double wrap(double q) const;

private:
    HamiltonianModel() = default;

    ModelKind kind_ = ModelKind::pendulum;
    double alpha_ = 0.0;
    double period_ = 1.0;
    std::optional<CosinePotential> potential_;
    std::optional<BumpSpec> bump_;
    std::shared_ptr<const Surface> surface_;

    friend HamiltonianModel build_perturbed(const HamiltonianModel& base, const BumpSpec& bump);
};

HamiltonianModel build_perturbed(const HamiltonianModel& base, const BumpSpec& bump);

// Bicubic (Catmull-Rom) interpolant of H on a grid periodic in x.
class TabulatedSurface : public Surface {
public:
    // values[i*np + j] = H(x0 + i*dx, p0 + j*dp); the x-period is nx*dx.
    TabulatedSurface(std::size_t nx, std::size_t np, double x0, double p0, double dx, double dp,
                     std::vector<double> values);

    Jet jet(double q, double p) const override;
    double period() const override { return static_cast<double>(nx_) * dx_; }
    bool fiber_convex() const override { return convex_; }
    std::pair<double, double> momentum_range() const override;

    std::size_t nx() const { return nx_; }
    std::size_t np() const { return np_; }
    double x0() const { return x0_; }
    double p0() const { return p0_; }
    double dx() const { return dx_; }
    double dp() const { return dp_; }
    const std::vector<double>& values() const { return values_; }
    double node(std::size_t i, std::size_t j) const { return values_[i * np_ + j]; }
    // Smallest second difference in p over the table.
    double min_second_difference() const { return min_second_difference_; }

    void write_csv(const std::string& path) const;
    static TabulatedSurface read_csv(const std::string& path);

private:
    double padded(long i, long j) const;

    std::size_t nx_, np_;
    double x0_, p0_, dx_, dp_;
    std::vector<double> values_;
    double min_second_difference_ = 0.0;
    bool convex_ = false;
};

}  // namespace birkhoff
