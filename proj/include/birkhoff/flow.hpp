#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/geometry.hpp"
#include "birkhoff/models.hpp"

namespace birkhoff {

struct TrajectorySample {
    double t = 0.0;
    double q = 0.0;  // unwrapped angle
    double p = 0.0;
    double energy = 0.0;
};

class Trajectory {
public:
    Trajectory(std::vector<TrajectorySample> samples, double dt);

    const std::vector<TrajectorySample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const TrajectorySample& front() const { return samples_.front(); }
    const TrajectorySample& back() const { return samples_.back(); }
    double dt() const { return dt_; }
    // Time at which a stop predicate fired, if any.
    std::optional<double> stopped_at;

    void write_csv(const std::string& path) const;

private:
    std::vector<TrajectorySample> samples_;
    double dt_;
};

enum class Method { rk4, rk45 };
enum class Direction { forward, backward };

struct StopBall {
    PhasePoint center;
    double radius = 1e-3;
};

struct FlowConfig {
    double dt = 1e-3;  // step for rk4, output spacing for rk45
    Method method = Method::rk4;
    double rtol = 1e-10;
    double atol = 1e-12;
    double t_max = 10.0;
    std::optional<StopBall> stop_ball;
    std::optional<double> energy_below;
    // Integration aborts with PhaseBoxExit when p leaves [first, second].
    std::optional<std::pair<double, double>> momentum_box;
    std::size_t record_every = 1;
};

PhasePoint rk4_step(const HamiltonianModel& model, PhasePoint z, double h);

// Orbit of the damped field (or its reverse for backward direction).
Trajectory integrate(const HamiltonianModel& model, PhasePoint start, const FlowConfig& config,
                     Direction direction = Direction::forward);

// Flow for signed time t. rk4 uses ceil(|t|/dt) equal steps; rk45 controls
// the local error with the given tolerances.
PhasePoint flow_for(const HamiltonianModel& model, PhasePoint z, double t, double dt = 1e-3,
                    Method method = Method::rk4, double rtol = 1e-10, double atol = 1e-12);

// max over prefixes of |E(t) - E(0) + alpha * int_0^t p^2|.
double energy_dissipation_audit(const Trajectory& trajectory, double alpha);

double rotation_number(const Trajectory& trajectory);

// Average lift displacement per iterate of a map on lifted points.
template <class Map>
double rotation_number(const Map& map, PhasePoint start, std::size_t iterates) {
    PhasePoint z = start;
    for (std::size_t k = 0; k < iterates; ++k) z = map(z);
    return (z.q - start.q) / static_cast<double>(iterates);
}

// Time-t map of the damped flow and its inverse.
class TimeMap {
public:
    TimeMap(HamiltonianModel model, double t, double dt = 0.01, Method method = Method::rk4, double rtol = 1e-9,
            double atol = 1e-11);

    const HamiltonianModel& model() const { return model_; }
    double time() const { return t_; }

    PhasePoint forward(PhasePoint z) const;
    PhasePoint backward(PhasePoint z) const;
    // In-place images of many points; points whose integration fails become NaN.
    void apply(std::span<double> q, std::span<double> p, Direction direction, std::size_t workers = 1) const;

private:
    PhasePoint flow(PhasePoint z, double signed_t) const;

    HamiltonianModel model_;
    double t_;
    double dt_;
    Method method_;
    double rtol_, atol_;
};

enum class Side { left, right };

struct ShootConfig {
    double delta_launch = 1e-7;
    double stop_radius = 1e-3;
    double dt = 1e-3;
    double t_max = 5000.0;
    // Stop without error after this time (used when only the first swing matters).
    std::optional<double> truncate_time;
    // Points in the returned curve (0 keeps every integration step).
    std::size_t resample = 4096;
};

struct Branch {
    PolylineCurve curve;  // lift coordinates, starting at the saddle
    double unstable_eigenvalue = 0.0;
    PhasePoint saddle;
    PhasePoint target;  // focus (alpha > 0) or next saddle copy (alpha = 0)
    double duration = 0.0;
    bool reached_target = false;
};

// Unstable branch of the saddle of a pendulum-family model. The right branch
// starts with p > 0 and the left one with p < 0.
Branch shoot_heteroclinic(const HamiltonianModel& model, Side side, const ShootConfig& config = {});

}  // namespace birkhoff
