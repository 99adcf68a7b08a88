#pragma once

#include <cstddef>
#include <string>

// Hot loops with a scalar reference implementation and an AVX2 variant chosen
// at runtime. Setting BIRKHOFF_ISA=scalar in the environment forces the
// reference path.
namespace birkhoff::kernels {

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);
// Best instruction set supported by this build and CPU.
Isa detected_isa();
// Instruction set currently used by the dispatching entry points.
Isa active_isa();
void set_active_isa(Isa isa);

struct WindowMin {
    double value;
    // Minimizer position in window coordinates (node index plus sub-cell offset).
    double position;
};

// Node costs c[s] = scale*u[s] + g1[s] + g2[s] for s < count. Returns the
// minimum over nodes and over the segment parabolas
//   min_t (1-t) c[s] + t c[s+1] - kappa[s] t (1-t),  t in [0,1].
// Both families are independent of u, so the result is monotone in u.
struct WindowArgs {
    const double* u;
    const double* g1;
    const double* g2;
    const double* kappa;
    double scale;
    std::size_t count;
};

// Lax-Friedrichs update for H = p^2/2 + V on a periodic grid.
// u_ext has n+2 entries with u_ext[i+1] = u_i and periodic ghosts.
struct SweepArgs {
    const double* u_ext;
    const double* potential;
    const double* viscosity;  // sigma_i / (2h)
    const double* step;       // pseudo-time step per node
    double alpha;
    double inv_2h;
    double* out;
    std::size_t n;
};

// Fixed-step RK4 for q' = p, p' = -alpha p - amplitude*sin(frequency*q),
// applied in place to a batch of points. dt < 0 integrates backward.
struct SineFlowArgs {
    double* q;
    double* p;
    std::size_t n;
    double alpha;
    double amplitude;
    double frequency;
    double dt;
    std::size_t steps;
};

WindowMin window_min(const WindowArgs& args);
void lf_sweep(const SweepArgs& args);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void sine_flow_rk4(const SineFlowArgs& args);
void sin_batch(const double* x, double* y, std::size_t n);

namespace scalar {
WindowMin window_min(const WindowArgs& args);
void lf_sweep(const SweepArgs& args);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void sine_flow_rk4(const SineFlowArgs& args);
void sin_batch(const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool available();
WindowMin window_min(const WindowArgs& args);
void lf_sweep(const SweepArgs& args);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void sine_flow_rk4(const SineFlowArgs& args);
void sin_batch(const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace birkhoff::kernels
