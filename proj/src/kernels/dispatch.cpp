#include <atomic>
#include <cstdlib>
#include <string_view>

#include "birkhoff/kernels.hpp"

namespace birkhoff::kernels {

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("BIRKHOFF_ISA"); env && std::string_view(env) == "scalar") return Isa::scalar;
    return detected_isa();
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
#if defined(BIRKHOFF_HAVE_AVX2)
    if (avx2::available()) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    current().store(isa, std::memory_order_relaxed);
}

#if defined(BIRKHOFF_HAVE_AVX2)
#define BIRKHOFF_DISPATCH(call) return active_isa() == Isa::avx2 ? avx2::call : scalar::call
#else
#define BIRKHOFF_DISPATCH(call) return scalar::call
#endif

WindowMin window_min(const WindowArgs& args) { BIRKHOFF_DISPATCH(window_min(args)); }
void lf_sweep(const SweepArgs& args) { BIRKHOFF_DISPATCH(lf_sweep(args)); }
double max_abs_diff(const double* a, const double* b, std::size_t n) { BIRKHOFF_DISPATCH(max_abs_diff(a, b, n)); }
void sine_flow_rk4(const SineFlowArgs& args) { BIRKHOFF_DISPATCH(sine_flow_rk4(args)); }
void sin_batch(const double* x, double* y, std::size_t n) { BIRKHOFF_DISPATCH(sin_batch(x, y, n)); }

#undef BIRKHOFF_DISPATCH

#if !defined(BIRKHOFF_HAVE_AVX2)
namespace avx2 {
bool available() { return false; }
WindowMin window_min(const WindowArgs& args) { return scalar::window_min(args); }
void lf_sweep(const SweepArgs& args) { scalar::lf_sweep(args); }
double max_abs_diff(const double* a, const double* b, std::size_t n) { return scalar::max_abs_diff(a, b, n); }
void sine_flow_rk4(const SineFlowArgs& args) { scalar::sine_flow_rk4(args); }
void sin_batch(const double* x, double* y, std::size_t n) { scalar::sin_batch(x, y, n); }
}  // namespace avx2
#endif

}  // namespace birkhoff::kernels
