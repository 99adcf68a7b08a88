#include <immintrin.h>

#include <cmath>

#include "birkhoff/kernels.hpp"

namespace birkhoff::kernels::avx2 {

bool available() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

namespace {

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline double hmin_pos(__m256d v, __m256d pos, double& best_pos) {
    alignas(32) double vals[4], poss[4];
    _mm256_store_pd(vals, v);
    _mm256_store_pd(poss, pos);
    double best = vals[0];
    best_pos = poss[0];
    for (int k = 1; k < 4; ++k) {
        if (vals[k] < best || (vals[k] == best && poss[k] < best_pos)) {
            best = vals[k];
            best_pos = poss[k];
        }
    }
    return best;
}

// Cody-Waite reduction by pi/2 followed by minimax polynomials on [-pi/4, pi/4].
inline __m256d sin_pd(__m256d x) {
    const __m256d two_over_pi = _mm256_set1_pd(0.63661977236758134308);
    const __m256d p1 = _mm256_set1_pd(1.57079632673412561417e+00);
    const __m256d p2 = _mm256_set1_pd(6.07710050630396597660e-11);
    const __m256d p3 = _mm256_set1_pd(2.02226624879595063154e-21);
    const __m256d j = _mm256_round_pd(_mm256_mul_pd(x, two_over_pi), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(j, p1, x);
    r = _mm256_fnmadd_pd(j, p2, r);
    r = _mm256_fnmadd_pd(j, p3, r);
    const __m256d z = _mm256_mul_pd(r, r);

    __m256d ps = _mm256_set1_pd(1.58962301576546568060e-10);
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-2.50507477628578072866e-8));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(2.75573136213857245213e-6));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.98412698295895385996e-4));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(8.33333333332211858878e-3));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.66666666666666307295e-1));
    const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(r, z), ps, r);

    __m256d pc = _mm256_set1_pd(-1.13585365213876817300e-11);
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.08757008419747316778e-9));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-2.75573141792967388112e-7));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.48015872888517045348e-5));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-1.38888888888730564116e-3));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(4.16666666666665929218e-2));
    const __m256d c =
        _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc, _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

    const __m128i quadrant = _mm256_cvtpd_epi32(j);
    const __m256i q64 = _mm256_cvtepi32_epi64(quadrant);
    const __m256i one = _mm256_set1_epi64x(1), two = _mm256_set1_epi64x(2);
    const __m256d use_cos = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q64, one), one));
    const __m256d negate = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q64, two), two));
    const __m256d v = _mm256_blendv_pd(s, c, use_cos);
    return _mm256_xor_pd(v, _mm256_and_pd(negate, _mm256_set1_pd(-0.0)));
}

inline __m256d force_pd(__m256d q, __m256d p, __m256d alpha, __m256d amp, __m256d freq) {
    const __m256d s = sin_pd(_mm256_mul_pd(freq, q));
    return _mm256_sub_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), alpha), p), _mm256_mul_pd(amp, s));
}

void rk4_block(double* qv, double* pv, const SineFlowArgs& a) {
    const __m256d alpha = _mm256_set1_pd(a.alpha), amp = _mm256_set1_pd(a.amplitude),
                  freq = _mm256_set1_pd(a.frequency);
    const __m256d h = _mm256_set1_pd(a.dt), h2 = _mm256_set1_pd(0.5 * a.dt), h6 = _mm256_set1_pd(a.dt / 6.0);
    const __m256d two = _mm256_set1_pd(2.0);
    __m256d q = _mm256_loadu_pd(qv), p = _mm256_loadu_pd(pv);
    for (std::size_t k = 0; k < a.steps; ++k) {
        const __m256d k1q = p, k1p = force_pd(q, p, alpha, amp, freq);
        const __m256d k2q = _mm256_add_pd(p, _mm256_mul_pd(h2, k1p));
        const __m256d k2p = force_pd(_mm256_add_pd(q, _mm256_mul_pd(h2, k1q)), k2q, alpha, amp, freq);
        const __m256d k3q = _mm256_add_pd(p, _mm256_mul_pd(h2, k2p));
        const __m256d k3p = force_pd(_mm256_add_pd(q, _mm256_mul_pd(h2, k2q)), k3q, alpha, amp, freq);
        const __m256d k4q = _mm256_add_pd(p, _mm256_mul_pd(h, k3p));
        const __m256d k4p = force_pd(_mm256_add_pd(q, _mm256_mul_pd(h, k3q)), k4q, alpha, amp, freq);
        const __m256d sq = _mm256_add_pd(_mm256_add_pd(k1q, _mm256_mul_pd(two, k2q)),
                                         _mm256_add_pd(_mm256_mul_pd(two, k3q), k4q));
        const __m256d sp = _mm256_add_pd(_mm256_add_pd(k1p, _mm256_mul_pd(two, k2p)),
                                         _mm256_add_pd(_mm256_mul_pd(two, k3p), k4p));
        q = _mm256_add_pd(q, _mm256_mul_pd(h6, sq));
        p = _mm256_add_pd(p, _mm256_mul_pd(h6, sp));
    }
    _mm256_storeu_pd(qv, q);
    _mm256_storeu_pd(pv, p);
}

}  // namespace

WindowMin window_min(const WindowArgs& a) {
    const __m256d scale = _mm256_set1_pd(a.scale);
    const __m256d half = _mm256_set1_pd(0.5), quarter = _mm256_set1_pd(0.25), four = _mm256_set1_pd(4.0),
                  two = _mm256_set1_pd(2.0), zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
    __m256d best = _mm256_set1_pd(INFINITY);
    __m256d best_pos = zero;
    __m256d pos = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d step = _mm256_set1_pd(4.0);
    std::size_t s = 0;
    // Block covers nodes s..s+3 and segments s..s+3, needing node s+4.
    for (; s + 5 <= a.count; s += 4) {
        const __m256d c0 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(scale, _mm256_loadu_pd(a.u + s)), _mm256_loadu_pd(a.g1 + s)),
            _mm256_loadu_pd(a.g2 + s));
        const __m256d c1 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(scale, _mm256_loadu_pd(a.u + s + 1)), _mm256_loadu_pd(a.g1 + s + 1)),
            _mm256_loadu_pd(a.g2 + s + 1));
        __m256d lt = _mm256_cmp_pd(c0, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, c0, lt);
        best_pos = _mm256_blendv_pd(best_pos, pos, lt);

        const __m256d kappa = _mm256_loadu_pd(a.kappa + s);
        const __m256d diff = _mm256_sub_pd(c0, c1);
        const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(kappa, zero, _CMP_GT_OQ),
                                             _mm256_cmp_pd(abs_pd(diff), kappa, _CMP_LT_OQ));
        const __m256d parab = _mm256_sub_pd(
            _mm256_sub_pd(_mm256_mul_pd(half, _mm256_add_pd(c0, c1)), _mm256_mul_pd(quarter, kappa)),
            _mm256_div_pd(_mm256_mul_pd(diff, diff), _mm256_mul_pd(four, kappa)));
        const __m256d t_in = _mm256_add_pd(half, _mm256_div_pd(diff, _mm256_mul_pd(two, kappa)));
        const __m256d right = _mm256_cmp_pd(diff, zero, _CMP_GT_OQ);
        const __m256d edge = _mm256_blendv_pd(c0, c1, right);
        const __m256d t_edge = _mm256_and_pd(right, one);
        const __m256d seg = _mm256_blendv_pd(edge, parab, inside);
        const __m256d seg_pos = _mm256_add_pd(pos, _mm256_blendv_pd(t_edge, t_in, inside));
        lt = _mm256_cmp_pd(seg, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, seg, lt);
        best_pos = _mm256_blendv_pd(best_pos, seg_pos, lt);
        pos = _mm256_add_pd(pos, step);
    }
    WindowMin out;
    out.value = hmin_pos(best, best_pos, out.position);
    if (s < a.count) {
        // Remaining nodes s.. and segments s.. go through the reference path.
        const std::size_t start = s;
        WindowArgs tail = a;
        tail.u += start;
        tail.g1 += start;
        tail.g2 += start;
        tail.kappa += start;
        tail.count = a.count - start;
        const WindowMin t = scalar::window_min(tail);
        if (t.value < out.value) out = {t.value, t.position + static_cast<double>(start)};
    }
    return out;
}

void lf_sweep(const SweepArgs& a) {
    const __m256d alpha = _mm256_set1_pd(a.alpha), inv_2h = _mm256_set1_pd(a.inv_2h), half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= a.n; i += 4) {
        const __m256d um = _mm256_loadu_pd(a.u_ext + i), u0 = _mm256_loadu_pd(a.u_ext + i + 1),
                      up = _mm256_loadu_pd(a.u_ext + i + 2);
        const __m256d d = _mm256_mul_pd(_mm256_sub_pd(up, um), inv_2h);
        const __m256d lap = _mm256_sub_pd(_mm256_sub_pd(up, u0), _mm256_sub_pd(u0, um));
        __m256d f = _mm256_add_pd(_mm256_mul_pd(alpha, u0), _mm256_mul_pd(_mm256_mul_pd(half, d), d));
        f = _mm256_add_pd(f, _mm256_loadu_pd(a.potential + i));
        f = _mm256_sub_pd(f, _mm256_mul_pd(_mm256_loadu_pd(a.viscosity + i), lap));
        _mm256_storeu_pd(a.out + i, _mm256_sub_pd(u0, _mm256_mul_pd(_mm256_loadu_pd(a.step + i), f)));
    }
    if (i < a.n) {
        SweepArgs tail = a;
        tail.u_ext += i;
        tail.potential += i;
        tail.viscosity += i;
        tail.step += i;
        tail.out += i;
        tail.n = a.n - i;
        scalar::lf_sweep(tail);
    }
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        m = _mm256_max_pd(m, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i))));
    alignas(32) double v[4];
    _mm256_store_pd(v, m);
    double r = std::fmax(std::fmax(v[0], v[1]), std::fmax(v[2], v[3]));
    for (; i < n; ++i) r = std::fmax(r, std::abs(x[i] - y[i]));
    return r;
}

void sine_flow_rk4(const SineFlowArgs& a) {
    std::size_t i = 0;
    for (; i + 4 <= a.n; i += 4) rk4_block(a.q + i, a.p + i, a);
    if (i < a.n) {
        // Pad the tail so every point goes through the same vector arithmetic.
        double q[4] = {0, 0, 0, 0}, p[4] = {0, 0, 0, 0};
        for (std::size_t k = i; k < a.n; ++k) q[k - i] = a.q[k], p[k - i] = a.p[k];
        rk4_block(q, p, a);
        for (std::size_t k = i; k < a.n; ++k) a.q[k] = q[k - i], a.p[k] = p[k - i];
    }
}

void sin_batch(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, sin_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        double t[4] = {0, 0, 0, 0};
        for (std::size_t k = i; k < n; ++k) t[k - i] = x[k];
        _mm256_storeu_pd(t, sin_pd(_mm256_loadu_pd(t)));
        for (std::size_t k = i; k < n; ++k) y[k] = t[k - i];
    }
}

}  // namespace birkhoff::kernels::avx2
