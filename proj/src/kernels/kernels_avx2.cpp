// SPDX-License-Identifier: Apache-2.0
// AVX2+FMA variants of the dispatch kernels. Complex arrays are interleaved
// (std::complex layout), so one __m256d carries two complex values.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <complex>
#include <cstddef>

namespace layerspec::kernels::avx2_impl {

using cdouble = std::complex<double>;

namespace {

inline __m256d load(const cdouble* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(cdouble* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

// [a0*b0, a1*b1] as complex pairs
inline __m256d cmul2(__m256d a, __m256d b) {
    __m256d bre = _mm256_movedup_pd(b);
    __m256d bim = _mm256_permute_pd(b, 0xF);
    __m256d asw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, bre, _mm256_mul_pd(asw, bim));
}

// [w0, w0, w1, w1] from two packed reals
inline __m256d wpair(const double* w) {
    __m128d lo = _mm_loadu_pd(w);
    return _mm256_permute4x64_pd(_mm256_castpd128_pd256(lo), 0x50);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

} // namespace

void cmul(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store(out + i, cmul2(load(a + i), load(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void rmul(const double* w, const cdouble* x, cdouble* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store(out + i, _mm256_mul_pd(wpair(w + i), load(x + i)));
    for (; i < n; ++i) out[i] = w[i] * x[i];
}

void green_combine(const double* w, const cdouble* p, const cdouble* a, const cdouble* q,
                   const cdouble* b, cdouble alpha, cdouble* y, std::size_t n) {
    const __m256d are = _mm256_set1_pd(alpha.real());
    const __m256d aim = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d t = _mm256_add_pd(cmul2(load(p + i), load(a + i)), cmul2(load(q + i), load(b + i)));
        t = _mm256_mul_pd(wpair(w + i), t);
        __m256d tsw = _mm256_permute_pd(t, 0x5);
        store(y + i, _mm256_fmaddsub_pd(t, are, _mm256_mul_pd(tsw, aim)));
    }
    for (; i < n; ++i) y[i] = alpha * w[i] * (p[i] * a[i] + q[i] * b[i]);
}

double norm2sq(const cdouble* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = load(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::norm(x[i]);
    return s;
}

cdouble dotc(const cdouble* x, const cdouble* y, std::size_t n) {
    const __m256d sgn = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    __m256d racc = _mm256_setzero_pd();
    __m256d iacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = load(x + i);
        __m256d yv = load(y + i);
        racc = _mm256_fmadd_pd(xv, yv, racc);
        __m256d xsw = _mm256_mul_pd(_mm256_permute_pd(xv, 0x5), sgn);
        iacc = _mm256_fmadd_pd(xsw, yv, iacc);
    }
    double re = hsum(racc), im = hsum(iacc);
    for (; i < n; ++i) {
        const cdouble t = std::conj(x[i]) * y[i];
        re += t.real();
        im += t.imag();
    }
    return {re, im};
}

double wsum_abs2(const double* w, const cdouble* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = load(x + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), wpair(w + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * std::norm(x[i]);
    return s;
}

double wsum_sq(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(xv, xv), _mm256_loadu_pd(w + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * x[i] * x[i];
    return s;
}

void scale(double s, cdouble* x, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store(x + i, _mm256_mul_pd(sv, load(x + i)));
    for (; i < n; ++i) x[i] *= s;
}

void wave_step(double* vn, const double* v, const double* vo, const double* cl,
               const double* cp, std::size_t i0, std::size_t i1) {
    std::size_t i = i0;
    const __m256d two = _mm256_set1_pd(2.0);
    for (; i + 4 <= i1; i += 4) {
        __m256d vc = _mm256_loadu_pd(v + i);
        __m256d lap = _mm256_add_pd(_mm256_loadu_pd(v + i - 1), _mm256_loadu_pd(v + i + 1));
        lap = _mm256_fnmadd_pd(two, vc, lap);
        __m256d t = _mm256_fmsub_pd(two, vc, _mm256_loadu_pd(vo + i));
        t = _mm256_fmadd_pd(_mm256_loadu_pd(cl + i), lap, t);
        t = _mm256_fnmadd_pd(_mm256_loadu_pd(cp + i), vc, t);
        _mm256_storeu_pd(vn + i, t);
    }
    for (; i < i1; ++i)
        vn[i] = 2.0 * v[i] - vo[i] + cl[i] * (v[i - 1] - 2.0 * v[i] + v[i + 1]) - cp[i] * v[i];
}

} // namespace layerspec::kernels::avx2_impl

#endif // x86_64
