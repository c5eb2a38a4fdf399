// SPDX-License-Identifier: Apache-2.0
#include "layerspec/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace layerspec::kernels {

namespace scalar_impl {

void cmul(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void rmul(const double* w, const cdouble* x, cdouble* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * x[i];
}

void green_combine(const double* w, const cdouble* p, const cdouble* a, const cdouble* q,
                   const cdouble* b, cdouble alpha, cdouble* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * w[i] * (p[i] * a[i] + q[i] * b[i]);
}

double norm2sq(const cdouble* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(x[i]);
    return acc;
}

cdouble dotc(const cdouble* x, const cdouble* y, std::size_t n) {
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

double wsum_abs2(const double* w, const cdouble* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(x[i]);
    return acc;
}

double wsum_sq(const double* w, const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * x[i];
    return acc;
}

void scale(double s, cdouble* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void wave_step(double* vn, const double* v, const double* vo, const double* cl,
               const double* cp, std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i)
        vn[i] = 2.0 * v[i] - vo[i] + cl[i] * (v[i - 1] - 2.0 * v[i] + v[i + 1]) - cp[i] * v[i];
}

} // namespace scalar_impl

#if defined(__x86_64__) || defined(_M_X64)
#define LAYERSPEC_X86 1
namespace avx2_impl {
// defined in kernels_avx2.cpp, compiled with -mavx2 -mfma
void cmul(const cdouble*, const cdouble*, cdouble*, std::size_t);
void rmul(const double*, const cdouble*, cdouble*, std::size_t);
void green_combine(const double*, const cdouble*, const cdouble*, const cdouble*,
                   const cdouble*, cdouble, cdouble*, std::size_t);
double norm2sq(const cdouble*, std::size_t);
cdouble dotc(const cdouble*, const cdouble*, std::size_t);
double wsum_abs2(const double*, const cdouble*, std::size_t);
double wsum_sq(const double*, const double*, std::size_t);
void scale(double, cdouble*, std::size_t);
void wave_step(double*, const double*, const double*, const double*, const double*,
               std::size_t, std::size_t);
} // namespace avx2_impl
#endif

namespace {

bool avx2_available() {
#ifdef LAYERSPEC_X86
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

isa pick_default() {
    if (const char* env = std::getenv("LAYERSPEC_SIMD")) {
        const std::string s(env);
        if (s == "scalar") return isa::scalar;
        if (s == "avx2" && avx2_available()) return isa::avx2;
        if (s == "avx2") throw std::runtime_error("LAYERSPEC_SIMD=avx2 requested but CPU lacks AVX2+FMA");
        // unknown value: fall through to autodetect
    }
    return avx2_available() ? isa::avx2 : isa::scalar;
}

isa g_isa = pick_default();

} // namespace

isa active_isa() { return g_isa; }

void force_isa(isa which) {
    if (which == isa::avx2 && !avx2_available())
        throw std::runtime_error("AVX2+FMA not available on this CPU");
    g_isa = which;
}

std::string isa_name(isa which) { return which == isa::avx2 ? "avx2" : "scalar"; }

#ifdef LAYERSPEC_X86
#define LS_DISPATCH(fn, ...) \
    return g_isa == isa::avx2 ? avx2_impl::fn(__VA_ARGS__) : scalar_impl::fn(__VA_ARGS__)
#else
#define LS_DISPATCH(fn, ...) return scalar_impl::fn(__VA_ARGS__)
#endif

void cmul(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
    LS_DISPATCH(cmul, a, b, out, n);
}
void rmul(const double* w, const cdouble* x, cdouble* out, std::size_t n) {
    LS_DISPATCH(rmul, w, x, out, n);
}
void green_combine(const double* w, const cdouble* p, const cdouble* a, const cdouble* q,
                   const cdouble* b, cdouble alpha, cdouble* y, std::size_t n) {
    LS_DISPATCH(green_combine, w, p, a, q, b, alpha, y, n);
}
double norm2sq(const cdouble* x, std::size_t n) { LS_DISPATCH(norm2sq, x, n); }
cdouble dotc(const cdouble* x, const cdouble* y, std::size_t n) { LS_DISPATCH(dotc, x, y, n); }
double wsum_abs2(const double* w, const cdouble* x, std::size_t n) {
    LS_DISPATCH(wsum_abs2, w, x, n);
}
double wsum_sq(const double* w, const double* x, std::size_t n) { LS_DISPATCH(wsum_sq, w, x, n); }
void scale(double s, cdouble* x, std::size_t n) { LS_DISPATCH(scale, s, x, n); }
void wave_step(double* vn, const double* v, const double* vo, const double* cl,
               const double* cp, std::size_t i0, std::size_t i1) {
    LS_DISPATCH(wave_step, vn, v, vo, cl, cp, i0, i1);
}

} // namespace layerspec::kernels
