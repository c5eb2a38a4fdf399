// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <string>

// Hot inner loops used by the norm sweeps and the time steppers. Every entry
// point dispatches at runtime between a scalar reference implementation and
// an AVX2+FMA variant (picked once via cpuid, override with
// LAYERSPEC_SIMD=scalar|avx2). The two implementations are equivalence-tested
// against each other; the scalar one is the semantic reference.
namespace layerspec::kernels {

using cdouble = std::complex<double>;

enum class isa { scalar, avx2 };

isa active_isa();
// Force an implementation (used by the equivalence tests). Throws if the
// requested ISA is unavailable on this CPU.
void force_isa(isa which);
std::string isa_name(isa which);

// out[i] = a[i]*b[i] (complex pointwise)
void cmul(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n);
// out[i] = w[i]*x[i] (real weight times complex)
void rmul(const double* w, const cdouble* x, cdouble* out, std::size_t n);
// y[i] = alpha * w[i] * (p[i]*a[i] + q[i]*b[i])  (Green-kernel assembly)
void green_combine(const double* w, const cdouble* p, const cdouble* a, const cdouble* q,
                   const cdouble* b, cdouble alpha, cdouble* y, std::size_t n);
// sum |x[i]|^2
double norm2sq(const cdouble* x, std::size_t n);
// sum conj(x[i]) * y[i]
cdouble dotc(const cdouble* x, const cdouble* y, std::size_t n);
// sum w[i] * |x[i]|^2
double wsum_abs2(const double* w, const cdouble* x, std::size_t n);
// sum w[i] * x[i]^2 (real)
double wsum_sq(const double* w, const double* x, std::size_t n);
// x[i] *= s (real scale of complex array)
void scale(double s, cdouble* x, std::size_t n);
// leapfrog interior update on [i0, i1):
// vn[i] = 2 v[i] - vo[i] + cl[i]*(v[i-1] - 2 v[i] + v[i+1]) - cp[i]*v[i]
void wave_step(double* vn, const double* v, const double* vo, const double* cl,
               const double* cp, std::size_t i0, std::size_t i1);

} // namespace layerspec::kernels
