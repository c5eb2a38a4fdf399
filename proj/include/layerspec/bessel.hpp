// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "layerspec/domain.hpp"

namespace layerspec::bessel {

// Value/derivative pair with an explicit scale: the represented numbers are
// f*exp(log_scale) and df*exp(log_scale). log_scale is 0 whenever the plain
// doubles can hold the value; deep-elliptic orders and large |Im z| keep a
// nonzero scale instead of over/underflowing.
struct sph_bessel_value {
    cdouble f{};
    cdouble df{};
    double log_scale = 0.0;
};

// Spherical Bessel of the first kind j_ell at complex argument.
// Strategy: ascending series for small |z| (the only well-conditioned route
// near the origin), upward recurrence from the closed forms while ell is
// safely below the turning point, downward Miller recurrence normalized by
// the closed-form j_0/j_1 otherwise. Relative accuracy 1e-10 on
// ell <= 60, |z| <= 500, |Im z| <= 20.
sph_bessel_value sph_j(int ell, cdouble z);

// Second kind y_ell: closed forms for ell = 0, 1 plus upward recurrence
// (y is the dominant solution, so upward is forward-stable).
sph_bessel_value sph_y(int ell, cdouble z);

// Radiating combination h_ell = j_ell - i*y_ell, the branch with
// h_0(z) = i e^{-iz}/z. It decays as Im z -> -infinity, which makes it the
// outgoing/resolvent branch on and below the real axis, and it has no zeros
// for real z != 0. Computed directly from scaled e^{-iz} closed forms plus
// upward recurrence; for Im z >> 0 it is the recessive combination and loses
// relative accuracy like e^{2 Im z}, so callers needing Im z > 0 should work
// with j and y separately.
sph_bessel_value sph_h_radiating(int ell, cdouble z);

// Cross-Wronskian defect |j h' - j' h + i/z^2| * |z|^2 of the (j, radiating)
// pair, the formulation whose terms stay the size of the answer at any
// |Im z| (the j/y pairing cancels like e^{-2|Im z|} off the real axis).
// Conjugation symmetry of the defect reduces Im z > 0 to the lower
// half-plane. Machine-small whenever the evaluations are consistent.
double wronskian_residual(int ell, cdouble z);

// Shared-pass tables: values for every order 0..ell_max at one argument.
// Equivalent to calling the pointwise functions per order, but the recurrence
// runs once, which is what the norm sweeps lean on.
void sph_j_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out);
void sph_y_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out);
void sph_h_radiating_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out);

} // namespace layerspec::bessel
