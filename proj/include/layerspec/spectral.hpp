// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "layerspec/domain.hpp"

namespace layerspec::spectral {

// Cauchy data (R, dR/dr) of the radial factor at one radius, with the usual
// explicit scale: true values are (value, deriv) * exp(log_scale).
struct boundary_state {
    cdouble value{};
    cdouble deriv{};
    double log_scale = 0.0;
};

// Scaled complex scalar, e.g. the characteristic function value.
struct scaled_value {
    cdouble f{};
    double log_scale = 0.0;
};

// Seed at the inner sphere: Dirichlet -> (0, 1), Neumann -> (1, 0).
boundary_state inner_seed(const layered_domain& d);

// Seed at the outer sphere encoding the dissipative row
// dR/dr + i lambda^j a0 R = 0: (1, -i lambda^j a0).
boundary_state outer_seed(const layered_domain& d, int j, cdouble lambda);

// Transport Cauchy data between two radii inside [r0, r_out], through any
// interfaces in between (R and dR/dr are continuous across them). Within a
// shell the map is the exact (j_ell, y_ell) basis solve, so accuracy does not
// depend on the distance covered. Works in both directions. lambda != 0.
boundary_state propagate(const layered_domain& d, int ell, cdouble lambda,
                         boundary_state s, double r_from, double r_to);

// D(lambda) = dR/dr(r_out) + i lambda^j a0 R(r_out) for the solution seeded
// by the inner condition. Entire in lambda on the cut-free plane minus 0;
// its zeros are the mode eigenvalues of the (j, ell) problem. For j = 0 it is
// even in lambda, which is why j = 0 searches stick to Re lambda > 0.
scaled_value characteristic(const layered_domain& d, const mode_problem& mp, cdouble lambda);

// Axis-aligned search rectangle in the lambda plane. Must exclude lambda = 0.
struct search_box {
    double re_min, re_max, im_min, im_max;
};

struct search_options {
    int grid_re = 0;  // phase-sampling resolution; 0 = auto from box and domain
    int grid_im = 0;
    int newton_max_iter = 40;
    double newton_tol = 1e-12; // step tolerance relative to max(1, |lambda|)
    double dedup_tol = 1e-7;   // merge radius, same relative convention
    int max_refine = 3;        // grid doublings when certification disagrees
};

struct root_record {
    cdouble value;          // what the problem calls the eigenvalue:
                            // lambda for j = 1, z = lambda^2 for j = 0
    cdouble lambda;         // the located zero of D
    int ell = 0;
    double newton_residual; // size of the final Newton step
};

struct spectrum_result {
    std::vector<root_record> roots; // distinct zeros inside the box
    int winding_count = 0;          // contour count, multiplicities included
    bool certified = false;         // winding_count == roots.size()
};

// Locate all zeros of the characteristic function in `box`: phase-winding
// cells on a sampling grid propose starts, Newton polishes them, and the
// argument principle over the box boundary certifies completeness. If the
// contour initially passes too close to a zero the box is nudged outward by
// a few parts in 1e6 (membership uses the nudged box, so boundary-grazing
// zeros count as inside). Throws invalid_box for malformed boxes, boxes
// containing 0, or j = 0 boxes reaching Re lambda < 0.
spectrum_result find_roots(const layered_domain& d, const mode_problem& mp,
                           const search_box& box, const search_options& opt = {});

// min over ell <= ell_max of Im(value) over every root found in `box`
// (value = lambda or lambda^2 per the j convention). +inf when nothing is
// found. Throws contour_near_root only if repeated nudges keep failing.
double spectral_gap(const layered_domain& d, int j, int ell_max, const search_box& box,
                    const search_options& opt = {});

// Radial profile of the inner-seeded solution at `lambda`, sampled on g and
// normalized to max |R| = 1. At an eigenvalue this is the mode shape.
radial_field mode_shape(const layered_domain& d, const mode_problem& mp, cdouble lambda,
                        const mode_grid& g);

// Per-shell coefficients of R = alpha j_ell(kappa r) + beta y_ell(kappa r),
// each pair with its own scale; the building block behind mode_shape and the
// resolvent kernels. seeded_at is the radius carrying the Cauchy data (must
// be r0 or r_out).
struct shell_coeffs {
    std::vector<cdouble> alpha, beta;
    std::vector<double> log_scale;
};
shell_coeffs solve_layers(const layered_domain& d, int ell, cdouble lambda,
                          const boundary_state& seed, double seeded_at);

} // namespace layerspec::spectral
