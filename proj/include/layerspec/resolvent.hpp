// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "layerspec/domain.hpp"

namespace layerspec {

// Radial scatterer with an unbounded outside: the shells of radii/speeds are
// read as in layered_domain except that speeds.back() extends from
// radii.back() to infinity, and the outgoing radiation condition replaces the
// dissipative boundary row. radii.size() == speeds.size(); radii.size() == 1
// is a plain Dirichlet/Neumann ball in a homogeneous medium.
struct exterior_domain {
    std::vector<double> radii;
    std::vector<double> speeds;
    inner_bc_kind inner_bc = inner_bc_kind::dirichlet;
};

// Throws on non-monotone/non-positive radii, non-positive speeds, or a size
// mismatch. Returns its argument so call sites can validate inline.
exterior_domain checked_exterior(exterior_domain e);

// Bounded view of an exterior problem: the unbounded run becomes the last
// shell, ending at `cutoff` (which must lie beyond the last interface). The
// view's a0 is zero; whoever uses it attaches its own outer closure (an
// outgoing seed, a transparent time-stepping row).
layered_domain bounded_window(const exterior_domain& e, double cutoff);

namespace resolvent {

// Two independent solutions of the radial mode equation on a bounded window:
// phi carries the inner boundary condition outward, psi carries the outer
// closure (dissipative row, or outgoing-wave Cauchy data for exterior
// problems) inward. Fields are stored as mantissas against one exp(log_scale)
// factor per solution; products phi*psi/pw are scale-free.
struct fundamental_pair {
    layered_domain dom;  // bounded window the pair lives on
    mode_grid grid;
    int ell = 0;
    int j = 1;              // boundary-row power (ignored when radiating)
    bool radiating = false; // psi seeded from the outgoing wave at r_out
    cdouble lambda{};

    std::vector<cdouble> phi, dphi; // values and d/dr at grid nodes
    std::vector<cdouble> psi, dpsi;
    double phi_log_scale = 0.0;
    double psi_log_scale = 0.0;

    // r^2 * (phi psi' - phi' psi): independent of r for exact solutions.
    // Stored at the combined mantissa scale of the two fields.
    cdouble pw{};
    double pw_rel_spread = 0.0; // max |pw(r_i) - pw| / |pw| over nodes
};

// Interior pair on [r0, r_out] of d with the dissipative outer row
// dR/dr + i lambda^j a0 R = 0. Throws near_eigenvalue when the two solutions
// are numerically proportional (|pw| below 1e-10 of its natural scale).
fundamental_pair make_fundamental_pair(const layered_domain& d, const mode_problem& mp,
                                       cdouble lambda, std::size_t quadrature_n = 2000);

// Exterior pair on [r0, cutoff_radius]: psi is the outgoing radial wave of
// the unbounded medium, seeded from its exact Cauchy data at cutoff_radius.
// Since the outermost run is homogeneous, truncation introduces no error for
// sources and observation points inside the window.
fundamental_pair make_fundamental_pair(const exterior_domain& e, int ell, cdouble lambda,
                                       double cutoff_radius, std::size_t quadrature_n = 2000);

// u = R(lambda) v: solves (lambda^2 + c^2 Delta_ell) u = v with the pair's
// boundary conditions, via variation of parameters with cumulative trapezoid
// integrals (O(n)). v must be sampled on fp.grid.
radial_field apply_resolvent(const fundamental_pair& fp, const radial_field& v);

struct norm_estimate {
    double value = 0.0;   // operator norm estimate on the weighted-L2 mode space
    bool converged = true; // false: power iteration stalled, value is best-so-far
    int iterations = 0;
};

// Largest singular value of the symmetrized discrete kernel
// sqrt(w) G sqrt(w), w = trapezoid weight * r^2/c^2, by power iteration on
// K^H K from a deterministic all-ones start (relative tolerance 1e-8, at most
// 500 iterations). A stall is reported in the flag, never thrown.
norm_estimate mode_norm(const fundamental_pair& fp);
norm_estimate mode_norm(const layered_domain& d, const mode_problem& mp, cdouble lambda,
                        std::size_t quadrature_n = 2000);
// Exterior norm restricted to r <= cutoff_radius (sharp cutoff on both
// sides of the kernel).
norm_estimate exterior_mode_norm(const exterior_domain& e, int ell, cdouble lambda,
                                 double cutoff_radius, std::size_t quadrature_n = 2000);

struct sweep_options {
    std::size_t quadrature_n = 2000;
    int ell_pad = 10;            // ell_max = ceil(lambda r / min c) + ell_pad
    int max_tail_extensions = 3; // extra +10 blocks before flagging the tail
    unsigned threads = 1;        // worker threads over lambda points
};

struct sweep_row {
    int j = 1;
    double lambda = 0.0;
    double norm = 0.0;            // max over ell of the mode norm
    double lambda_pow_j_norm = 0.0;
    int ell_argmax = 0;
    bool tail_ok = true; // last five mode norms strictly decreasing
};

// One row of the resolvent-norm sweep at real lambda: scans ell = 0..ell_max,
// extending ell_max (up to max_tail_extensions blocks) until the last five
// mode norms decrease strictly; tail_ok records whether that was achieved.
sweep_row sweep_point(const layered_domain& d, int j, double lambda, const sweep_options& opt = {});

// Rows for every lambda (entries must be positive), sorted as given. Workers
// split the lambda list; results are slotted by index, so the output is
// byte-identical for any thread count.
std::vector<sweep_row> full_norm_sweep(const layered_domain& d, int j,
                                       std::span<const double> lambdas,
                                       const sweep_options& opt = {});

struct exterior_sweep_row {
    double lambda = 0.0;
    double im_lambda = 0.0;
    double cutoff_radius = 0.0;
    double norm = 0.0;
    double lambda_norm = 0.0; // |lambda| * norm
    int ell_argmax = 0;
    bool tail_ok = true;
};

exterior_sweep_row exterior_sweep_point(const exterior_domain& e, cdouble lambda,
                                        double cutoff_radius, const sweep_options& opt = {});
std::vector<exterior_sweep_row> exterior_norm_sweep(const exterior_domain& e,
                                                    std::span<const double> lambdas,
                                                    double cutoff_radius,
                                                    const sweep_options& opt = {});

// Outgoing logarithmic derivative nu(ell, lambda) = (1/lambda) * d/dr of the
// radiating exterior solution with unit trace on the sphere of radius r,
// speed c. Closed form at ell = 0: -i/c - 1/(lambda r).
cdouble outgoing_dtn(int ell, cdouble lambda, double c, double r);

struct glancing_fit {
    double slope = 0.0;     // least-squares slope of log s vs log lambda
    double r_squared = 0.0;
    std::vector<double> s;  // peak |Re nu| per lambda, in input order
};

// Measures how the largest |Re nu| over propagating degrees
// (ell + 1/2 <= lambda r / c) shrinks with frequency. Re nu is negative and
// O(1/lambda) at low degrees, with the peak magnitude at the oscillatory-to-
// evanescent transition; the fitted slope is the transition exponent.
// Requires at least 4 positive frequencies with max/min >= 4
// (bad_config otherwise); nonpositive_max if no degree propagates.
glancing_fit glancing_exponent(double c, double r, std::span<const double> lambdas);

} // namespace layerspec::resolvent
} // namespace layerspec
