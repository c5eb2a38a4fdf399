#pragma once
// SPDX-License-Identifier: Apache-2.0
//
// Time-domain runs for the layered mode problems: a damped wave integrator,
// a Crank-Nicolson Schrodinger integrator, an exterior l=0 run with a
// transparent outflow row, and a least-squares decay-rate fit on the sampled
// energy history.

#include <vector>

#include "layerspec/domain.hpp"
#include "layerspec/resolvent.hpp"

namespace layerspec::evolve {

// Sampled energy history of a run. times is strictly increasing and energy
// entries are nonnegative. boundary_flux is filled by evolve_wave only:
// entry k is the dissipated power a0 |u_t(r_out)|^2 r_out^2 taken between
// samples k and k+1 (the final entry is zero padding so columns align); it
// is empty for the Schrodinger and exterior runs.
struct energy_trace {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> boundary_flux;
};

struct wave_run {
    energy_trace trace;
    radial_field final_value;     // R at the last sample time
    radial_field final_velocity;  // dR/dt there, centered in time
};

struct schrodinger_run {
    energy_trace trace;
    radial_field final_value;  // R at the last sample time
};

// Damped wave run for one angular degree. Works on v = r R per shell
// (v_tt = c^2 [v_rr - l(l+1) v / r^2]) with leapfrog in the shell interiors,
// value/derivative matching at the interfaces, the inner wall condition at
// r0, and the dissipative row v_r - v/r + a0 v_t = 0 at r_out with the
// time-averaged v_t. Both init fields must be sampled on the grid
// make_mode_grid_dr(d, dr) builds (grid_mismatch otherwise). Energy samples
// are the physical wave energy — half the quadratic form energy_norm_mode
// computes on (R, R_t) with centered time differences — so the continuum
// balance dE/dt = -boundary_flux holds with a unit factor; times are
// k*dt with k*dt reaching horizon. Throws cfl_violation when
// dt > 0.9 * min_k(h_k / c_k) and unstable_run when a sample grows by more
// than 1e-6 relative over its predecessor.
wave_run evolve_wave(const layered_domain& d, int ell, const radial_field& init_value,
                     const radial_field& init_velocity, double horizon, double dr, double dt);

// Schrodinger run for one angular degree: Crank-Nicolson on the contraction
// branch of the generator (modes with Im z > 0 decay like exp(-Im z * t)).
// The spatial operator is the flux-form tridiagonal on v = r R, symmetric in
// the weighted inner product it conserves, with the boundary row
// d_r R + i a0 R = 0 folded into the outer matrix entry. Unconditionally
// stable; with a0 = 0 each step conserves the weighted norm to roundoff and
// with a0 > 0 each step contracts it. energy samples are ||u||_H^2. Throws
// solve_failure if the tridiagonal solve hits a vanishing pivot.
schrodinger_run evolve_schrodinger(const layered_domain& d, int ell, const radial_field& init,
                                   double horizon, double dr, double dt);

// Exterior run for the spherically symmetric degree (ell must be 0,
// unsupported_mode otherwise). The window [r0, window_radius] carries the
// leapfrog scheme; at window_radius the outgoing advection row
// (d_t + c d_r) v = 0 closes the grid, exact for l=0 fields when the local
// Courant number is 1. Both init fields must be supported in
// r <= local_radius and sampled on the window grid. The trace records the
// physical local energy over r <= local_radius, evaluated with the staggered
// lattice functional the interior scheme conserves exactly (samples sit at
// half-steps (k + 1/2) dt). CFL bound allows equality: dt <= min_k(h_k/c_k).
energy_trace evolve_exterior_l0(const exterior_domain& e, int ell, const radial_field& init_value,
                                const radial_field& init_velocity, double horizon,
                                double local_radius, double window_radius, double dr, double dt);

struct decay_fit {
    double rate = 0.0;       // decay exponent: energy ~ exp(-rate * t)
    double r_squared = 0.0;  // coefficient of determination in log space
    double window_start = 0.0;
    double window_end = 0.0;
    bool degenerate = false;  // constant trace: rate forced to 0
};

// Least-squares line through (t, log energy) over the samples inside
// [window_start, window_end]; rate is minus the slope. Throws
// window_too_short with fewer than 5 samples inside the window and
// nonpositive_energy when any sample in the window is <= 0. A constant
// trace comes back with rate 0, r_squared 0 and the degenerate flag set.
// The reported window is the span of the samples actually used.
decay_fit fit_decay(const energy_trace& trace, double window_start, double window_end);

}  // namespace layerspec::evolve
