// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "layerspec/errors.hpp"

namespace layerspec {

using cdouble = std::complex<double>;

enum class inner_bc_kind { dirichlet, neumann };

// Nested concentric shells in 3-d: radii r0 < r1 < ... < r_{m+1}, wave speed
// c_k constant on the k-th shell (r_{k-1}, r_k), dissipation coefficient a0
// on the outer sphere, and a Dirichlet or Neumann condition on the inner one.
// The angular factor is separated off, so everything downstream works with
// radial profiles; the 4*pi solid-angle factor is dropped throughout.
struct layered_domain {
    std::vector<double> radii;  // size m+2
    std::vector<double> speeds; // size m+1, speeds[k] on (radii[k], radii[k+1])
    double a0 = 0.0;
    inner_bc_kind inner_bc = inner_bc_kind::dirichlet;

    std::size_t num_shells() const { return speeds.size(); }
    double inner_radius() const { return radii.front(); }
    double outer_radius() const { return radii.back(); }
    double min_speed() const;
    double max_speed() const;
    // speed on the shell containing r (interfaces resolve to the outer side)
    double speed_at(double r) const;
};

// j = 0 selects the Schrödinger-type boundary row dR/dr + i a0 R = 0,
// j = 1 the wave-type row dR/dr + i lambda a0 R = 0; ell is the spherical
// harmonic degree of the separated mode.
struct mode_problem {
    int j = 1;
    int ell = 0;
};

// One radial profile sampled on a grid that covers [r0, r_out] with every
// interface radius present as a node.
struct radial_field {
    std::vector<double> grid;
    std::vector<cdouble> values;
};

struct domain_violation {
    errc code;
    std::string field; // offending field name
    std::size_t index; // offending entry, npos when the field as a whole is bad
    std::string message;
};

struct validation_result {
    std::vector<domain_violation> violations;
    bool ok() const { return violations.empty(); }
};

// Checks monotone positive radii, positive speeds with len(speeds) ==
// len(radii)-1, a0 >= 0, and at least one shell. Never repairs anything:
// every defect is reported with field name and index.
validation_result validate_domain(const layered_domain& d);

// validate_domain + throw on the first violation; convenience for callers
// that cannot proceed with an invalid domain.
layered_domain checked_domain(layered_domain d);

// True when speeds are strictly decreasing outward (the non-trapping
// ordering; reversed orderings support interface-trapped quasi-modes).
bool speeds_monotone(const layered_domain& d);

// Evolution/quadrature grid: piecewise-uniform, interfaces exactly on nodes.
// `shell_of[i]` is the shell index of the cell [grid[i], grid[i+1]).
struct mode_grid {
    std::vector<double> r;
    std::vector<std::size_t> shell_of; // size r.size()-1
    std::vector<double> trapezoid_w;   // per-node plain trapezoid weights
};

// target_points is a hint for the total node count (>= shells+1); spacing is
// near-uniform per shell and nodes land exactly on every interface.
mode_grid make_mode_grid(const layered_domain& d, std::size_t target_points);
// Same, but with per-shell spacing as close to dr as node alignment allows.
mode_grid make_mode_grid_dr(const layered_domain& d, double dr);

// ||R||_H^2 = ∫ |R|^2 c^{-2} r^2 dr, trapezoid per shell. The field's grid
// must cover [r0, r_out] with all interfaces as nodes (grid_mismatch if not).
double h_norm_mode(const layered_domain& d, const radial_field& f);

// Mode energy ∫ (|R'|^2 + ell(ell+1)|R|^2/r^2 + |R_t|^2 c^{-2}) r^2 dr with
// R' from per-shell second-order finite differences.
double energy_norm_mode(const layered_domain& d, const radial_field& f,
                        const radial_field& f_t, int ell);

// JSON round trip; parse rejects unknown keys and reports every violation of
// the schema {"radii": [...], "speeds": [...], "a0": x, "inner_bc": "..."}.
std::string domain_to_json(const layered_domain& d);
layered_domain domain_from_json(const std::string& text);

} // namespace layerspec
