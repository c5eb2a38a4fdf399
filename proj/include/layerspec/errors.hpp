// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace layerspec {

enum class errc {
    // domain validation
    non_monotone_radii,
    non_positive_speed,
    negative_dissipation,
    empty_layers,
    bad_config,
    grid_mismatch,
    // special functions
    overflow_risk,
    // spectral
    invalid_box,
    contour_near_root,
    nonconverged_newton,
    // resolvent
    near_eigenvalue,
    power_iteration_stall,
    tail_not_decreasing,
    nonpositive_max,
    // evolution
    cfl_violation,
    unstable_run,
    solve_failure,
    unsupported_mode,
    window_too_short,
    nonpositive_energy,
    // io
    unknown_style,
    io_failure,
};

const char* errc_name(errc c);

// Single exception type for contract violations and numerical failures.
// `code` keeps the failures machine-distinguishable (the CLI maps config
// errors to exit 1 and numerical errors to exit 2).
class error : public std::runtime_error {
  public:
    error(errc c, const std::string& what) : std::runtime_error(what), code(c) {}
    errc code;
};

[[noreturn]] inline void fail(errc c, const std::string& what) {
    throw error(c, std::string(errc_name(c)) + ": " + what);
}

} // namespace layerspec
