#pragma once
// SPDX-License-Identifier: Apache-2.0
//
// Serialization of results: RFC-4180 CSV writers (CRLF rows, '.' decimal
// separator, 17 significant digits), small JSON reports, atomic file writes,
// and plot-ready two-column data with matching gnuplot scripts. Every writer
// is a pure function of its input, so identical results serialize to
// byte-identical output.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "layerspec/evolve.hpp"
#include "layerspec/resolvent.hpp"
#include "layerspec/spectral.hpp"

namespace layerspec::io {

// Shortest-correct decimal form at 17 significant digits, locale-independent.
std::string format_number(double x);

// Whole-file read; io_failure when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Write-to-temp + rename, so readers never observe a half-written file.
// io_failure on any filesystem error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Energy history as "t,energy,flux" rows; the flux field is left empty when
// the trace carries no boundary dissipation column.
std::string trace_csv(const evolve::energy_trace& trace);

// {"rate": .., "r_squared": .., "window_start": .., "window_end": ..}
std::string decay_fit_json(const evolve::decay_fit& fit);

// "ell,j,re_lambda,im_lambda,residual" rows, one per root, in input order.
std::string spectrum_csv(const std::vector<spectral::root_record>& roots, int j);

// Full spectrum report: j, roots (lambda and eigenvalue as [re, im] pairs
// with Newton residuals), contour count and certification flag.
std::string spectrum_json(const spectral::spectrum_result& sp, int j);

// "j,lambda,norm,lambda_pow_j_times_norm,ell_argmax,tail_ok" rows.
std::string sweep_csv(const std::vector<resolvent::sweep_row>& rows);

// "lambda,im_lambda,cutoff_radius,norm,lambda_norm,ell_argmax,tail_ok" rows.
std::string exterior_sweep_csv(const std::vector<resolvent::exterior_sweep_row>& rows);

enum class plot_style { sweep, spectrum, trace };

// Maps "sweep" | "spectrum" | "trace"; anything else is unknown_style.
plot_style parse_plot_style(const std::string& name);

// Two-column projections of the result types for plotting.
std::vector<std::array<double, 2>> sweep_plot_points(const std::vector<resolvent::sweep_row>& rows);
std::vector<std::array<double, 2>> spectrum_plot_points(
    const std::vector<spectral::root_record>& roots);
// (t, log energy); samples with energy <= 0 are dropped.
std::vector<std::array<double, 2>> trace_plot_points(const evolve::energy_trace& trace);

struct plot_output {
    std::filesystem::path data;    // <stem>.csv, headerless two-column data
    std::filesystem::path script;  // <stem>.gp, plain gnuplot referencing it
};

// Writes both files atomically into dir; the script refers to the data file
// by bare filename, so the pair relocates together.
plot_output emit_plot_data(const std::filesystem::path& dir, const std::string& stem,
                           plot_style style, const std::vector<std::array<double, 2>>& points);

}  // namespace layerspec::io
