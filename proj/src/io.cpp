// SPDX-License-Identifier: Apache-2.0
#include "layerspec/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "layerspec/errors.hpp"

namespace layerspec::io {

namespace {

constexpr const char* kCrlf = "\r\n";

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    out += kCrlf;
}

}  // namespace

std::string format_number(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(errc::io_failure, "read failed for " + path.string());
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(errc::io_failure, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) fail(errc::io_failure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(errc::io_failure, "rename to " + path.string() + " failed: " + ec.message());
}

std::string trace_csv(const evolve::energy_trace& trace) {
    std::string out = "t,energy,flux";
    out += kCrlf;
    const bool with_flux = !trace.boundary_flux.empty();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out += format_number(trace.times[i]);
        out += ',';
        out += format_number(trace.energy[i]);
        out += ',';
        if (with_flux) out += format_number(trace.boundary_flux[i]);
        out += kCrlf;
    }
    return out;
}

std::string decay_fit_json(const evolve::decay_fit& fit) {
    nlohmann::json j;
    j["rate"] = fit.rate;
    j["r_squared"] = fit.r_squared;
    j["window_start"] = fit.window_start;
    j["window_end"] = fit.window_end;
    return j.dump(2) + "\n";
}

std::string spectrum_csv(const std::vector<spectral::root_record>& roots, int j) {
    std::string out = "ell,j,re_lambda,im_lambda,residual";
    out += kCrlf;
    for (const auto& root : roots)
        append_row(out, {std::to_string(root.ell), std::to_string(j),
                         format_number(root.lambda.real()), format_number(root.lambda.imag()),
                         format_number(root.newton_residual)});
    return out;
}

std::string spectrum_json(const spectral::spectrum_result& sp, int j) {
    nlohmann::json out;
    out["j"] = j;
    out["winding_count"] = sp.winding_count;
    out["certified"] = sp.certified;
    auto& roots = out["roots"] = nlohmann::json::array();
    for (const auto& root : sp.roots) {
        nlohmann::json r;
        r["ell"] = root.ell;
        r["lambda"] = {root.lambda.real(), root.lambda.imag()};
        r["value"] = {root.value.real(), root.value.imag()};
        r["residual"] = root.newton_residual;
        roots.push_back(std::move(r));
    }
    return out.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<resolvent::sweep_row>& rows) {
    std::string out = "j,lambda,norm,lambda_pow_j_times_norm,ell_argmax,tail_ok";
    out += kCrlf;
    for (const auto& row : rows)
        append_row(out, {std::to_string(row.j), format_number(row.lambda),
                         format_number(row.norm), format_number(row.lambda_pow_j_norm),
                         std::to_string(row.ell_argmax), row.tail_ok ? "1" : "0"});
    return out;
}

std::string exterior_sweep_csv(const std::vector<resolvent::exterior_sweep_row>& rows) {
    std::string out = "lambda,im_lambda,cutoff_radius,norm,lambda_norm,ell_argmax,tail_ok";
    out += kCrlf;
    for (const auto& row : rows)
        append_row(out, {format_number(row.lambda), format_number(row.im_lambda),
                         format_number(row.cutoff_radius), format_number(row.norm),
                         format_number(row.lambda_norm), std::to_string(row.ell_argmax),
                         row.tail_ok ? "1" : "0"});
    return out;
}

plot_style parse_plot_style(const std::string& name) {
    if (name == "sweep") return plot_style::sweep;
    if (name == "spectrum") return plot_style::spectrum;
    if (name == "trace") return plot_style::trace;
    fail(errc::unknown_style, "no plot style named '" + name + "'");
}

std::vector<std::array<double, 2>> sweep_plot_points(
    const std::vector<resolvent::sweep_row>& rows) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(rows.size());
    for (const auto& row : rows) pts.push_back({row.lambda, row.lambda_pow_j_norm});
    return pts;
}

std::vector<std::array<double, 2>> spectrum_plot_points(
    const std::vector<spectral::root_record>& roots) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(roots.size());
    for (const auto& root : roots) pts.push_back({root.lambda.real(), root.lambda.imag()});
    return pts;
}

std::vector<std::array<double, 2>> trace_plot_points(const evolve::energy_trace& trace) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        if (trace.energy[i] > 0.0) pts.push_back({trace.times[i], std::log(trace.energy[i])});
    return pts;
}

plot_output emit_plot_data(const std::filesystem::path& dir, const std::string& stem,
                           plot_style style, const std::vector<std::array<double, 2>>& points) {
    plot_output out;
    out.data = dir / (stem + ".csv");
    out.script = dir / (stem + ".gp");

    std::string data;
    for (const auto& p : points) {
        data += format_number(p[0]);
        data += ',';
        data += format_number(p[1]);
        data += kCrlf;
    }

    const char* xlabel = "lambda";
    const char* ylabel = "lambda^j * norm";
    const char* with = "lines";
    if (style == plot_style::spectrum) {
        xlabel = "Re lambda";
        ylabel = "Im lambda";
        with = "points";
    } else if (style == plot_style::trace) {
        xlabel = "t";
        ylabel = "log energy";
    }
    std::string script;
    script += "set datafile separator \",\"\n";
    script += "set key off\n";
    script += std::string("set xlabel \"") + xlabel + "\"\n";
    script += std::string("set ylabel \"") + ylabel + "\"\n";
    script += "plot \"" + (stem + ".csv") + "\" using 1:2 with " + with + "\n";

    write_file_atomic(out.data, data);
    write_file_atomic(out.script, script);
    return out;
}

}  // namespace layerspec::io
