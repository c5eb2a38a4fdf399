// SPDX-License-Identifier: Apache-2.0

#include "layerspec/jobs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "layerspec/domain.hpp"
#include "layerspec/errors.hpp"
#include "layerspec/evolve.hpp"
#include "layerspec/io.hpp"
#include "layerspec/resolvent.hpp"
#include "layerspec/spectral.hpp"

namespace layerspec::jobs {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kCrlf = "\r\n";

// Typed access to one JSON object that tracks which keys were read, so
// finish() can reject anything the job does not understand. Misspelled keys
// die loudly instead of silently falling back to defaults.
class config_view {
  public:
    config_view(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail(errc::bad_config, where_ + ": expected a JSON object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key) {
        const json& v = require(key);
        if (!v.is_number()) wrong(key, "a number");
        return v.get<double>();
    }
    double number(const char* key, double dflt) { return has(key) ? number(key) : dflt; }

    long integer(const char* key) {
        const json& v = require(key);
        if (!v.is_number_integer()) wrong(key, "an integer");
        return v.get<long>();
    }
    long integer(const char* key, long dflt) { return has(key) ? integer(key) : dflt; }

    bool flag(const char* key, bool dflt) {
        if (!has(key)) return dflt;
        const json& v = require(key);
        if (!v.is_boolean()) wrong(key, "a boolean");
        return v.get<bool>();
    }

    std::string text(const char* key) {
        const json& v = require(key);
        if (!v.is_string()) wrong(key, "a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key, std::size_t exact_len = 0) {
        const json& v = require(key);
        if (!v.is_array()) wrong(key, "an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (const json& el : v) {
            if (!el.is_number()) wrong(key, "an array of numbers");
            out.push_back(el.get<double>());
        }
        if (exact_len != 0 && out.size() != exact_len)
            fail(errc::bad_config, where_ + "." + key + ": expected exactly " +
                                       std::to_string(exact_len) + " entries");
        return out;
    }

    std::vector<long> integers(const char* key) {
        const json& v = require(key);
        if (!v.is_array()) wrong(key, "an array of integers");
        std::vector<long> out;
        out.reserve(v.size());
        for (const json& el : v) {
            if (!el.is_number_integer()) wrong(key, "an array of integers");
            out.push_back(el.get<long>());
        }
        return out;
    }

    const json& child(const char* key) { return require(key); }

    std::string key_path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                fail(errc::bad_config, where_ + ": unknown key \"" + item.key() + "\"");
    }

  private:
    const json& require(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key))
            fail(errc::bad_config, where_ + ": missing key \"" + std::string(key) + "\"");
        return j_.at(key);
    }
    [[noreturn]] void wrong(const char* key, const char* kind) const {
        fail(errc::bad_config, where_ + "." + key + ": expected " + kind);
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(errc::bad_config, where + ": " + e.what());
    }
}

fs::path resolve_against(const fs::path& base, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : base / p;
}

layered_domain load_layered(const fs::path& path) {
    layered_domain d;
    try {
        d = domain_from_json(io::read_text_file(path));
    } catch (const error& e) {
        throw error(e.code, path.generic_string() + ": " + e.what());
    }
    const validation_result vr = validate_domain(d);
    if (!vr.ok()) {
        std::string msg = path.generic_string();
        for (const auto& v : vr.violations) msg += "; " + v.field + ": " + v.message;
        throw error(vr.violations.front().code, msg);
    }
    return d;
}

// Exterior configs drop a0 (there is no dissipative sphere, the medium just
// keeps going) and read speeds.back() as the speed of the unbounded run.
exterior_domain load_exterior(const fs::path& path) {
    const json j = parse_json_text(io::read_text_file(path), path.generic_string());
    config_view cv(j, path.generic_string());
    exterior_domain e;
    e.radii = cv.numbers("radii");
    e.speeds = cv.numbers("speeds");
    const std::string bc = cv.text("inner_bc");
    if (bc == "dirichlet")
        e.inner_bc = inner_bc_kind::dirichlet;
    else if (bc == "neumann")
        e.inner_bc = inner_bc_kind::neumann;
    else
        fail(errc::bad_config, path.generic_string() + ".inner_bc: expected \"dirichlet\" or \"neumann\"");
    cv.finish();
    return checked_exterior(std::move(e));
}

void check_search_box(const spectral::search_box& b, int j, const std::string& where) {
    if (!(b.re_min < b.re_max) || !(b.im_min < b.im_max))
        fail(errc::bad_config, where + ": box is [re_min, re_max, im_min, im_max] with min < max");
    if (b.re_min <= 0.0 && 0.0 <= b.re_max && b.im_min <= 0.0 && 0.0 <= b.im_max)
        fail(errc::bad_config,
             where + ": box must exclude lambda = 0; search boxes on either side of the origin instead");
    if (j == 0 && b.re_min < 0.0)
        fail(errc::bad_config,
             where + ": boxes for j = 0 must stay in Re lambda > 0 (z = lambda^2 covers both signs)");
}

std::vector<double> linspace(double lo, double hi, long n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

struct lambda_grid {
    double lo = 0.0, hi = 0.0;
    long count = 0;
    std::vector<double> points() const { return linspace(lo, hi, count); }
};

lambda_grid parse_lambda_grid(config_view& cv) {
    lambda_grid g;
    g.lo = cv.number("lambda_min");
    g.hi = cv.number("lambda_max");
    g.count = cv.integer("count");
    if (!(g.lo > 0.0)) fail(errc::bad_config, cv.key_path("lambda_min") + ": must be positive");
    if (!(g.hi >= g.lo)) fail(errc::bad_config, cv.key_path("lambda_max") + ": must be >= lambda_min");
    if (g.count < 1) fail(errc::bad_config, cv.key_path("count") + ": must be >= 1");
    if (g.count == 1 && g.hi != g.lo)
        fail(errc::bad_config, cv.key_path("count") + ": a one-point sweep needs lambda_max == lambda_min");
    return g;
}

// --- initial data for the time-domain jobs ---

struct init_spec {
    bool is_bump = true;
    double lo = 0.0, hi = 0.0;       // bump support
    spectral::search_box box{};       // mode search box
    json echo;                        // resolved form for the manifest
};

init_spec parse_init(const json& j, const std::string& where, const layered_domain& d, int jpow) {
    config_view cv(j, where);
    init_spec spec;
    const std::string type = cv.text("type");
    if (type == "bump") {
        const auto sup = cv.numbers("support", 2);
        spec.is_bump = true;
        spec.lo = sup[0];
        spec.hi = sup[1];
        if (!(spec.lo < spec.hi) || spec.lo < d.inner_radius() || spec.hi > d.outer_radius())
            fail(errc::bad_config,
                 where + ".support: needs r0 <= a < b <= r_out for this domain");
        spec.echo = json{{"type", "bump"}, {"support", {spec.lo, spec.hi}}};
    } else if (type == "mode") {
        const auto b = cv.numbers("box", 4);
        spec.is_bump = false;
        spec.box = spectral::search_box{b[0], b[1], b[2], b[3]};
        check_search_box(spec.box, jpow, where + ".box");
        spec.echo = json{{"type", "mode"}, {"box", b}};
    } else {
        fail(errc::bad_config, where + ".type: expected \"bump\" or \"mode\"");
    }
    cv.finish();
    return spec;
}

double bump_profile(double r, double a, double b) {
    const double x = (r - a) / (b - a);
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(4.0 - 1.0 / (x * (1.0 - x)));
}

radial_field field_of(const mode_grid& g, const std::function<cdouble(double)>& f) {
    radial_field out;
    out.grid = g.r;
    out.values.reserve(g.r.size());
    for (double r : g.r) out.values.push_back(f(r));
    return out;
}

struct init_fields {
    radial_field value;
    radial_field velocity;  // ignored by the Schrodinger run
};

// The smallest imaginary part of the located eigenvalues is the mode that
// dies out last; its shape makes the cleanest single-rate decay run.
spectral::root_record slowest_root(const layered_domain& d, const mode_problem& mp,
                                   const spectral::search_box& box) {
    const auto sp = spectral::find_roots(d, mp, box);
    if (sp.roots.empty())
        fail(errc::invalid_box, "mode init: no eigenvalue found inside the given box");
    return *std::min_element(sp.roots.begin(), sp.roots.end(),
                             [](const spectral::root_record& a, const spectral::root_record& b) {
                                 return a.value.imag() < b.value.imag();
                             });
}

init_fields build_init(const layered_domain& d, const mode_grid& g, const init_spec& spec,
                       int jpow, int ell) {
    init_fields f;
    if (spec.is_bump) {
        f.value = field_of(g, [&](double r) { return cdouble(bump_profile(r, spec.lo, spec.hi)); });
        f.velocity = field_of(g, [](double) { return cdouble(0.0); });
        return f;
    }
    const auto root = slowest_root(d, mode_problem{jpow, ell}, spec.box);
    f.value = spectral::mode_shape(d, mode_problem{jpow, ell}, root.lambda, g);
    f.velocity = f.value;
    const cdouble il = cdouble(0.0, 1.0) * root.lambda;
    for (auto& v : f.velocity.values) v *= il;
    return f;
}

double transit_time(const layered_domain& d) {
    double t = 0.0;
    for (std::size_t k = 0; k < d.num_shells(); ++k)
        t += (d.radii[k + 1] - d.radii[k]) / d.speeds[k];
    return t;
}

// Default fit window: the last third of the run, but never earlier than five
// full boundary-to-boundary transits, so the fit sees settled decay rather
// than the initial redistribution of the data.
std::pair<double, double> default_fit_window(const layered_domain& d, double horizon) {
    return {std::max(2.0 * horizon / 3.0, 5.0 * transit_time(d)), horizon};
}

// --- plans: config parsing up front, computation deferred to run() ---

struct job_plan {
    json resolved;
    // Writes outputs into the directory, appends their names, returns the
    // job's exit code (0 unless the job itself reports a failed check).
    std::function<int(const fs::path&, std::vector<std::string>&)> run;
};

void write_output(const fs::path& out_dir, const std::string& name, std::string_view content,
                  std::vector<std::string>& files) {
    io::write_file_atomic(out_dir / name, content);
    files.push_back(name);
}

void write_plot(const fs::path& out_dir, const std::string& stem, io::plot_style style,
                const std::vector<std::array<double, 2>>& pts, std::vector<std::string>& files) {
    const auto plot = io::emit_plot_data(out_dir, stem, style, pts);
    files.push_back(plot.data.filename().string());
    files.push_back(plot.script.filename().string());
}

job_plan plan_validate(const json& cfg, const fs::path& base) {
    config_view cv(cfg, "config");
    const fs::path domain_path = resolve_against(base, cv.text("domain"));
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain", domain_path.generic_string()}};
    plan.run = [domain_path](const fs::path& out, std::vector<std::string>& files) {
        json report;
        try {
            const layered_domain d = domain_from_json(io::read_text_file(domain_path));
            const validation_result vr = validate_domain(d);
            json detail = json::array();
            for (const auto& v : vr.violations) {
                std::string entry = v.field;
                if (v.index != static_cast<std::size_t>(-1))
                    entry += "[" + std::to_string(v.index) + "]";
                detail.push_back(entry + ": " + v.message);
            }
            report["ok"] = vr.ok();
            report["detail"] = detail;
        } catch (const error& e) {
            report["ok"] = false;
            report["detail"] = json::array({e.what()});
        }
        write_output(out, "validation.json", report.dump(2) + "\n", files);
        return report["ok"].get<bool>() ? 0 : 1;
    };
    return plan;
}

job_plan plan_spectrum(const json& cfg, const fs::path& base, unsigned threads) {
    config_view cv(cfg, "config");
    const fs::path domain_path = resolve_against(base, cv.text("domain"));
    const layered_domain d = load_layered(domain_path);
    const int j = static_cast<int>(cv.integer("j"));
    if (j != 0 && j != 1) fail(errc::bad_config, "config.j: expected 0 or 1");
    std::vector<int> ells;
    for (long l : cv.integers("ells")) {
        if (l < 0) fail(errc::bad_config, "config.ells: degrees must be >= 0");
        ells.push_back(static_cast<int>(l));
    }
    if (ells.empty()) fail(errc::bad_config, "config.ells: need at least one degree");
    const auto b = cv.numbers("box", 4);
    const spectral::search_box box{b[0], b[1], b[2], b[3]};
    check_search_box(box, j, "config.box");
    spectral::search_options opt;
    opt.grid_re = static_cast<int>(cv.integer("grid_re", 0));
    opt.grid_im = static_cast<int>(cv.integer("grid_im", 0));
    if (opt.grid_re < 0 || opt.grid_im < 0)
        fail(errc::bad_config, "config.grid_re/grid_im: must be >= 0 (0 = auto)");
    const bool plot = cv.flag("plot", false);
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain", domain_path.generic_string()}, {"j", j},    {"ells", ells},
                         {"box", b},                               {"grid_re", opt.grid_re},
                         {"grid_im", opt.grid_im},                 {"plot", plot}};
    plan.run = [d, j, ells, box, opt, plot, threads](const fs::path& out,
                                                     std::vector<std::string>& files) {
        std::vector<spectral::spectrum_result> per(ells.size());
        const unsigned nw =
            std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ells.size())));
        std::vector<std::exception_ptr> errors(nw);
        auto work = [&](unsigned w) {
            try {
                for (std::size_t i = w; i < ells.size(); i += nw)
                    per[i] = spectral::find_roots(d, mode_problem{j, ells[i]}, box, opt);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        if (nw == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (const auto& ep : errors)
            if (ep) std::rethrow_exception(ep);

        spectral::spectrum_result merged;
        merged.certified = true;
        for (const auto& sp : per) {
            merged.roots.insert(merged.roots.end(), sp.roots.begin(), sp.roots.end());
            merged.winding_count += sp.winding_count;
            merged.certified = merged.certified && sp.certified;
        }
        std::sort(merged.roots.begin(), merged.roots.end(),
                  [](const spectral::root_record& a, const spectral::root_record& b) {
                      if (a.ell != b.ell) return a.ell < b.ell;
                      if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
                      return a.lambda.imag() < b.lambda.imag();
                  });
        write_output(out, "spectrum.csv", io::spectrum_csv(merged.roots, j), files);
        write_output(out, "spectrum.json", io::spectrum_json(merged, j), files);
        if (plot)
            write_plot(out, "spectrum_plot", io::plot_style::spectrum,
                       io::spectrum_plot_points(merged.roots), files);
        return 0;
    };
    return plan;
}

job_plan plan_sweep(const json& cfg, const fs::path& base, unsigned threads) {
    config_view cv(cfg, "config");
    const fs::path domain_path = resolve_against(base, cv.text("domain"));
    const layered_domain d = load_layered(domain_path);
    const int j = static_cast<int>(cv.integer("j"));
    if (j != 0 && j != 1) fail(errc::bad_config, "config.j: expected 0 or 1");
    const lambda_grid grid = parse_lambda_grid(cv);
    resolvent::sweep_options opt;
    opt.threads = std::max(1u, threads);
    const long qn = cv.integer("quadrature_n", static_cast<long>(opt.quadrature_n));
    if (qn < 2) fail(errc::bad_config, "config.quadrature_n: must be >= 2");
    opt.quadrature_n = static_cast<std::size_t>(qn);
    opt.ell_pad = static_cast<int>(cv.integer("ell_pad", opt.ell_pad));
    if (opt.ell_pad < 0) fail(errc::bad_config, "config.ell_pad: must be >= 0");
    const bool plot = cv.flag("plot", false);
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain", domain_path.generic_string()},
                         {"j", j},
                         {"lambda_min", grid.lo},
                         {"lambda_max", grid.hi},
                         {"count", grid.count},
                         {"quadrature_n", opt.quadrature_n},
                         {"ell_pad", opt.ell_pad},
                         {"plot", plot}};
    plan.run = [d, j, grid, opt, plot](const fs::path& out, std::vector<std::string>& files) {
        const auto lambdas = grid.points();
        const auto rows = resolvent::full_norm_sweep(d, j, lambdas, opt);
        write_output(out, "sweep.csv", io::sweep_csv(rows), files);
        if (plot)
            write_plot(out, "sweep_plot", io::plot_style::sweep, io::sweep_plot_points(rows), files);
        return 0;
    };
    return plan;
}

job_plan plan_exterior_sweep(const json& cfg, const fs::path& base, unsigned threads) {
    config_view cv(cfg, "config");
    const fs::path domain_path = resolve_against(base, cv.text("domain"));
    const exterior_domain e = load_exterior(domain_path);
    const lambda_grid grid = parse_lambda_grid(cv);
    const double cutoff = cv.number("cutoff_radius");
    if (!(cutoff > e.radii.back()))
        fail(errc::bad_config, "config.cutoff_radius: must lie beyond the last interface");
    resolvent::sweep_options opt;
    opt.threads = std::max(1u, threads);
    const long qn = cv.integer("quadrature_n", static_cast<long>(opt.quadrature_n));
    if (qn < 2) fail(errc::bad_config, "config.quadrature_n: must be >= 2");
    opt.quadrature_n = static_cast<std::size_t>(qn);
    opt.ell_pad = static_cast<int>(cv.integer("ell_pad", opt.ell_pad));
    if (opt.ell_pad < 0) fail(errc::bad_config, "config.ell_pad: must be >= 0");
    const bool plot = cv.flag("plot", false);
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain", domain_path.generic_string()},
                         {"lambda_min", grid.lo},
                         {"lambda_max", grid.hi},
                         {"count", grid.count},
                         {"cutoff_radius", cutoff},
                         {"quadrature_n", opt.quadrature_n},
                         {"ell_pad", opt.ell_pad},
                         {"plot", plot}};
    plan.run = [e, grid, cutoff, opt, plot](const fs::path& out, std::vector<std::string>& files) {
        const auto lambdas = grid.points();
        const auto rows = resolvent::exterior_norm_sweep(e, lambdas, cutoff, opt);
        write_output(out, "exterior_sweep.csv", io::exterior_sweep_csv(rows), files);
        if (plot) {
            std::vector<std::array<double, 2>> pts;
            pts.reserve(rows.size());
            for (const auto& row : rows) pts.push_back({row.lambda, row.lambda_norm});
            write_plot(out, "exterior_sweep_plot", io::plot_style::sweep, pts, files);
        }
        return 0;
    };
    return plan;
}

struct evolve_params {
    std::string equation;  // "wave" | "schrodinger"
    int jpow = 1;          // boundary-row power the equation implies
    int ell = 0;
    double horizon = 0.0, dr = 0.0, dt = 0.0;
};

evolve_params parse_evolve_params(config_view& cv) {
    evolve_params p;
    p.equation = cv.text("equation");
    if (p.equation == "wave")
        p.jpow = 1;
    else if (p.equation == "schrodinger")
        p.jpow = 0;
    else
        fail(errc::bad_config, "config.equation: expected \"wave\" or \"schrodinger\"");
    const long ell = cv.integer("ell");
    if (ell < 0) fail(errc::bad_config, "config.ell: must be >= 0");
    p.ell = static_cast<int>(ell);
    p.horizon = cv.number("horizon");
    p.dr = cv.number("dr");
    p.dt = cv.number("dt");
    if (!(p.horizon > 0.0) || !(p.dr > 0.0) || !(p.dt > 0.0))
        fail(errc::bad_config, "config: horizon, dr and dt must all be positive");
    return p;
}

std::pair<double, double> parse_fit_window(config_view& cv, const layered_domain& d,
                                           double horizon, bool& from_config) {
    from_config = cv.has("fit_window");
    if (!from_config) {
        const auto w = default_fit_window(d, horizon);
        if (w.first >= horizon)
            fail(errc::bad_config,
                 "config.horizon: too short for the default fit window (last third, at least "
                 "5 transits = " +
                     io::format_number(5.0 * transit_time(d)) +
                     "); extend it or give fit_window explicitly");
        return w;
    }
    const auto w = cv.numbers("fit_window", 2);
    if (!(w[0] < w[1]) || w[0] < 0.0)
        fail(errc::bad_config, "config.fit_window: expected 0 <= start < end");
    if (w[0] >= horizon)
        fail(errc::bad_config, "config.fit_window: starts at or after the horizon");
    return {w[0], w[1]};
}

evolve::energy_trace run_evolution(const layered_domain& d, const evolve_params& p,
                                   const init_spec& init) {
    const mode_grid g = make_mode_grid_dr(d, p.dr);
    const init_fields f = build_init(d, g, init, p.jpow, p.ell);
    if (p.equation == "wave")
        return evolve::evolve_wave(d, p.ell, f.value, f.velocity, p.horizon, p.dr, p.dt).trace;
    return evolve::evolve_schrodinger(d, p.ell, f.value, p.horizon, p.dr, p.dt).trace;
}

job_plan plan_evolve(const json& cfg, const fs::path& base) {
    config_view cv(cfg, "config");
    const fs::path domain_path = resolve_against(base, cv.text("domain"));
    const layered_domain d = load_layered(domain_path);
    const evolve_params p = parse_evolve_params(cv);
    const init_spec init = parse_init(cv.child("init"), "config.init", d, p.jpow);
    bool window_from_config = false;
    const auto window = parse_fit_window(cv, d, p.horizon, window_from_config);
    const bool plot = cv.flag("plot", false);
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain", domain_path.generic_string()},
                         {"equation", p.equation},
                         {"ell", p.ell},
                         {"init", init.echo},
                         {"horizon", p.horizon},
                         {"dr", p.dr},
                         {"dt", p.dt},
                         {"fit_window", {window.first, window.second}},
                         {"fit_window_source", window_from_config ? "config" : "default"},
                         {"plot", plot}};
    plan.run = [d, p, init, window, plot](const fs::path& out, std::vector<std::string>& files) {
        const auto trace = run_evolution(d, p, init);
        const auto fit = evolve::fit_decay(trace, window.first, window.second);
        write_output(out, "trace.csv", io::trace_csv(trace), files);
        write_output(out, "decay.json", io::decay_fit_json(fit), files);
        if (plot)
            write_plot(out, "trace_plot", io::plot_style::trace, io::trace_plot_points(trace),
                       files);
        return 0;
    };
    return plan;
}

job_plan plan_decay_compare(const json& cfg, const fs::path& base) {
    config_view cv(cfg, "config");
    const fs::path first_path = resolve_against(base, cv.text("domain_first"));
    const fs::path second_path = resolve_against(base, cv.text("domain_second"));
    const layered_domain first = load_layered(first_path);
    const layered_domain second = load_layered(second_path);
    evolve_params p;
    p.equation = "wave";
    p.jpow = 1;
    const long ell = cv.integer("ell");
    if (ell < 0) fail(errc::bad_config, "config.ell: must be >= 0");
    p.ell = static_cast<int>(ell);
    p.horizon = cv.number("horizon");
    p.dr = cv.number("dr");
    p.dt = cv.number("dt");
    if (!(p.horizon > 0.0) || !(p.dr > 0.0) || !(p.dt > 0.0))
        fail(errc::bad_config, "config: horizon, dr and dt must all be positive");
    // the bump must fit in both domains; mode boxes resolve per domain
    const init_spec init = parse_init(cv.child("init"), "config.init", first, p.jpow);
    if (init.is_bump &&
        (init.lo < second.inner_radius() || init.hi > second.outer_radius()))
        fail(errc::bad_config, "config.init.support: must also fit inside domain_second");
    bool first_from_config = false;
    const auto window_first = parse_fit_window(cv, first, p.horizon, first_from_config);
    const auto window_second =
        first_from_config ? window_first : default_fit_window(second, p.horizon);
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"domain_first", first_path.generic_string()},
                         {"domain_second", second_path.generic_string()},
                         {"equation", p.equation},
                         {"ell", p.ell},
                         {"init", init.echo},
                         {"horizon", p.horizon},
                         {"dr", p.dr},
                         {"dt", p.dt},
                         {"fit_window_first", {window_first.first, window_first.second}},
                         {"fit_window_second", {window_second.first, window_second.second}},
                         {"fit_window_source", first_from_config ? "config" : "default"}};
    plan.run = [first, second, p, init, window_first, window_second](
                   const fs::path& out, std::vector<std::string>& files) {
        const auto trace_first = run_evolution(first, p, init);
        const auto trace_second = run_evolution(second, p, init);
        const auto fit_first = evolve::fit_decay(trace_first, window_first.first, window_first.second);
        const auto fit_second =
            evolve::fit_decay(trace_second, window_second.first, window_second.second);
        std::string csv = "rate_first,r_squared_first,rate_second,r_squared_second,ratio_first_to_second";
        csv += kCrlf;
        csv += io::format_number(fit_first.rate) + "," + io::format_number(fit_first.r_squared) +
               "," + io::format_number(fit_second.rate) + "," +
               io::format_number(fit_second.r_squared) + "," +
               io::format_number(fit_first.rate / fit_second.rate);
        csv += kCrlf;
        write_output(out, "decay_compare.csv", csv, files);
        write_output(out, "trace_first.csv", io::trace_csv(trace_first), files);
        write_output(out, "trace_second.csv", io::trace_csv(trace_second), files);
        return 0;
    };
    return plan;
}

job_plan plan_dtn_exponent(const json& cfg) {
    config_view cv(cfg, "config");
    const double speed = cv.number("speed");
    const double radius = cv.number("radius");
    const auto lambdas = cv.numbers("lambdas");
    if (!(speed > 0.0) || !(radius > 0.0))
        fail(errc::bad_config, "config: speed and radius must be positive");
    if (lambdas.size() < 4)
        fail(errc::bad_config, "config.lambdas: need at least 4 frequencies");
    double lo = lambdas[0], hi = lambdas[0];
    for (double l : lambdas) {
        if (!(l > 0.0)) fail(errc::bad_config, "config.lambdas: frequencies must be positive");
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    if (hi < 4.0 * lo)
        fail(errc::bad_config, "config.lambdas: need max/min >= 4 to resolve the exponent");
    cv.finish();

    job_plan plan;
    plan.resolved = json{{"speed", speed}, {"radius", radius}, {"lambdas", lambdas}};
    plan.run = [speed, radius, lambdas](const fs::path& out, std::vector<std::string>& files) {
        const auto fit = resolvent::glancing_exponent(speed, radius, lambdas);
        const json report{{"slope", fit.slope}, {"r_squared", fit.r_squared}};
        write_output(out, "dtn_exponent.json", report.dump(2) + "\n", files);
        std::string csv = "lambda,s";
        csv += kCrlf;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            csv += io::format_number(lambdas[i]) + "," + io::format_number(fit.s[i]);
            csv += kCrlf;
        }
        write_output(out, "dtn_points.csv", csv, files);
        return 0;
    };
    return plan;
}

job_plan make_plan(const job_request& req) {
    const json cfg = parse_json_text(io::read_text_file(req.config), req.config.generic_string());
    const fs::path base = req.config.parent_path();
    if (req.kind == "validate") return plan_validate(cfg, base);
    if (req.kind == "spectrum") return plan_spectrum(cfg, base, req.threads);
    if (req.kind == "sweep") return plan_sweep(cfg, base, req.threads);
    if (req.kind == "exterior-sweep") return plan_exterior_sweep(cfg, base, req.threads);
    if (req.kind == "evolve") return plan_evolve(cfg, base);
    if (req.kind == "decay-compare") return plan_decay_compare(cfg, base);
    if (req.kind == "dtn-exponent") return plan_dtn_exponent(cfg);
    std::string kinds;
    for (const auto& k : job_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
    fail(errc::bad_config, "unknown job kind \"" + req.kind + "\"; expected one of: " + kinds);
}

}  // namespace

const std::vector<std::string>& job_kinds() {
    static const std::vector<std::string> kinds = {"validate",       "spectrum", "sweep",
                                                   "exterior-sweep", "evolve",   "decay-compare",
                                                   "dtn-exponent"};
    return kinds;
}

int run_job(const job_request& req) {
    job_plan plan;
    try {
        plan = make_plan(req);
    } catch (const error& e) {
        std::cerr << "layerspec " << req.kind << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "layerspec " << req.kind << ": " << e.what() << "\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> files;
    int code = 0;
    try {
        std::error_code ec;
        fs::create_directories(req.out_dir, ec);  // "." reports an ec, harmlessly
        code = plan.run(req.out_dir, files);
    } catch (const error& e) {
        std::cerr << "layerspec " << req.kind << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "layerspec " << req.kind << ": " << e.what() << "\n";
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["job"] = req.kind;
    manifest["outputs"] = files;
    manifest["resolved"] = plan.resolved;
    manifest["threads"] = req.threads;
    manifest["tool"] = "layerspec";
    manifest["version"] = tool_version;
    manifest["wall_seconds"] = wall;
    try {
        io::write_file_atomic(req.out_dir / "run_manifest.json", manifest.dump(2) + "\n");
    } catch (const error& e) {
        std::cerr << "layerspec " << req.kind << ": " << e.what() << "\n";
        return 2;
    }

    for (const auto& name : files)
        std::cout << (req.out_dir / name).generic_string() << "\n";
    return code;
}

}  // namespace layerspec::jobs
