// SPDX-License-Identifier: Apache-2.0
#include "layerspec/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace layerspec {

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
}

double layered_domain::min_speed() const {
    return *std::min_element(speeds.begin(), speeds.end());
}

double layered_domain::max_speed() const {
    return *std::max_element(speeds.begin(), speeds.end());
}

double layered_domain::speed_at(double r) const {
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (r < radii[k + 1] || k + 2 == radii.size())
            return speeds[k];
    return speeds.back();
}

validation_result validate_domain(const layered_domain& d) {
    validation_result res;
    auto add = [&](errc c, const char* field, std::size_t idx, std::string msg) {
        res.violations.push_back({c, field, idx, std::move(msg)});
    };

    if (d.radii.size() < 2)
        add(errc::empty_layers, "radii", npos, "need at least two radii (one shell)");
    if (!d.radii.empty() && d.radii.front() <= 0.0)
        add(errc::non_monotone_radii, "radii", 0, "innermost radius must be positive");
    for (std::size_t i = 0; i + 1 < d.radii.size(); ++i)
        if (!(d.radii[i] < d.radii[i + 1]))
            add(errc::non_monotone_radii, "radii", i + 1,
                "radii must be strictly increasing at index " + std::to_string(i + 1));
    for (std::size_t i = 0; i < d.speeds.size(); ++i)
        if (!(d.speeds[i] > 0.0) || !std::isfinite(d.speeds[i]))
            add(errc::non_positive_speed, "speeds", i,
                "speed at index " + std::to_string(i) + " must be positive");
    if (!d.radii.empty() && d.speeds.size() + 1 != d.radii.size())
        add(errc::empty_layers, "speeds", npos,
            "expected " + std::to_string(d.radii.size() >= 1 ? d.radii.size() - 1 : 0) +
                " speeds, got " + std::to_string(d.speeds.size()));
    if (!(d.a0 >= 0.0) || !std::isfinite(d.a0))
        add(errc::negative_dissipation, "a0", npos, "a0 must be finite and >= 0");
    return res;
}

layered_domain checked_domain(layered_domain d) {
    auto res = validate_domain(d);
    if (!res.ok()) fail(res.violations.front().code, res.violations.front().message);
    return d;
}

bool speeds_monotone(const layered_domain& d) {
    for (std::size_t i = 0; i + 1 < d.speeds.size(); ++i)
        if (!(d.speeds[i] > d.speeds[i + 1])) return false;
    return true;
}

static mode_grid build_grid(const layered_domain& d, const std::vector<std::size_t>& cells) {
    mode_grid g;
    g.r.push_back(d.radii.front());
    for (std::size_t k = 0; k + 1 < d.radii.size(); ++k) {
        const double a = d.radii[k], b = d.radii[k + 1];
        const double h = (b - a) / double(cells[k]);
        for (std::size_t i = 1; i <= cells[k]; ++i) {
            g.r.push_back(i == cells[k] ? b : a + h * double(i));
            g.shell_of.push_back(k);
        }
    }
    g.trapezoid_w.assign(g.r.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.r.size(); ++i) {
        const double h = g.r[i + 1] - g.r[i];
        g.trapezoid_w[i] += 0.5 * h;
        g.trapezoid_w[i + 1] += 0.5 * h;
    }
    return g;
}

mode_grid make_mode_grid(const layered_domain& d, std::size_t target_points) {
    const std::size_t m1 = d.speeds.size();
    const double total = d.outer_radius() - d.inner_radius();
    std::vector<std::size_t> cells(m1);
    std::size_t budget = std::max<std::size_t>(target_points, 2 * m1 + 2) - 1;
    for (std::size_t k = 0; k < m1; ++k) {
        const double len = d.radii[k + 1] - d.radii[k];
        cells[k] = std::max<std::size_t>(2, std::size_t(std::lround(double(budget) * len / total)));
    }
    return build_grid(d, cells);
}

mode_grid make_mode_grid_dr(const layered_domain& d, double dr) {
    if (!(dr > 0.0)) fail(errc::bad_config, "grid spacing must be positive");
    const std::size_t m1 = d.speeds.size();
    std::vector<std::size_t> cells(m1);
    for (std::size_t k = 0; k < m1; ++k) {
        const double len = d.radii[k + 1] - d.radii[k];
        cells[k] = std::max<std::size_t>(2, std::size_t(std::lround(len / dr)));
    }
    return build_grid(d, cells);
}

// Split positions of the interfaces inside f.grid; also enforces coverage.
static std::vector<std::size_t> interface_nodes(const layered_domain& d, const radial_field& f) {
    if (f.grid.size() != f.values.size() || f.grid.size() < 2)
        fail(errc::grid_mismatch, "field grid and values must match and hold >= 2 nodes");
    const double tol = 1e-12 * d.outer_radius();
    std::vector<std::size_t> cut;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < d.radii.size(); ++k) {
        while (pos < f.grid.size() && f.grid[pos] < d.radii[k] - tol) ++pos;
        if (pos >= f.grid.size() || std::abs(f.grid[pos] - d.radii[k]) > tol)
            fail(errc::grid_mismatch,
                 "field grid must contain radius " + std::to_string(d.radii[k]) + " as a node");
        cut.push_back(pos);
    }
    if (cut.front() != 0 || cut.back() + 1 != f.grid.size())
        fail(errc::grid_mismatch, "field grid must cover exactly [r0, r_out]");
    return cut;
}

double h_norm_mode(const layered_domain& d, const radial_field& f) {
    const auto cut = interface_nodes(d, f);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cut.size(); ++k) {
        const double invc2 = 1.0 / (d.speeds[k] * d.speeds[k]);
        for (std::size_t i = cut[k]; i < cut[k + 1]; ++i) {
            const double h = f.grid[i + 1] - f.grid[i];
            const double gi = std::norm(f.values[i]) * f.grid[i] * f.grid[i];
            const double gj = std::norm(f.values[i + 1]) * f.grid[i + 1] * f.grid[i + 1];
            acc += 0.5 * h * (gi + gj) * invc2;
        }
    }
    return acc;
}

// Second-order derivative samples on one shell [lo, hi] of a uniform-spacing
// piece; one-sided at the shell edges so interface kinks never smear.
static void shell_derivative(const radial_field& f, std::size_t lo, std::size_t hi,
                             std::vector<cdouble>& df) {
    const double h = f.grid[lo + 1] - f.grid[lo];
    for (std::size_t i = lo; i <= hi; ++i) {
        if (i == lo)
            df[i] = (-3.0 * f.values[i] + 4.0 * f.values[i + 1] - f.values[i + 2]) / (2.0 * h);
        else if (i == hi)
            df[i] = (3.0 * f.values[i] - 4.0 * f.values[i - 1] + f.values[i - 2]) / (2.0 * h);
        else
            df[i] = (f.values[i + 1] - f.values[i - 1]) / (2.0 * h);
    }
}

double energy_norm_mode(const layered_domain& d, const radial_field& f,
                        const radial_field& f_t, int ell) {
    if (f_t.grid != f.grid)
        fail(errc::grid_mismatch, "field and time-derivative grids differ");
    const auto cut = interface_nodes(d, f);
    const double ll1 = double(ell) * double(ell + 1);
    std::vector<cdouble> df(f.grid.size());
    for (std::size_t k = 0; k + 1 < cut.size(); ++k)
        shell_derivative(f, cut[k], cut[k + 1], df);

    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cut.size(); ++k) {
        const double invc2 = 1.0 / (d.speeds[k] * d.speeds[k]);
        auto density = [&](std::size_t i) {
            const double r2 = f.grid[i] * f.grid[i];
            double v = std::norm(df[i]) * r2 + std::norm(f_t.values[i]) * r2 * invc2;
            if (ll1 > 0.0) v += ll1 * std::norm(f.values[i]);
            return v;
        };
        for (std::size_t i = cut[k]; i < cut[k + 1]; ++i)
            acc += 0.5 * (f.grid[i + 1] - f.grid[i]) * (density(i) + density(i + 1));
    }
    return acc;
}

std::string domain_to_json(const layered_domain& d) {
    nlohmann::json j;
    j["radii"] = d.radii;
    j["speeds"] = d.speeds;
    j["a0"] = d.a0;
    j["inner_bc"] = d.inner_bc == inner_bc_kind::dirichlet ? "dirichlet" : "neumann";
    return j.dump(2);
}

layered_domain domain_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail(errc::bad_config, std::string("domain JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) fail(errc::bad_config, "domain JSON must be an object");
    for (auto& [key, val] : j.items()) {
        (void)val;
        if (key != "radii" && key != "speeds" && key != "a0" && key != "inner_bc")
            fail(errc::bad_config, "unknown domain key \"" + key + "\"");
    }
    for (const char* key : {"radii", "speeds", "a0", "inner_bc"})
        if (!j.contains(key)) fail(errc::bad_config, std::string("missing domain key \"") + key + "\"");

    layered_domain d;
    try {
        d.radii = j["radii"].get<std::vector<double>>();
        d.speeds = j["speeds"].get<std::vector<double>>();
        d.a0 = j["a0"].get<double>();
    } catch (const std::exception& e) {
        fail(errc::bad_config, std::string("domain JSON type error: ") + e.what());
    }
    const std::string bc = j["inner_bc"].get<std::string>();
    if (bc == "dirichlet")
        d.inner_bc = inner_bc_kind::dirichlet;
    else if (bc == "neumann")
        d.inner_bc = inner_bc_kind::neumann;
    else
        fail(errc::bad_config, "inner_bc must be \"dirichlet\" or \"neumann\", got \"" + bc + "\"");
    return d;
}

const char* errc_name(errc c) {
    switch (c) {
        case errc::non_monotone_radii: return "NonMonotoneRadii";
        case errc::non_positive_speed: return "NonPositiveSpeed";
        case errc::negative_dissipation: return "NegativeDissipation";
        case errc::empty_layers: return "EmptyLayers";
        case errc::bad_config: return "BadConfig";
        case errc::grid_mismatch: return "GridMismatch";
        case errc::overflow_risk: return "OverflowRisk";
        case errc::invalid_box: return "InvalidBox";
        case errc::contour_near_root: return "ContourNearRoot";
        case errc::nonconverged_newton: return "NonConvergedNewton";
        case errc::near_eigenvalue: return "NearEigenvalue";
        case errc::power_iteration_stall: return "PowerIterationStall";
        case errc::tail_not_decreasing: return "TailNotDecreasing";
        case errc::nonpositive_max: return "NonPositiveMax";
        case errc::cfl_violation: return "CflViolation";
        case errc::unstable_run: return "UnstableRun";
        case errc::solve_failure: return "SolveFailure";
        case errc::unsupported_mode: return "UnsupportedMode";
        case errc::window_too_short: return "WindowTooShort";
        case errc::nonpositive_energy: return "NonPositiveEnergy";
        case errc::unknown_style: return "UnknownStyle";
        case errc::io_failure: return "IoFailure";
    }
    return "Unknown";
}

} // namespace layerspec
