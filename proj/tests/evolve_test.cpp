// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "layerspec/domain.hpp"
#include "layerspec/errors.hpp"
#include "layerspec/evolve.hpp"
#include "layerspec/resolvent.hpp"
#include "layerspec/spectral.hpp"

using namespace layerspec;
using namespace layerspec::evolve;

namespace {

layered_domain ref_mono(double a0) {
    layered_domain d;
    d.radii = {1.0, 2.0, 3.0};
    d.speeds = {2.0, 1.0};
    d.a0 = a0;
    d.inner_bc = inner_bc_kind::dirichlet;
    return d;
}

layered_domain single_layer(double a0) {
    layered_domain d;
    d.radii = {1.0, 2.0};
    d.speeds = {1.0};
    d.a0 = a0;
    d.inner_bc = inner_bc_kind::dirichlet;
    return d;
}

// smooth compactly supported bump on (a, b), zero outside
double bump(double r, double a, double b) {
    const double x = (r - a) / (b - a);
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(4.0 - 1.0 / (x * (1.0 - x)));
}

radial_field bump_field(const mode_grid& g, double a, double b) {
    radial_field f;
    f.grid = g.r;
    f.values.resize(g.r.size());
    for (std::size_t i = 0; i < g.r.size(); ++i) f.values[i] = bump(g.r[i], a, b);
    return f;
}

radial_field zero_field(const mode_grid& g) {
    radial_field f;
    f.grid = g.r;
    f.values.assign(g.r.size(), cdouble{0.0, 0.0});
    return f;
}

// root with the smallest Im(value) in the box, i.e. the slowest-decaying mode
spectral::root_record slowest_root(const layered_domain& d, int j, int ell,
                                   const spectral::search_box& box) {
    const auto sp = spectral::find_roots(d, mode_problem{j, ell}, box, {});
    REQUIRE(!sp.roots.empty());
    return *std::min_element(sp.roots.begin(), sp.roots.end(),
                             [](const auto& a, const auto& b) {
                                 return a.value.imag() < b.value.imag();
                             });
}

std::optional<errc> thrown_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const error& e) {
        return e.code;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("fit_decay recovers a pure exponential exactly") {
    energy_trace tr;
    for (int k = 0; k <= 200; ++k) {
        const double t = 0.05 * k;
        tr.times.push_back(t);
        tr.energy.push_back(3.0 * std::exp(-0.7 * t));
    }
    const decay_fit fit = fit_decay(tr, 0.0, 10.0);
    CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.window_start == doctest::Approx(0.0));
    CHECK(fit.window_end == doctest::Approx(10.0));
    CHECK(!fit.degenerate);
}

TEST_CASE("fit_decay isolates the slow branch in a late window") {
    energy_trace tr;
    for (int k = 0; k <= 900; ++k) {
        const double t = 0.1 * k;
        tr.times.push_back(t);
        tr.energy.push_back(std::exp(-t) + 1e-3 * std::exp(-0.1 * t));
    }
    const decay_fit fit = fit_decay(tr, 60.0, 90.0);
    CHECK(fit.rate == doctest::Approx(0.1).epsilon(0.05));
    CHECK(fit.r_squared > 0.99);
    CHECK(fit.window_start == doctest::Approx(60.0));
    CHECK(fit.window_end == doctest::Approx(90.0));
}

TEST_CASE("fit_decay flags a constant trace as degenerate") {
    energy_trace tr;
    for (int k = 0; k < 50; ++k) {
        tr.times.push_back(0.1 * k);
        tr.energy.push_back(2.5);
    }
    const decay_fit fit = fit_decay(tr, 0.0, 5.0);
    CHECK(fit.degenerate);
    CHECK(fit.rate == 0.0);
    CHECK(fit.r_squared == 0.0);
}

TEST_CASE("fit_decay input validation") {
    energy_trace tr;
    for (int k = 0; k < 20; ++k) {
        tr.times.push_back(0.1 * k);
        tr.energy.push_back(std::exp(-0.1 * k));
    }
    CHECK(thrown_code([&] { fit_decay(tr, 0.0, 0.25); }) == errc::window_too_short);
    CHECK(thrown_code([&] { fit_decay(tr, 1.0, 0.5); }) == errc::bad_config);

    energy_trace neg = tr;
    neg.energy[5] = 0.0;
    CHECK(thrown_code([&] { fit_decay(neg, 0.0, 1.9); }) == errc::nonpositive_energy);

    energy_trace ragged = tr;
    ragged.energy.pop_back();
    CHECK(thrown_code([&] { fit_decay(ragged, 0.0, 1.9); }) == errc::bad_config);
}

TEST_CASE("schrodinger run conserves the norm without dissipation") {
    const layered_domain d = single_layer(0.0);
    const mode_grid g = make_mode_grid_dr(d, 2e-3);
    const radial_field init = bump_field(g, 1.2, 1.8);
    const schrodinger_run run = evolve_schrodinger(d, 1, init, 1.0, 2e-3, 1e-3);
    const double e0 = run.trace.energy.front();
    REQUIRE(e0 > 0.0);
    for (const double e : run.trace.energy) CHECK(std::abs(e - e0) <= 1e-10 * e0);
    CHECK(run.trace.boundary_flux.empty());
    CHECK(run.final_value.grid.size() == g.r.size());
}

TEST_CASE("schrodinger run contracts the norm step by step with dissipation") {
    const layered_domain d = single_layer(1.0);
    const mode_grid g = make_mode_grid_dr(d, 2e-3);
    const radial_field init = bump_field(g, 1.2, 1.8);
    const schrodinger_run run = evolve_schrodinger(d, 0, init, 2.0, 2e-3, 1e-3);
    const auto& en = run.trace.energy;
    for (std::size_t k = 1; k < en.size(); ++k) CHECK(en[k] <= en[k - 1] * (1.0 + 1e-12));
    CHECK(en.back() < 0.9 * en.front());
}

TEST_CASE("schrodinger mode decays at twice the eigenvalue's imaginary part") {
    const layered_domain d = ref_mono(1.0);
    const spectral::root_record root =
        slowest_root(d, 0, 0, spectral::search_box{0.8, 8.0, 0.0, 3.0});
    const mode_grid g = make_mode_grid_dr(d, 2e-3);
    const radial_field init = spectral::mode_shape(d, mode_problem{0, 0}, root.lambda, g);
    const double horizon = 2.0 / root.value.imag();
    const schrodinger_run run = evolve_schrodinger(d, 0, init, horizon, 2e-3, 1e-3);
    const decay_fit fit = fit_decay(run.trace, 0.0, horizon);
    // the trace is ||u||_H^2, which decays at 2 Im z for the pure mode
    CHECK(fit.rate / 2.0 == doctest::Approx(root.value.imag()).epsilon(0.10));
    CHECK(fit.r_squared > 0.999);
}

TEST_CASE("wave run conserves energy without dissipation: one layer") {
    const layered_domain d = single_layer(0.0);
    const mode_grid g = make_mode_grid_dr(d, 1e-3);
    const radial_field init = bump_field(g, 1.1, 1.9);
    const wave_run run = evolve_wave(d, 0, init, zero_field(g), 5.0, 1e-3, 0.9e-3);
    const double e0 = run.trace.energy.front();
    REQUIRE(e0 > 0.0);
    for (const double e : run.trace.energy) CHECK(std::abs(e - e0) <= 1e-4 * e0);
    for (const double f : run.trace.boundary_flux) CHECK(f == 0.0);
}

TEST_CASE("wave run conserves energy without dissipation: two layers, ell=2") {
    const layered_domain d = ref_mono(0.0);
    const mode_grid g = make_mode_grid_dr(d, 1e-3);
    const radial_field init = bump_field(g, 1.1, 1.9);
    const wave_run run = evolve_wave(d, 2, init, zero_field(g), 4.5, 1e-3, 4.5e-4);
    const double e0 = run.trace.energy.front();
    REQUIRE(e0 > 0.0);
    for (const double e : run.trace.energy) CHECK(std::abs(e - e0) <= 1e-4 * e0);
}

TEST_CASE("wave run satisfies the discrete energy balance with dissipation") {
    const layered_domain d = ref_mono(1.0);
    const mode_grid g = make_mode_grid_dr(d, 1e-3);
    const radial_field init = bump_field(g, 1.1, 1.9);
    const double dt = 4.5e-4;
    const wave_run run = evolve_wave(d, 0, init, zero_field(g), 3.0, 1e-3, dt);
    const auto& tr = run.trace;
    REQUIRE(tr.boundary_flux.size() == tr.energy.size());
    const double e0 = tr.energy.front();
    for (std::size_t k = 0; k + 1 < tr.energy.size(); ++k) {
        const double residual = tr.energy[k + 1] - tr.energy[k] + dt * tr.boundary_flux[k];
        CHECK(std::abs(residual) < 1e-6 * e0);
    }
    CHECK(tr.boundary_flux.back() == 0.0);
    CHECK(tr.energy.back() < tr.energy.front());
}

TEST_CASE("wave mode on two layers decays at twice the resonance width") {
    const layered_domain d = ref_mono(1.0);
    const spectral::root_record root =
        slowest_root(d, 1, 0, spectral::search_box{3.0, 9.0, 0.0, 2.5});
    const mode_grid g = make_mode_grid_dr(d, 2e-3);
    const radial_field value = spectral::mode_shape(d, mode_problem{1, 0}, root.lambda, g);
    radial_field velocity = value;
    for (auto& v : velocity.values) v *= cdouble{0.0, 1.0} * root.lambda;
    const wave_run run = evolve_wave(d, 0, value, velocity, 12.0, 2e-3, 9e-4);
    // single complex mode: the energy decays monotonically, no flux nulls
    const auto& en = run.trace.energy;
    for (std::size_t k = 1; k < en.size(); ++k) CHECK(en[k] <= en[k - 1] * (1.0 + 1e-10));
    const decay_fit fit = fit_decay(run.trace, 6.0, 12.0);
    CHECK(fit.rate == doctest::Approx(2.0 * root.lambda.imag()).epsilon(0.10));
    CHECK(fit.r_squared > 0.999);
}

TEST_CASE("wave mode on one layer decays at twice the resonance width") {
    const layered_domain d = single_layer(1.0);
    const spectral::root_record root =
        slowest_root(d, 1, 0, spectral::search_box{2.0, 8.0, 0.0, 2.5});
    const mode_grid g = make_mode_grid_dr(d, 2e-3);
    const radial_field value = spectral::mode_shape(d, mode_problem{1, 0}, root.lambda, g);
    radial_field velocity = value;
    for (auto& v : velocity.values) v *= cdouble{0.0, 1.0} * root.lambda;
    const wave_run run = evolve_wave(d, 0, value, velocity, 6.0, 2e-3, 9e-4);
    const decay_fit fit = fit_decay(run.trace, 2.0, 6.0);
    CHECK(fit.rate == doctest::Approx(2.0 * root.lambda.imag()).epsilon(0.10));
}

TEST_CASE("wave integrator converges at second order") {
    const layered_domain d = single_layer(1.0);
    const double horizon = 0.75;
    const double ref_dr = 2.5e-4;
    auto run_at = [&](double dr) {
        const mode_grid g = make_mode_grid_dr(d, dr);
        const radial_field init = bump_field(g, 1.05, 1.95);
        const double h = g.r[1] - g.r[0];
        const double dt = horizon / std::ceil(horizon / (0.9 * h / d.speeds[0]));
        return evolve_wave(d, 2, init, zero_field(g), horizon, dr, dt);
    };
    const wave_run ref = run_at(ref_dr);
    auto err_vs_ref = [&](const wave_run& run) {
        const std::size_t stride = (ref.final_value.grid.size() - 1) / (run.final_value.grid.size() - 1);
        double worst = 0.0;
        for (std::size_t i = 0; i < run.final_value.grid.size(); ++i) {
            REQUIRE(ref.final_value.grid[i * stride] ==
                    doctest::Approx(run.final_value.grid[i]).epsilon(1e-12));
            worst = std::max(worst,
                             std::abs(run.final_value.values[i] - ref.final_value.values[i * stride]));
        }
        return worst;
    };
    const double coarse = err_vs_ref(run_at(2e-3));
    const double fine = err_vs_ref(run_at(1e-3));
    CHECK(coarse / fine > 3.2);
    CHECK(coarse / fine < 4.8);
}

TEST_CASE("wave run input validation") {
    const layered_domain d = single_layer(0.0);
    const mode_grid g = make_mode_grid_dr(d, 1e-2);
    const radial_field init = bump_field(g, 1.2, 1.8);
    const radial_field vel = zero_field(g);

    CHECK(thrown_code([&] { evolve_wave(d, 0, init, vel, 1.0, 1e-2, 2e-2); }) ==
          errc::cfl_violation);
    CHECK(thrown_code([&] { evolve_wave(d, -1, init, vel, 1.0, 1e-2, 5e-3); }) ==
          errc::bad_config);

    radial_field wrong = bump_field(make_mode_grid_dr(d, 2e-2), 1.2, 1.8);
    CHECK(thrown_code([&] { evolve_wave(d, 0, wrong, vel, 1.0, 1e-2, 5e-3); }) ==
          errc::grid_mismatch);

    radial_field poisoned = init;
    poisoned.values[poisoned.values.size() / 2] = cdouble{std::nan(""), 0.0};
    CHECK(thrown_code([&] { evolve_wave(d, 0, poisoned, vel, 1.0, 1e-2, 5e-3); }) ==
          errc::unstable_run);
}

TEST_CASE("exterior run: sharp wavefronts leave a ball cleanly") {
    exterior_domain e;
    e.radii = {1.0};
    e.speeds = {1.0};
    e.inner_bc = inner_bc_kind::dirichlet;
    const double dr = 1.0 / 128.0;
    const double window = 13.0;
    const layered_domain view = bounded_window(e, window);
    const mode_grid g = make_mode_grid_dr(view, dr);
    const radial_field init = bump_field(g, 1.5, 2.5);
    // unit Courant number: the interior update is the exact lattice transport
    const energy_trace tr =
        evolve_exterior_l0(e, 0, init, zero_field(g), 8.0, 3.0, window, dr, dr);
    CHECK(tr.boundary_flux.empty());
    const double e0 = tr.energy.front();
    REQUIRE(e0 > 0.0);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        if (tr.times[k] < 0.45) CHECK(std::abs(tr.energy[k] - e0) <= 1e-10 * e0);
        if (tr.times[k] >= 6.0) CHECK(tr.energy[k] <= 1e-8 * e0);
    }
}

TEST_CASE("exterior run: layered scattering leaves an exponential tail") {
    exterior_domain e;
    e.radii = {1.0, 2.0, 3.0};
    e.speeds = {2.0, 1.0, 1.0};
    e.inner_bc = inner_bc_kind::dirichlet;
    const double window = 9.0;
    const layered_domain view = bounded_window(e, window);
    const mode_grid g = make_mode_grid_dr(view, 2e-3);
    // start inside the fast inner shell; the [1,2] cavity then leaks a pulse
    // train through the speed jump at r=2, one drop per round trip
    const radial_field init = bump_field(g, 1.2, 1.9);
    const energy_trace tr =
        evolve_exterior_l0(e, 0, init, zero_field(g), 10.5, 5.0, window, 2e-3, 1e-3);
    // fit after the initial content has left r<=5 and before anything
    // re-enters from the far side of the computational window
    const decay_fit fit = fit_decay(tr, 4.0, 10.0);
    CHECK(fit.rate > 0.5);
    CHECK(fit.r_squared >= 0.95);
    CHECK(tr.energy.back() < 1e-2 * tr.energy.front());
}

TEST_CASE("exterior run input validation") {
    exterior_domain e;
    e.radii = {1.0};
    e.speeds = {1.0};
    e.inner_bc = inner_bc_kind::dirichlet;
    const double dr = 1.0 / 64.0;
    const layered_domain view = bounded_window(e, 9.0);
    const mode_grid g = make_mode_grid_dr(view, dr);
    const radial_field init = bump_field(g, 1.5, 2.5);
    const radial_field vel = zero_field(g);

    CHECK(thrown_code([&] { evolve_exterior_l0(e, 1, init, vel, 1.0, 3.0, 9.0, dr, dr); }) ==
          errc::unsupported_mode);
    CHECK(thrown_code([&] { evolve_exterior_l0(e, 0, init, vel, 1.0, 2.0, 9.0, dr, dr); }) ==
          errc::bad_config);  // support sticks out past the local radius
    CHECK(thrown_code([&] { evolve_exterior_l0(e, 0, init, vel, 1.0, 9.5, 9.0, dr, dr); }) ==
          errc::bad_config);
    CHECK(thrown_code([&] { evolve_exterior_l0(e, 0, init, vel, 1.0, 3.0, 9.0, dr, 2.0 * dr); }) ==
          errc::cfl_violation);
}

TEST_CASE("wave run returns final fields on the run grid; zero data stays zero") {
    const layered_domain d = single_layer(0.5);
    const mode_grid g = make_mode_grid_dr(d, 5e-3);
    const wave_run run = evolve_wave(d, 1, zero_field(g), zero_field(g), 0.5, 5e-3, 2e-3);
    CHECK(run.final_value.grid == g.r);
    CHECK(run.final_velocity.grid == g.r);
    for (const auto& v : run.final_value.values) CHECK(std::abs(v) == 0.0);
    for (const double e : run.trace.energy) CHECK(e == 0.0);
}

// With the slow shell inside (c1 < c2) a high-degree mode is totally
// internally reflected at the interface and only tunnels out through the
// fast shell, so its decay nearly stalls; swapping the speeds back removes
// the barrier and the same data drains at an O(1) rate.
TEST_CASE("reversed speeds trap a quasi-mode and stall the wave decay") {
    const layered_domain mono = ref_mono(1.0);
    layered_domain rev = mono;
    rev.speeds = {1.0, 2.0};
    const int ell = 10;
    const double dr = 1e-3, dt = 4.5e-4, horizon = 12.0;
    const mode_grid g = make_mode_grid_dr(mono, dr);
    const radial_field v0 = bump_field(g, 1.2, 1.9);
    const radial_field w0 = zero_field(g);

    const wave_run run_mono = evolve_wave(mono, ell, v0, w0, horizon, dr, dt);
    const wave_run run_rev = evolve_wave(rev, ell, v0, w0, horizon, dr, dt);
    const decay_fit fit_mono = fit_decay(run_mono.trace, 8.0, 12.0);
    const decay_fit fit_rev = fit_decay(run_rev.trace, 8.0, 12.0);

    CHECK(fit_mono.rate > 0.5);
    CHECK(fit_mono.rate >= 20.0 * fit_rev.rate);
}
