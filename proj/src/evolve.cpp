// SPDX-License-Identifier: Apache-2.0
#include "layerspec/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "layerspec/errors.hpp"
#include "layerspec/kernels.hpp"

namespace layerspec::evolve {

namespace {

// Grid with the interface bookkeeping the steppers need: cuts[k] is the first
// node of shell k (cuts.back() the last node overall), h[k] the uniform
// spacing inside shell k.
struct run_grid {
    mode_grid g;
    std::vector<std::size_t> cuts;
    std::vector<double> h;
};

run_grid build_run_grid(mode_grid g) {
    run_grid rg;
    rg.cuts.push_back(0);
    for (std::size_t i = 1; i < g.shell_of.size(); ++i)
        if (g.shell_of[i] != g.shell_of[i - 1]) rg.cuts.push_back(i);
    rg.cuts.push_back(g.r.size() - 1);
    for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k) {
        rg.h.push_back(g.r[rg.cuts[k] + 1] - g.r[rg.cuts[k]]);
        if (rg.cuts[k + 1] - rg.cuts[k] < 4)
            fail(errc::bad_config, "grid spacing too coarse: every shell needs >= 4 cells");
    }
    rg.g = std::move(g);
    return rg;
}

void require_same_grid(const radial_field& f, const std::vector<double>& r, const char* which) {
    if (f.grid.size() != r.size() || f.values.size() != r.size())
        fail(errc::grid_mismatch, std::string(which) + " is not sampled on the run grid");
    const double tol = 1e-12 * r.back();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (std::abs(f.grid[i] - r[i]) > tol)
            fail(errc::grid_mismatch, std::string(which) + " is not sampled on the run grid");
}

double min_cell_transit(const run_grid& rg, const std::vector<double>& speeds) {
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rg.h.size(); ++k) b = std::min(b, rg.h[k] / speeds[k]);
    return b;
}

std::size_t step_count(double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) fail(errc::bad_config, "horizon and dt must be positive");
    const double raw = horizon / dt;
    if (raw > 2e7) fail(errc::bad_config, "run would need more than 2e7 steps");
    auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return n < 1 ? 1 : n;
}

// One real plane of a complex field; the schemes have real coefficients, so
// the two planes never couple and can share every code path.
struct field2 {
    std::vector<double> re, im;
    explicit field2(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
};

void load_scaled(const radial_field& f, const std::vector<double>& r, double s, field2& out) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        out.re[i] = f.values[i].real() * r[i] * s;
        out.im[i] = f.values[i].imag() * r[i] * s;
    }
}

// Finite-volume row for the nodes the plain leapfrog kernel cannot update:
// interfaces, the outer sphere, and a Neumann inner wall. Each is the
// half-cell balance m v_tt + damp v_t + (A v) = 0 with
// (A v)_i = dia * v_i - wl * v_{i-1} - wr * v_{i+1}; boundary fluxes from the
// physical rows (v_r = v/r - a0 v_t outside, v_r = v/r inside) land in dia
// and damp. A is symmetric, so away from damping the update conserves the
// staggered leapfrog energy exactly; uniform interiors reduce to the kernel.
struct fv_row {
    std::size_t node;
    double wl = 0.0, wr = 0.0;  // 1/h toward each side, 0 when absent
    double dia = 0.0;           // diagonal of the spatial operator
    double damp = 0.0;          // velocity coefficient (a0 on the outer row)
    double p = 0.0;             // mass / dt^2
    double inv_den = 0.0;       // 1 / (p + damp/(2 dt))
    double inv_m = 0.0;
};

fv_row make_fv_row(const run_grid& rg, const std::vector<double>& speeds, std::size_t node,
                   double ll1, double dt) {
    const auto& r = rg.g.r;
    fv_row row;
    row.node = node;
    double mass = 0.0, tau = 0.0;
    if (node > 0) {
        const std::size_t k = rg.g.shell_of[node - 1];
        row.wl = 1.0 / rg.h[k];
        mass += 0.5 * rg.h[k] / (speeds[k] * speeds[k]);
        tau += 0.5 * rg.h[k];
    }
    if (node + 1 < r.size()) {
        const std::size_t k = rg.g.shell_of[node];
        row.wr = 1.0 / rg.h[k];
        mass += 0.5 * rg.h[k] / (speeds[k] * speeds[k]);
        tau += 0.5 * rg.h[k];
    }
    row.dia = row.wl + row.wr + ll1 * tau / (r[node] * r[node]);
    if (node + 1 == r.size()) row.dia -= 1.0 / r[node];  // outgoing flux v/r - a0 v_t
    if (node == 0) row.dia += 1.0 / r[node];             // inner Neumann flux v/r
    row.p = mass / (dt * dt);
    row.inv_den = 1.0 / row.p;
    row.inv_m = 1.0 / mass;
    return row;
}

void set_damping(fv_row& row, double a0, double dt) {
    row.damp = a0;
    row.inv_den = 1.0 / (row.p + a0 / (2.0 * dt));
}

double fv_av(const fv_row& row, const std::vector<double>& v) {
    double a = row.dia * v[row.node];
    if (row.wl != 0.0) a -= row.wl * v[row.node - 1];
    if (row.wr != 0.0) a -= row.wr * v[row.node + 1];
    return a;
}

void apply_fv_rows(const std::vector<fv_row>& rows, const std::vector<double>& cur,
                   const std::vector<double>& old, std::vector<double>& next, double dt) {
    for (const auto& row : rows) {
        const std::size_t i = row.node;
        next[i] = (row.p * (2.0 * cur[i] - old[i]) + (row.damp / (2.0 * dt)) * old[i] -
                   fv_av(row, cur)) *
                  row.inv_den;
    }
}

// second-order start: fold half an acceleration into the ghost level
void seed_fv_rows(const std::vector<fv_row>& rows, const std::vector<double>& val,
                  const std::vector<double>& vel, std::vector<double>& old, double dt) {
    for (const auto& row : rows) {
        const double accel = -(fv_av(row, val) + row.damp * vel[row.node]) * row.inv_m;
        old[row.node] += 0.5 * dt * dt * accel;
    }
}

}  // namespace

wave_run evolve_wave(const layered_domain& d0, int ell, const radial_field& init_value,
                     const radial_field& init_velocity, double horizon, double dr, double dt) {
    const layered_domain d = checked_domain(d0);
    if (ell < 0) fail(errc::bad_config, "angular degree must be >= 0");
    const run_grid rg = build_run_grid(make_mode_grid_dr(d, dr));
    const auto& r = rg.g.r;
    const std::size_t n = r.size();
    require_same_grid(init_value, r, "initial value");
    require_same_grid(init_velocity, r, "initial velocity");

    const double bound = 0.9 * min_cell_transit(rg, d.speeds);
    if (dt > bound * (1.0 + 1e-12))
        fail(errc::cfl_violation,
             "dt = " + std::to_string(dt) + " exceeds 0.9 * min(h/c) = " + std::to_string(bound));
    const std::size_t steps = step_count(horizon, dt);

    // interior leapfrog coefficients; interface/boundary nodes stay zero
    std::vector<double> cl(n, 0.0), cp(n, 0.0);
    const double ll1 = double(ell) * double(ell + 1);
    for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k) {
        const double cdt = d.speeds[k] * dt;
        const double mu2 = (cdt / rg.h[k]) * (cdt / rg.h[k]);
        for (std::size_t i = rg.cuts[k] + 1; i < rg.cuts[k + 1]; ++i) {
            cl[i] = mu2;
            cp[i] = cdt * cdt * ll1 / (r[i] * r[i]);
        }
    }

    const std::size_t nb = n - 1;
    const bool dirichlet = d.inner_bc == inner_bc_kind::dirichlet;
    std::vector<fv_row> rows;
    if (!dirichlet) rows.push_back(make_fv_row(rg, d.speeds, 0, ll1, dt));
    for (std::size_t k = 1; k + 1 < rg.cuts.size(); ++k)
        rows.push_back(make_fv_row(rg, d.speeds, rg.cuts[k], ll1, dt));
    rows.push_back(make_fv_row(rg, d.speeds, nb, ll1, dt));
    set_damping(rows.back(), d.a0, dt);

    field2 vo(n), v(n), vn(n);
    load_scaled(init_value, r, 1.0, v);
    {
        field2 w(n);
        load_scaled(init_velocity, r, 1.0, w);
        for (std::size_t i = 0; i < n; ++i) {
            vo.re[i] = v.re[i] - dt * w.re[i];
            vo.im[i] = v.im[i] - dt * w.im[i];
        }
        // second-order start: fold half an acceleration into the ghost level
        auto seed = [&](const std::vector<double>& val, std::vector<double>& old) {
            for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k)
                for (std::size_t i = rg.cuts[k] + 1; i < rg.cuts[k + 1]; ++i)
                    old[i] += 0.5 * (cl[i] * (val[i - 1] - 2.0 * val[i] + val[i + 1]) - cp[i] * val[i]);
        };
        seed(v.re, vo.re);
        seed(v.im, vo.im);
        seed_fv_rows(rows, v.re, w.re, vo.re, dt);
        seed_fv_rows(rows, v.im, w.im, vo.im, dt);
        if (dirichlet) vo.re[0] = vo.im[0] = 0.0;
    }

    auto advance_plane = [&](const std::vector<double>& cur, const std::vector<double>& old,
                             std::vector<double>& next) {
        for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k)
            kernels::wave_step(next.data(), cur.data(), old.data(), cl.data(), cp.data(),
                               rg.cuts[k] + 1, rg.cuts[k + 1]);
        apply_fv_rows(rows, cur, old, next, dt);
        if (dirichlet) next[0] = 0.0;
    };

    radial_field rf{r, std::vector<cdouble>(n)};
    radial_field rtf{r, std::vector<cdouble>(n)};
    auto sample_energy = [&]() {
        const double inv2dt = 0.5 / dt;
        for (std::size_t i = 0; i < n; ++i) {
            const double invr = 1.0 / r[i];
            rf.values[i] = cdouble(v.re[i], v.im[i]) * invr;
            rtf.values[i] =
                cdouble(vn.re[i] - vo.re[i], vn.im[i] - vo.im[i]) * (inv2dt * invr);
        }
        // physical energy: half the quadratic form, so dE/dt = -boundary_flux
        return 0.5 * energy_norm_mode(d, rf, rtf, ell);
    };

    wave_run out;
    out.trace.times.reserve(steps + 1);
    out.trace.energy.reserve(steps + 1);
    out.trace.boundary_flux.reserve(steps + 1);
    double flux_prev = 0.0;
    for (std::size_t s = 0; s <= steps; ++s) {
        advance_plane(v.re, vo.re, vn.re);
        advance_plane(v.im, vo.im, vn.im);
        const double energy = sample_energy();
        if (!std::isfinite(energy))
            fail(errc::unstable_run, "energy lost finiteness at step " + std::to_string(s));
        if (s > 0) {
            const double prev = out.trace.energy.back();
            if (prev > 1e-300 && energy > prev * (1.0 + 1e-6))
                fail(errc::unstable_run, "energy grew by more than 1e-6 relative at step " +
                                             std::to_string(s));
        }
        // instantaneous dissipated power at this sample, centered in time;
        // the trace entry k is the trapezoid average over [t_k, t_{k+1}],
        // which balances the energy drop between the two samples
        const double dre = (vn.re[nb] - vo.re[nb]) / (2.0 * dt);
        const double dim = (vn.im[nb] - vo.im[nb]) / (2.0 * dt);
        const double flux = d.a0 * (dre * dre + dim * dim);
        out.trace.times.push_back(double(s) * dt);
        out.trace.energy.push_back(energy);
        out.trace.boundary_flux.push_back(0.0);
        if (s > 0) out.trace.boundary_flux[s - 1] = 0.5 * (flux_prev + flux);
        flux_prev = flux;
        if (s == steps) {
            out.final_value = rf;
            out.final_velocity = rtf;
        }
        std::swap(vo, v);
        std::swap(v, vn);
    }
    return out;
}

schrodinger_run evolve_schrodinger(const layered_domain& d0, int ell, const radial_field& init,
                                   double horizon, double dr, double dt) {
    const layered_domain d = checked_domain(d0);
    if (ell < 0) fail(errc::bad_config, "angular degree must be >= 0");
    const run_grid rg = build_run_grid(make_mode_grid_dr(d, dr));
    const auto& r = rg.g.r;
    const std::size_t n = r.size();
    require_same_grid(init, r, "initial value");
    const std::size_t steps = step_count(horizon, dt);
    const double ll1 = double(ell) * double(ell + 1);

    // node weights of the flux-form operator on v = r R: mass carries the
    // 1/c^2 of the evolution inner product, the centrifugal term a plain
    // trapezoid weight
    std::vector<double> mass(n, 0.0), tau(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double h = r[i] - r[i - 1];
            const double c = d.speeds[rg.g.shell_of[i - 1]];
            mass[i] += 0.5 * h / (c * c);
            tau[i] += 0.5 * h;
        }
        if (i + 1 < n) {
            const double h = r[i + 1] - r[i];
            const double c = d.speeds[rg.g.shell_of[i]];
            mass[i] += 0.5 * h / (c * c);
            tau[i] += 0.5 * h;
        }
    }

    // stiffness rows: sub/dia/sup of L, with the dissipative boundary row
    // folded into the last diagonal entry
    std::vector<cdouble> dia(n);
    std::vector<double> off(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -1.0 / (r[i + 1] - r[i]);
    for (std::size_t i = 0; i < n; ++i) {
        double v = ll1 * tau[i] / (r[i] * r[i]);
        if (i > 0) v += 1.0 / (r[i] - r[i - 1]);
        if (i + 1 < n) v += 1.0 / (r[i + 1] - r[i]);
        dia[i] = v;
    }
    dia[n - 1] += cdouble(-1.0 / r.back(), d.a0);
    const bool dirichlet = d.inner_bc == inner_bc_kind::dirichlet;
    if (!dirichlet) dia[0] += 1.0 / r.front();

    // Crank-Nicolson pair P v+ = Q v with P = M - i dt/2 L, Q = M + i dt/2 L
    const cdouble ih(0.0, 0.5 * dt);
    std::vector<cdouble> pd(n), qd(n), po(n - 1), qo(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        pd[i] = mass[i] - ih * dia[i];
        qd[i] = mass[i] + ih * dia[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        po[i] = -ih * off[i];
        qo[i] = ih * off[i];
    }

    std::vector<cdouble> v(n), rhs(n), cp(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = init.values[i] * r[i];
    if (dirichlet) v[0] = 0.0;

    auto weighted_norm = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += mass[i] * std::norm(v[i]);
        return acc;
    };

    schrodinger_run out;
    out.trace.times.reserve(steps + 1);
    out.trace.energy.reserve(steps + 1);
    out.trace.times.push_back(0.0);
    out.trace.energy.push_back(weighted_norm());

    for (std::size_t s = 1; s <= steps; ++s) {
        rhs[0] = dirichlet ? 0.0 : qd[0] * v[0] + qo[0] * v[1];
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = qo[i - 1] * v[i - 1] + qd[i] * v[i] + qo[i] * v[i + 1];
        rhs[n - 1] = qo[n - 2] * v[n - 2] + qd[n - 1] * v[n - 1];

        // Thomas sweep; the Dirichlet wall is the unit row (1, 0 | 0)
        cdouble piv = dirichlet ? cdouble(1.0) : pd[0];
        if (std::abs(piv) < 1e-300) fail(errc::solve_failure, "tridiagonal pivot vanished");
        cp[0] = (dirichlet ? cdouble(0.0) : po[0]) / piv;
        scratch[0] = rhs[0] / piv;
        for (std::size_t i = 1; i < n; ++i) {
            const cdouble sub = po[i - 1];
            piv = pd[i] - sub * cp[i - 1];
            if (std::abs(piv) < 1e-300) fail(errc::solve_failure, "tridiagonal pivot vanished");
            if (i + 1 < n) cp[i] = po[i] / piv;
            scratch[i] = (rhs[i] - sub * scratch[i - 1]) / piv;
        }
        v[n - 1] = scratch[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = scratch[i] - cp[i] * v[i + 1];

        out.trace.times.push_back(double(s) * dt);
        out.trace.energy.push_back(weighted_norm());
    }

    out.final_value.grid = r;
    out.final_value.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.final_value.values[i] = v[i] / r[i];
    return out;
}

energy_trace evolve_exterior_l0(const exterior_domain& e0, int ell, const radial_field& init_value,
                                const radial_field& init_velocity, double horizon,
                                double local_radius, double window_radius, double dr, double dt) {
    const exterior_domain e = checked_exterior(e0);
    if (ell != 0)
        fail(errc::unsupported_mode, "exterior runs cover the spherically symmetric degree only");
    const layered_domain win = bounded_window(e, window_radius);
    const run_grid rg = build_run_grid(make_mode_grid_dr(win, dr));
    const auto& r = rg.g.r;
    const std::size_t n = r.size();
    require_same_grid(init_value, r, "initial value");
    require_same_grid(init_velocity, r, "initial velocity");
    if (!(local_radius > r.front()) || !(local_radius < window_radius))
        fail(errc::bad_config, "local radius must sit inside the window");

    const double tol = 1e-12 * r.back();
    for (std::size_t i = 0; i < n; ++i)
        if (r[i] > local_radius + tol &&
            (std::abs(init_value.values[i]) > 0.0 || std::abs(init_velocity.values[i]) > 0.0))
            fail(errc::bad_config, "initial data must be supported inside the local radius");

    const double bound = min_cell_transit(rg, win.speeds);
    if (dt > bound * (1.0 + 1e-12))
        fail(errc::cfl_violation,
             "dt = " + std::to_string(dt) + " exceeds min(h/c) = " + std::to_string(bound));
    const std::size_t steps = step_count(horizon, dt);

    std::vector<double> cl(n, 0.0);
    const std::vector<double> cp(n, 0.0);
    for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k) {
        const double mu = win.speeds[k] * dt / rg.h[k];
        for (std::size_t i = rg.cuts[k] + 1; i < rg.cuts[k + 1]; ++i) cl[i] = mu * mu;
    }
    const bool dirichlet = win.inner_bc == inner_bc_kind::dirichlet;
    std::vector<fv_row> rows;
    if (!dirichlet) rows.push_back(make_fv_row(rg, win.speeds, 0, 0.0, dt));
    for (std::size_t k = 1; k + 1 < rg.cuts.size(); ++k)
        rows.push_back(make_fv_row(rg, win.speeds, rg.cuts[k], 0.0, dt));

    // outgoing advection row at the window end: exact pass-through when the
    // local Courant number is 1
    const std::size_t nb = n - 1;
    const double mu_b = win.speeds.back() * dt / rg.h.back();
    const double mur = (1.0 - mu_b) / (1.0 + mu_b);

    // local-energy bookkeeping: nodes up to the one nearest local_radius
    std::size_t kcut = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(r[i] - local_radius) < std::abs(r[kcut] - local_radius)) kcut = i;
    std::vector<double> kin_w(kcut + 1, 0.0);
    for (std::size_t i = 0; i <= kcut; ++i) {
        if (i > 0) {
            const double c = win.speeds[rg.g.shell_of[i - 1]];
            kin_w[i] += 0.5 * (r[i] - r[i - 1]) / (c * c);
        }
        if (i < kcut) {
            const double c = win.speeds[rg.g.shell_of[i]];
            kin_w[i] += 0.5 * (r[i + 1] - r[i]) / (c * c);
        }
    }

    field2 vo(n), v(n), vn(n);
    load_scaled(init_value, r, 1.0, v);
    {
        field2 w(n);
        load_scaled(init_velocity, r, 1.0, w);
        for (std::size_t i = 0; i < n; ++i) {
            vo.re[i] = v.re[i] - dt * w.re[i];
            vo.im[i] = v.im[i] - dt * w.im[i];
        }
        auto seed = [&](const std::vector<double>& val, std::vector<double>& old) {
            for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k)
                for (std::size_t i = rg.cuts[k] + 1; i < rg.cuts[k + 1]; ++i)
                    old[i] += 0.5 * cl[i] * (val[i - 1] - 2.0 * val[i] + val[i + 1]);
        };
        seed(v.re, vo.re);
        seed(v.im, vo.im);
        seed_fv_rows(rows, v.re, w.re, vo.re, dt);
        seed_fv_rows(rows, v.im, w.im, vo.im, dt);
        if (dirichlet) vo.re[0] = vo.im[0] = 0.0;
    }

    auto advance_plane = [&](const std::vector<double>& cur, const std::vector<double>& old,
                             std::vector<double>& next) {
        for (std::size_t k = 0; k + 1 < rg.cuts.size(); ++k)
            kernels::wave_step(next.data(), cur.data(), old.data(), cl.data(), cp.data(),
                               rg.cuts[k] + 1, rg.cuts[k + 1]);
        apply_fv_rows(rows, cur, old, next, dt);
        if (dirichlet) next[0] = 0.0;
        next[nb] = cur[nb - 1] + mur * (cur[nb] - next[nb - 1]);
    };

    // staggered lattice energy over r <= local_radius: exactly conserved by
    // the interior scheme while nothing moves through the cut
    auto local_energy = [&]() {
        const double inv_dt2 = 1.0 / (dt * dt);
        double kin = 0.0, pot = 0.0;
        for (std::size_t i = 0; i <= kcut; ++i) {
            const double dre = vn.re[i] - v.re[i];
            const double dim = vn.im[i] - v.im[i];
            kin += kin_w[i] * (dre * dre + dim * dim);
        }
        for (std::size_t i = 0; i < kcut; ++i) {
            const double inv_h = 1.0 / (r[i + 1] - r[i]);
            pot += inv_h * ((vn.re[i + 1] - vn.re[i]) * (v.re[i + 1] - v.re[i]) +
                            (vn.im[i + 1] - vn.im[i]) * (v.im[i + 1] - v.im[i]));
        }
        return std::max(0.0, 0.5 * (kin * inv_dt2 + pot));
    };

    energy_trace trace;
    trace.times.reserve(steps);
    trace.energy.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        advance_plane(v.re, vo.re, vn.re);
        advance_plane(v.im, vo.im, vn.im);
        trace.times.push_back((double(s) + 0.5) * dt);
        trace.energy.push_back(local_energy());
        std::swap(vo, v);
        std::swap(v, vn);
    }
    return trace;
}

decay_fit fit_decay(const energy_trace& trace, double window_start, double window_end) {
    if (trace.times.size() != trace.energy.size())
        fail(errc::bad_config, "trace times/energy lengths differ");
    if (!(window_end > window_start)) fail(errc::bad_config, "decay window must have positive length");
    const double tol = 1e-12 * (std::abs(window_start) + std::abs(window_end) + 1.0);

    std::vector<double> ts, ys;
    double en_min = std::numeric_limits<double>::infinity(), en_max = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        if (t < window_start - tol || t > window_end + tol) continue;
        const double en = trace.energy[i];
        if (!(en > 0.0))
            fail(errc::nonpositive_energy, "energy sample <= 0 at t = " + std::to_string(t));
        en_min = std::min(en_min, en);
        en_max = std::max(en_max, en);
        ts.push_back(t);
        ys.push_back(std::log(en));
    }
    if (ts.size() < 5)
        fail(errc::window_too_short, "decay fit needs >= 5 samples, window holds " +
                                         std::to_string(ts.size()));

    const double np = double(ts.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= np;
    ym /= np;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double a = ts[i] - tm, b = ys[i] - ym;
        stt += a * a;
        sty += a * b;
        syy += b * b;
    }

    decay_fit out;
    out.window_start = ts.front();
    out.window_end = ts.back();
    if (!(stt > 0.0)) fail(errc::bad_config, "trace times must be strictly increasing");
    // constant up to roundoff in the samples themselves: no slope to report
    if (en_max - en_min <= 1e-12 * en_max) {
        out.degenerate = true;
        return out;
    }
    out.rate = -sty / stt;
    out.r_squared = std::clamp((sty * sty) / (stt * syy), 0.0, 1.0);
    return out;
}

}  // namespace layerspec::evolve
