// SPDX-License-Identifier: Apache-2.0
#include "layerspec/resolvent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "layerspec/bessel.hpp"
#include "layerspec/kernels.hpp"
#include "layerspec/spectral.hpp"

namespace layerspec {

exterior_domain checked_exterior(exterior_domain e) {
    if (e.radii.empty()) fail(errc::empty_layers, "exterior domain needs at least one radius");
    if (e.speeds.size() != e.radii.size())
        fail(errc::bad_config, "exterior domain needs speeds.size() == radii.size()");
    if (e.radii.front() <= 0.0) fail(errc::non_monotone_radii, "radii must be positive");
    for (std::size_t i = 0; i + 1 < e.radii.size(); ++i)
        if (!(e.radii[i] < e.radii[i + 1]))
            fail(errc::non_monotone_radii, "radii must increase strictly");
    for (double c : e.speeds)
        if (!(c > 0.0)) fail(errc::non_positive_speed, "speeds must be positive");
    return e;
}

layered_domain bounded_window(const exterior_domain& e, double cutoff) {
    if (!(cutoff > e.radii.back()))
        fail(errc::bad_config, "cutoff radius must lie beyond the last interface");
    layered_domain v;
    v.radii = e.radii;
    v.radii.push_back(cutoff);
    v.speeds = e.speeds;
    v.a0 = 0.0;
    v.inner_bc = e.inner_bc;
    return v;
}

namespace resolvent {

namespace {

using bessel::sph_bessel_value;
using bessel::sph_h_radiating;
using bessel::sph_h_radiating_table;
using bessel::sph_j_table;
using bessel::sph_y_table;
using spectral::boundary_state;
using spectral::shell_coeffs;

std::size_t node_shell(const mode_grid& g, std::size_t i) {
    return i == 0 ? g.shell_of.front() : g.shell_of[i - 1];
}

struct value_ls {
    cdouble f;
    double ls;
};

// j and y values for every (node, degree) pair, one recurrence pass per node.
// Derivatives are recovered later from neighbouring degrees, so only values
// are stored.
struct basis_tables {
    std::size_t stride = 0; // ell_top + 1
    std::vector<value_ls> j, y;
};

basis_tables build_tables(const layered_domain& dom, const mode_grid& g, cdouble lambda,
                          int ell_top) {
    basis_tables t;
    t.stride = static_cast<std::size_t>(ell_top) + 1;
    const std::size_t n = g.r.size();
    t.j.resize(n * t.stride);
    t.y.resize(n * t.stride);
    std::vector<sph_bessel_value> tmp;
    for (std::size_t i = 0; i < n; ++i) {
        const cdouble z = lambda * g.r[i] / dom.speeds[node_shell(g, i)];
        sph_j_table(ell_top, z, tmp);
        for (std::size_t l = 0; l < t.stride; ++l) t.j[i * t.stride + l] = {tmp[l].f, tmp[l].log_scale};
        sph_y_table(ell_top, z, tmp);
        for (std::size_t l = 0; l < t.stride; ++l) t.y[i * t.stride + l] = {tmp[l].f, tmp[l].log_scale};
    }
    return t;
}

struct assembled {
    std::vector<cdouble> f, df;
    double log_scale = 0.0;
};

// Evaluate alpha*j + beta*y (and d/dr) at every node from the per-shell
// coefficients, merging the various exponents at each node and then pulling
// out one global scale for the whole field.
assembled assemble_field(const layered_domain& dom, const mode_grid& g, const basis_tables& t,
                         int ell, cdouble lambda, const shell_coeffs& sc) {
    const std::size_t n = g.r.size();
    assembled out;
    out.f.resize(n);
    out.df.resize(n);
    std::vector<double> node_ls(n, -std::numeric_limits<double>::infinity());

    const std::size_t lo = static_cast<std::size_t>(ell);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = node_shell(g, i);
        const cdouble kappa = lambda / dom.speeds[k];
        const cdouble z = kappa * g.r[i];
        const value_ls jl = t.j[i * t.stride + lo];
        const value_ls yl = t.y[i * t.stride + lo];
        const cdouble a = sc.alpha[k];
        const cdouble b = sc.beta[k];
        const double lsc = sc.log_scale[k];

        // f' in the z variable from neighbouring degrees:
        //   ell = 0:  f0' = -f1;   ell >= 1:  fl' = f_{l-1} - (l+1)/z * fl
        value_ls jn, yn;
        cdouble diag;
        if (ell == 0) {
            jn = t.j[i * t.stride + 1];
            yn = t.y[i * t.stride + 1];
            jn.f = -jn.f;
            yn.f = -yn.f;
            diag = 0.0;
        } else {
            jn = t.j[i * t.stride + lo - 1];
            yn = t.y[i * t.stride + lo - 1];
            diag = -cdouble(ell + 1) / z;
        }

        const double e1 = lsc + jl.ls;  // alpha * j_l
        const double e2 = lsc + yl.ls;  // beta * y_l
        const double e3 = lsc + jn.ls;  // alpha * neighbour j
        const double e4 = lsc + yn.ls;  // beta * neighbour y
        const double m = std::max(std::max(e1, e2), std::max(e3, e4));

        const cdouble t1 = a * jl.f * std::exp(e1 - m);
        const cdouble t2 = b * yl.f * std::exp(e2 - m);
        out.f[i] = t1 + t2;
        out.df[i] = kappa * (a * jn.f * std::exp(e3 - m) + b * yn.f * std::exp(e4 - m) +
                             diag * (t1 + t2));
        node_ls[i] = m;
    }

    double big = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::max(std::abs(out.f[i]), std::abs(out.df[i]));
        if (mag > 0.0) big = std::max(big, node_ls[i] + std::log(mag));
    }
    if (!std::isfinite(big)) big = 0.0; // identically-zero field; keep mantissas
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::exp(node_ls[i] - big);
        out.f[i] *= s;
        out.df[i] *= s;
    }
    out.log_scale = big;
    return out;
}

boundary_state radiating_seed(const layered_domain& view, int ell, cdouble lambda) {
    const double c = view.speeds.back();
    const double r = view.outer_radius();
    const sph_bessel_value h = sph_h_radiating(ell, lambda * r / c);
    return {h.f, (lambda / c) * h.df, h.log_scale};
}

fundamental_pair build_pair(layered_domain view, const mode_grid& g, const basis_tables& t,
                            int ell, int j, bool radiating, cdouble lambda) {
    fundamental_pair fp;
    fp.ell = ell;
    fp.j = j;
    fp.radiating = radiating;
    fp.lambda = lambda;

    const shell_coeffs sc_phi =
        spectral::solve_layers(view, ell, lambda, spectral::inner_seed(view), view.inner_radius());
    const boundary_state outer =
        radiating ? radiating_seed(view, ell, lambda) : spectral::outer_seed(view, j, lambda);
    const shell_coeffs sc_psi =
        spectral::solve_layers(view, ell, lambda, outer, view.outer_radius());

    assembled phi = assemble_field(view, g, t, ell, lambda, sc_phi);
    assembled psi = assemble_field(view, g, t, ell, lambda, sc_psi);

    const std::size_t n = g.r.size();
    std::vector<double> gauge(n);
    std::vector<cdouble> wr(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r2 = g.r[i] * g.r[i];
        wr[i] = r2 * (phi.f[i] * psi.df[i] - phi.df[i] * psi.f[i]);
        gauge[i] = r2 * (std::abs(phi.f[i]) * std::abs(psi.df[i]) +
                         std::abs(phi.df[i]) * std::abs(psi.f[i]));
    }
    std::vector<double> med_src = gauge;
    std::nth_element(med_src.begin(), med_src.begin() + n / 2, med_src.end());
    const double med = med_src[n / 2];

    // representative node: gauge closest to the median (robust against
    // under-resolved end points)
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(gauge[i] - med);
        if (d < best) {
            best = d;
            pick = i;
        }
    }
    fp.pw = wr[pick];
    if (std::abs(fp.pw) < 1e-10 * med)
        fail(errc::near_eigenvalue, "fundamental solutions are numerically proportional");
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, std::abs(wr[i] - fp.pw));
    fp.pw_rel_spread = spread / std::abs(fp.pw);

    fp.dom = std::move(view);
    fp.grid = g;
    fp.phi = std::move(phi.f);
    fp.dphi = std::move(phi.df);
    fp.phi_log_scale = phi.log_scale;
    fp.psi = std::move(psi.f);
    fp.dpsi = std::move(psi.df);
    fp.psi_log_scale = psi.log_scale;
    return fp;
}

// Node weights of the discrete weighted-L2 inner product: per-cell trapezoid
// of r^2/c^2 with the cell's own speed, so interface nodes pick up half-cells
// from both sides.
std::vector<double> h_weights(const layered_domain& dom, const mode_grid& g) {
    const std::size_t n = g.r.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = dom.speeds[g.shell_of[i]];
        const double half = 0.5 * (g.r[i + 1] - g.r[i]) / (c * c);
        d[i] += half * g.r[i] * g.r[i];
        d[i + 1] += half * g.r[i + 1] * g.r[i + 1];
    }
    return d;
}

struct kernel_work {
    std::vector<cdouble> a, pre, suf, u, w;
};

// y = K x with K = sqrt(D) G sqrt(D), G the variation-of-parameters kernel.
void apply_kernel(const fundamental_pair& fp, const std::vector<double>& sq, kernel_work& wk,
                  const cdouble* x, cdouble* y) {
    const std::size_t n = sq.size();
    kernels::rmul(sq.data(), x, wk.a.data(), n);
    cdouble run = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        run += fp.phi[i] * wk.a[i];
        wk.pre[i] = run;
    }
    run = 0.0;
    wk.suf[n - 1] = 0.0;
    for (std::size_t i = n - 1; i > 0; --i) {
        run += fp.psi[i] * wk.a[i];
        wk.suf[i - 1] = run;
    }
    kernels::green_combine(sq.data(), fp.psi.data(), wk.pre.data(), fp.phi.data(), wk.suf.data(),
                           1.0 / fp.pw, y, n);
}

norm_estimate power_norm(const fundamental_pair& fp) {
    const std::size_t n = fp.grid.r.size();
    std::vector<double> sq = h_weights(fp.dom, fp.grid);
    for (double& v : sq) v = std::sqrt(v);

    kernel_work wk;
    wk.a.resize(n);
    wk.pre.resize(n);
    wk.suf.resize(n);
    wk.u.resize(n);
    wk.w.resize(n);

    std::vector<cdouble> v(n, cdouble(1.0 / std::sqrt(double(n)), 0.0));
    norm_estimate est;
    double prev = 0.0;
    const int max_iter = 500;
    for (int it = 1; it <= max_iter; ++it) {
        apply_kernel(fp, sq, wk, v.data(), wk.u.data());
        const double rho = std::sqrt(kernels::norm2sq(wk.u.data(), n));
        est.value = rho;
        est.iterations = it;
        if (rho == 0.0) return est; // kernel annihilates the start vector: norm 0
        if (it > 1 && std::abs(rho - prev) <= 1e-8 * rho) return est;
        prev = rho;
        // w = K^H u = conj(K conj(u))  (K is complex symmetric)
        for (std::size_t i = 0; i < n; ++i) wk.u[i] = std::conj(wk.u[i]);
        apply_kernel(fp, sq, wk, wk.u.data(), wk.w.data());
        double nw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wk.w[i] = std::conj(wk.w[i]);
            nw += std::norm(wk.w[i]);
        }
        nw = std::sqrt(nw);
        if (nw == 0.0) return est;
        for (std::size_t i = 0; i < n; ++i) v[i] = wk.w[i] / nw;
    }
    est.converged = false;
    return est;
}

int ell_cap(double lambda, double r, double min_c, int pad) {
    return static_cast<int>(std::ceil(std::abs(lambda) * r / min_c)) + pad;
}

bool tail_decreasing(const std::vector<double>& norms) {
    const std::size_t n = norms.size();
    for (std::size_t i = n - 5; i + 1 < n; ++i)
        if (!(norms[i] > norms[i + 1])) return false;
    return true;
}

struct scan_result {
    double norm = 0.0;
    int ell_argmax = 0;
    bool tail_ok = true;
};

// Scan ell = 0..ell_max (extending until the last five mode norms decrease
// strictly) and keep the largest norm. One basis-table build per extension
// covers every degree in the block.
scan_result scan_modes(const layered_domain& view, const mode_grid& g, cdouble lambda, int j,
                       bool radiating, int ell_max, const sweep_options& opt) {
    std::vector<double> norms;
    scan_result out;
    int done = 0;
    for (int ext = 0;; ++ext) {
        const basis_tables t = build_tables(view, g, lambda, std::max(ell_max, 1));
        for (int ell = done; ell <= ell_max; ++ell) {
            const fundamental_pair fp = build_pair(view, g, t, ell, j, radiating, lambda);
            norms.push_back(power_norm(fp).value);
        }
        done = ell_max + 1;
        if (tail_decreasing(norms)) break;
        if (ext == opt.max_tail_extensions) {
            out.tail_ok = false;
            break;
        }
        ell_max += 10;
    }
    const auto top = std::max_element(norms.begin(), norms.end());
    out.norm = *top;
    out.ell_argmax = static_cast<int>(top - norms.begin());
    return out;
}

void check_sweep_lambda(double lambda) {
    if (!(lambda > 0.0)) fail(errc::bad_config, "sweep frequencies must be positive");
}

// Deterministic fan-out over the lambda list: results land in index order, so
// the output is independent of the worker count.
template <class Row, class Fn>
std::vector<Row> run_rows(std::size_t count, unsigned threads, Fn&& per_index) {
    std::vector<Row> rows(count);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) rows[i] = per_index(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    rows[i] = per_index(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

} // namespace

fundamental_pair make_fundamental_pair(const layered_domain& d, const mode_problem& mp,
                                       cdouble lambda, std::size_t quadrature_n) {
    const layered_domain view = checked_domain(d);
    const mode_grid g = make_mode_grid(view, quadrature_n);
    const basis_tables t = build_tables(view, g, lambda, std::max(mp.ell, 1));
    return build_pair(view, g, t, mp.ell, mp.j, false, lambda);
}

fundamental_pair make_fundamental_pair(const exterior_domain& e, int ell, cdouble lambda,
                                       double cutoff_radius, std::size_t quadrature_n) {
    const layered_domain view = bounded_window(checked_exterior(e), cutoff_radius);
    const mode_grid g = make_mode_grid(view, quadrature_n);
    const basis_tables t = build_tables(view, g, lambda, std::max(ell, 1));
    return build_pair(view, g, t, ell, 0, true, lambda);
}

radial_field apply_resolvent(const fundamental_pair& fp, const radial_field& v) {
    const std::size_t n = fp.grid.r.size();
    if (v.grid.size() != n || v.values.size() != n)
        fail(errc::grid_mismatch, "source field must be sampled on the pair's grid");
    const double tol = 1e-12 * fp.dom.outer_radius();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(v.grid[i] - fp.grid.r[i]) > tol)
            fail(errc::grid_mismatch, "source grid deviates from the pair's grid");

    // cumulative trapezoid of phi * s^2 V / c^2 (prefix) and psi * ... (suffix),
    // with each cell integrated against its own shell speed
    std::vector<cdouble> pre(n), suf(n);
    cdouble run = 0.0;
    pre[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = fp.dom.speeds[fp.grid.shell_of[i]];
        const double half = 0.5 * (fp.grid.r[i + 1] - fp.grid.r[i]) / (c * c);
        const double r0 = fp.grid.r[i], r1 = fp.grid.r[i + 1];
        run += half * (fp.phi[i] * v.values[i] * r0 * r0 + fp.phi[i + 1] * v.values[i + 1] * r1 * r1);
        pre[i + 1] = run;
    }
    run = 0.0;
    suf[n - 1] = 0.0;
    for (std::size_t i = n - 1; i > 0; --i) {
        const double c = fp.dom.speeds[fp.grid.shell_of[i - 1]];
        const double half = 0.5 * (fp.grid.r[i] - fp.grid.r[i - 1]) / (c * c);
        const double r0 = fp.grid.r[i - 1], r1 = fp.grid.r[i];
        run += half * (fp.psi[i - 1] * v.values[i - 1] * r0 * r0 + fp.psi[i] * v.values[i] * r1 * r1);
        suf[i - 1] = run;
    }

    radial_field u;
    u.grid = fp.grid.r;
    u.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        u.values[i] = (fp.psi[i] * pre[i] + fp.phi[i] * suf[i]) / fp.pw;
    return u;
}

norm_estimate mode_norm(const fundamental_pair& fp) { return power_norm(fp); }

norm_estimate mode_norm(const layered_domain& d, const mode_problem& mp, cdouble lambda,
                        std::size_t quadrature_n) {
    return power_norm(make_fundamental_pair(d, mp, lambda, quadrature_n));
}

norm_estimate exterior_mode_norm(const exterior_domain& e, int ell, cdouble lambda,
                                 double cutoff_radius, std::size_t quadrature_n) {
    return power_norm(make_fundamental_pair(e, ell, lambda, cutoff_radius, quadrature_n));
}

sweep_row sweep_point(const layered_domain& d, int j, double lambda, const sweep_options& opt) {
    check_sweep_lambda(lambda);
    if (j != 0 && j != 1) fail(errc::bad_config, "boundary-row power must be 0 or 1");
    const layered_domain view = checked_domain(d);
    const mode_grid g = make_mode_grid(view, opt.quadrature_n);
    const int lm = ell_cap(lambda, view.outer_radius(), view.min_speed(), opt.ell_pad);
    const scan_result s = scan_modes(view, g, lambda, j, false, lm, opt);
    sweep_row row;
    row.j = j;
    row.lambda = lambda;
    row.norm = s.norm;
    row.lambda_pow_j_norm = (j == 0 ? 1.0 : lambda) * s.norm;
    row.ell_argmax = s.ell_argmax;
    row.tail_ok = s.tail_ok;
    return row;
}

std::vector<sweep_row> full_norm_sweep(const layered_domain& d, int j,
                                       std::span<const double> lambdas,
                                       const sweep_options& opt) {
    for (double l : lambdas) check_sweep_lambda(l);
    return run_rows<sweep_row>(lambdas.size(), opt.threads,
                               [&](std::size_t i) { return sweep_point(d, j, lambdas[i], opt); });
}

exterior_sweep_row exterior_sweep_point(const exterior_domain& e, cdouble lambda,
                                        double cutoff_radius, const sweep_options& opt) {
    const exterior_domain ok = checked_exterior(e);
    const layered_domain view = bounded_window(ok, cutoff_radius);
    const mode_grid g = make_mode_grid(view, opt.quadrature_n);
    const int lm = ell_cap(std::abs(lambda), cutoff_radius, view.min_speed(), opt.ell_pad);
    const scan_result s = scan_modes(view, g, lambda, 0, true, lm, opt);
    exterior_sweep_row row;
    row.lambda = lambda.real();
    row.im_lambda = lambda.imag();
    row.cutoff_radius = cutoff_radius;
    row.norm = s.norm;
    row.lambda_norm = std::abs(lambda) * s.norm;
    row.ell_argmax = s.ell_argmax;
    row.tail_ok = s.tail_ok;
    return row;
}

std::vector<exterior_sweep_row> exterior_norm_sweep(const exterior_domain& e,
                                                    std::span<const double> lambdas,
                                                    double cutoff_radius,
                                                    const sweep_options& opt) {
    for (double l : lambdas) check_sweep_lambda(l);
    return run_rows<exterior_sweep_row>(lambdas.size(), opt.threads, [&](std::size_t i) {
        return exterior_sweep_point(e, lambdas[i], cutoff_radius, opt);
    });
}

cdouble outgoing_dtn(int ell, cdouble lambda, double c, double r) {
    if (!(c > 0.0) || !(r > 0.0)) fail(errc::bad_config, "dtn needs positive speed and radius");
    if (ell < 0) fail(errc::bad_config, "dtn needs ell >= 0");
    const sph_bessel_value h = sph_h_radiating(ell, lambda * r / c);
    return h.df / (c * h.f);
}

glancing_fit glancing_exponent(double c, double r, std::span<const double> lambdas) {
    if (!(c > 0.0) || !(r > 0.0)) fail(errc::bad_config, "fit needs positive speed and radius");
    if (lambdas.size() < 4)
        fail(errc::bad_config, "exponent fit needs at least 4 frequencies");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double l : lambdas) {
        if (!(l > 0.0)) fail(errc::bad_config, "frequencies must be positive");
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    if (hi < 4.0 * lo)
        fail(errc::bad_config, "frequencies must span at least a factor of 4");

    glancing_fit fit;
    fit.s.reserve(lambdas.size());
    std::vector<sph_bessel_value> table;
    for (double l : lambdas) {
        const double zr = l * r / c;
        const int cap = static_cast<int>(std::floor(zr - 0.5));
        if (cap < 0)
            fail(errc::nonpositive_max, "no propagating degree at the lowest frequency");
        sph_h_radiating_table(std::max(cap, 1), cdouble(zr, 0.0), table);
        double s = 0.0;
        for (int ell = 0; ell <= cap; ++ell)
            s = std::max(s, std::abs((table[ell].df / (c * table[ell].f)).real()));
        if (!(s > 0.0)) fail(errc::nonpositive_max, "flat response, nothing to fit");
        fit.s.push_back(s);
    }

    const std::size_t n = lambdas.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(lambdas[i]);
        const double y = std::log(fit.s[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / det;
    const double icept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = std::log(fit.s[i]);
        const double e = y - (icept + fit.slope * std::log(lambdas[i]));
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace layerspec::resolvent
} // namespace layerspec
