// SPDX-License-Identifier: Apache-2.0
#include "layerspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "layerspec/bessel.hpp"
#include "layerspec/errors.hpp"

namespace layerspec::spectral {
namespace {

using bessel::sph_bessel_value;
using bessel::sph_j;
using bessel::sph_y;

constexpr double kPi = 3.141592653589793238462643383279502884;

std::size_t shell_index(const layered_domain& d, double r) {
    for (std::size_t k = 0; k + 1 < d.radii.size(); ++k)
        if (r < d.radii[k + 1] || k + 2 == d.radii.size()) return k;
    return d.num_shells() - 1;
}

// R = alpha j + beta y on one shell from Cauchy data at radius r_a; the basis
// inverse is exact through the cross-Wronskian j y' - j' y = 1/z^2.
struct local_coeffs {
    cdouble alpha, beta;
    double ls_alpha, ls_beta;
};

local_coeffs shell_solve(int ell, cdouble kappa, double r_a, const boundary_state& s) {
    const cdouble za = kappa * r_a;
    const sph_bessel_value j = sph_j(ell, za);
    const sph_bessel_value y = sph_y(ell, za);
    const cdouble z2 = za * za;
    local_coeffs c;
    c.alpha = z2 * (s.value * y.df - s.deriv / kappa * y.f);
    c.ls_alpha = s.log_scale + y.log_scale;
    c.beta = z2 * (s.deriv / kappa * j.f - s.value * j.df);
    c.ls_beta = s.log_scale + j.log_scale;
    return c;
}

boundary_state shell_eval(int ell, cdouble kappa, const local_coeffs& c, double r_b) {
    const cdouble zb = kappa * r_b;
    const sph_bessel_value j = sph_j(ell, zb);
    const sph_bessel_value y = sph_y(ell, zb);
    const double ea = c.ls_alpha + j.log_scale;
    const double eb = c.ls_beta + y.log_scale;
    const double m = std::max(ea, eb);
    const cdouble fa = c.alpha * std::exp(ea - m);
    const cdouble fb = c.beta * std::exp(eb - m);
    boundary_state out;
    out.value = fa * j.f + fb * y.f;
    out.deriv = kappa * (fa * j.df + fb * y.df);
    out.log_scale = m;
    // keep the mantissas O(1)
    const double q = std::max(std::abs(out.value), std::abs(out.deriv));
    if (q > 0.0 && std::isfinite(q)) {
        out.value /= q;
        out.deriv /= q;
        out.log_scale += std::log(q);
    }
    return out;
}

void check_lambda(cdouble lambda) {
    if (lambda == cdouble(0.0, 0.0))
        fail(errc::bad_config, "propagation requires lambda != 0");
}

double box_width(const search_box& b) { return b.re_max - b.re_min; }
double box_height(const search_box& b) { return b.im_max - b.im_min; }

cdouble reported_value(int j, cdouble lambda) {
    return j == 0 ? lambda * lambda : lambda;
}

// ---- argument-principle machinery ------------------------------------------

struct contour_probe {
    const layered_domain* d;
    const mode_problem* mp;
    double arg_at(cdouble lambda) const {
        const scaled_value v = characteristic(*d, *mp, lambda);
        if (v.f == cdouble(0.0, 0.0)) fail(errc::contour_near_root, "contour hit a zero");
        return std::arg(v.f);
    }
};

double wrap_pi(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

// Unwrapped phase increment along the segment [a, b], bisecting until each
// piece turns by < pi/2. A zero sitting on the contour makes the turn stay
// ~pi no matter how short the piece gets; that is the near-root signal.
double edge_phase(const contour_probe& probe, cdouble a, double fa, cdouble b, double fb,
                  double min_len, int depth) {
    const double d0 = wrap_pi(fb - fa);
    if (std::abs(d0) < kPi / 2.0) return d0;
    if (depth > 48 || std::abs(b - a) < min_len)
        fail(errc::contour_near_root, "phase jump persists under bisection");
    const cdouble mid = 0.5 * (a + b);
    const double fm = probe.arg_at(mid);
    return edge_phase(probe, a, fa, mid, fm, min_len, depth + 1) +
           edge_phase(probe, mid, fm, b, fb, min_len, depth + 1);
}

int contour_winding(const contour_probe& probe, const search_box& b, int samples_per_edge) {
    const cdouble corners[4] = {{b.re_min, b.im_min},
                                {b.re_max, b.im_min},
                                {b.re_max, b.im_max},
                                {b.re_min, b.im_max}};
    const double diag = std::hypot(box_width(b), box_height(b));
    const double min_len = 1e-10 * diag;
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const cdouble a = corners[e];
        const cdouble c = corners[(e + 1) % 4];
        double prev_arg = probe.arg_at(a);
        cdouble prev = a;
        for (int s = 1; s <= samples_per_edge; ++s) {
            const cdouble cur = a + (c - a) * (double(s) / samples_per_edge);
            const double cur_arg = probe.arg_at(cur);
            total += edge_phase(probe, prev, prev_arg, cur, cur_arg, min_len, 0);
            prev = cur;
            prev_arg = cur_arg;
        }
    }
    const double w = total / (2.0 * kPi);
    const double r = std::round(w);
    if (std::abs(w - r) > 0.05)
        fail(errc::contour_near_root, "winding did not settle to an integer");
    return static_cast<int>(r);
}

// ---- Newton ----------------------------------------------------------------

struct newton_result {
    cdouble lambda;
    double last_step;
    bool converged;
};

newton_result newton_polish(const layered_domain& d, const mode_problem& mp, cdouble start,
                            const search_options& opt) try {
    cdouble lam = start;
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        const double h = 1e-6 * std::max(1.0, std::abs(lam));
        const scaled_value d0 = characteristic(d, mp, lam);
        const scaled_value dp = characteristic(d, mp, lam + h);
        const scaled_value dm = characteristic(d, mp, lam - h);
        // rebase the neighbors onto d0's scale; differences stay finite
        const cdouble fp = dp.f * std::exp(dp.log_scale - d0.log_scale);
        const cdouble fm = dm.f * std::exp(dm.log_scale - d0.log_scale);
        const cdouble der = (fp - fm) / (2.0 * h);
        if (der == cdouble(0.0, 0.0)) return {lam, last, false};
        const cdouble step = d0.f / der;
        lam -= step;
        last = std::abs(step);
        if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag()))
            return {lam, last, false};
        if (last < opt.newton_tol * std::max(1.0, std::abs(lam))) return {lam, last, true};
    }
    return {lam, last, false};
} catch (const error&) {
    // an iterate wandered somewhere the special functions refuse (e.g. ~0)
    return {start, std::numeric_limits<double>::infinity(), false};
}

bool inside(const search_box& b, cdouble z) {
    return z.real() >= b.re_min && z.real() <= b.re_max && z.imag() >= b.im_min &&
           z.imag() <= b.im_max;
}

// Total one-way transit time sets the density of resonances per unit Re lambda
// (roughly one per pi/transit), which sizes the auto sampling grid.
double transit_time(const layered_domain& d) {
    double t = 0.0;
    for (std::size_t k = 0; k < d.num_shells(); ++k)
        t += (d.radii[k + 1] - d.radii[k]) / d.speeds[k];
    return t;
}

} // namespace

boundary_state inner_seed(const layered_domain& d) {
    return d.inner_bc == inner_bc_kind::dirichlet ? boundary_state{{0.0, 0.0}, {1.0, 0.0}, 0.0}
                                                  : boundary_state{{1.0, 0.0}, {0.0, 0.0}, 0.0};
}

boundary_state outer_seed(const layered_domain& d, int j, cdouble lambda) {
    const cdouble factor = (j == 0) ? cdouble(0.0, 1.0) * d.a0
                                    : cdouble(0.0, 1.0) * lambda * d.a0;
    return {{1.0, 0.0}, -factor, 0.0};
}

boundary_state propagate(const layered_domain& d, int ell, cdouble lambda, boundary_state s,
                         double r_from, double r_to) {
    check_lambda(lambda);
    if (ell < 0) fail(errc::bad_config, "ell must be >= 0");
    const double tol = 1e-12 * d.outer_radius();
    if (r_from < d.inner_radius() - tol || r_from > d.outer_radius() + tol ||
        r_to < d.inner_radius() - tol || r_to > d.outer_radius() + tol)
        fail(errc::bad_config, "propagation endpoints must lie in [r0, r_out]");
    if (r_from == r_to) return s;

    const bool outward = r_to > r_from;
    double r = r_from;
    while (r != r_to) {
        // shell containing the segment start, looking in the travel direction
        std::size_t k = shell_index(d, r);
        if (!outward && r <= d.radii[k] + tol && k > 0) --k;
        const double stop = outward ? std::min(r_to, d.radii[k + 1]) : std::max(r_to, d.radii[k]);
        const cdouble kappa = lambda / d.speeds[k];
        s = shell_eval(ell, kappa, shell_solve(ell, kappa, r, s), stop);
        r = stop;
    }
    return s;
}

scaled_value characteristic(const layered_domain& d, const mode_problem& mp, cdouble lambda) {
    check_lambda(lambda);
    const boundary_state at_out =
        propagate(d, mp.ell, lambda, inner_seed(d), d.inner_radius(), d.outer_radius());
    const cdouble factor = (mp.j == 0) ? cdouble(0.0, 1.0) * d.a0
                                       : cdouble(0.0, 1.0) * lambda * d.a0;
    return {at_out.deriv + factor * at_out.value, at_out.log_scale};
}

shell_coeffs solve_layers(const layered_domain& d, int ell, cdouble lambda,
                          const boundary_state& seed, double seeded_at) {
    check_lambda(lambda);
    const std::size_t m1 = d.num_shells();
    shell_coeffs out;
    out.alpha.resize(m1);
    out.beta.resize(m1);
    out.log_scale.resize(m1);

    const double tol = 1e-12 * d.outer_radius();
    const bool from_inner = std::abs(seeded_at - d.inner_radius()) <= tol;
    if (!from_inner && std::abs(seeded_at - d.outer_radius()) > tol)
        fail(errc::bad_config, "layer solve must be seeded at r0 or r_out");

    boundary_state s = seed;
    for (std::size_t step = 0; step < m1; ++step) {
        const std::size_t k = from_inner ? step : m1 - 1 - step;
        const double enter = from_inner ? d.radii[k] : d.radii[k + 1];
        const double leave = from_inner ? d.radii[k + 1] : d.radii[k];
        const cdouble kappa = lambda / d.speeds[k];
        const local_coeffs c = shell_solve(ell, kappa, enter, s);
        // store on a shared per-shell scale
        const double m = std::max(c.ls_alpha, c.ls_beta);
        out.alpha[k] = c.alpha * std::exp(c.ls_alpha - m);
        out.beta[k] = c.beta * std::exp(c.ls_beta - m);
        out.log_scale[k] = m;
        s = shell_eval(ell, kappa, c, leave);
    }
    return out;
}

radial_field mode_shape(const layered_domain& d, const mode_problem& mp, cdouble lambda,
                        const mode_grid& g) {
    const shell_coeffs sc = solve_layers(d, mp.ell, lambda, inner_seed(d), d.inner_radius());
    const std::size_t n = g.r.size();
    std::vector<cdouble> raw(n);
    std::vector<double> ls(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i == 0 ? 0 : g.shell_of[i - 1];
        const cdouble kappa = lambda / d.speeds[k];
        const sph_bessel_value j = sph_j(mp.ell, kappa * g.r[i]);
        const sph_bessel_value y = sph_y(mp.ell, kappa * g.r[i]);
        const double ea = sc.log_scale[k] + j.log_scale;
        const double eb = sc.log_scale[k] + y.log_scale;
        const double m = std::max(ea, eb);
        raw[i] = sc.alpha[k] * j.f * std::exp(ea - m) + sc.beta[k] * y.f * std::exp(eb - m);
        ls[i] = m;
    }
    // single global normalization to max |R| = 1
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(raw[i]);
        if (a > 0.0) peak = std::max(peak, ls[i] + std::log(a));
    }
    if (!std::isfinite(peak)) fail(errc::nonpositive_max, "mode shape vanished identically");
    radial_field f;
    f.grid = g.r;
    f.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.values[i] = raw[i] * std::exp(ls[i] - peak);
    return f;
}

spectrum_result find_roots(const layered_domain& d, const mode_problem& mp,
                           const search_box& box, const search_options& opt) {
    if (!(box.re_min < box.re_max) || !(box.im_min < box.im_max) ||
        !std::isfinite(box.re_min + box.re_max + box.im_min + box.im_max))
        fail(errc::invalid_box, "search box must be a finite nonempty rectangle");
    if (box.re_min <= 0.0 && box.re_max >= 0.0 && box.im_min <= 0.0 && box.im_max >= 0.0)
        fail(errc::invalid_box,
             "the characteristic function lives on the punctured plane; exclude lambda = 0");
    if (mp.j == 0 && box.re_min < 0.0)
        fail(errc::invalid_box,
             "j = 0 is even in lambda; search Re lambda > 0 and read eigenvalues as lambda^2");

    // auto grid: a few cells per expected root spacing pi/transit
    const double tt = transit_time(d);
    int nx = opt.grid_re > 0
                 ? opt.grid_re
                 : std::clamp(int(std::ceil(4.0 * box_width(box) * tt / kPi)) + 8, 32, 768);
    int ny = opt.grid_im > 0
                 ? opt.grid_im
                 : std::clamp(int(std::ceil(4.0 * box_height(box) * tt / kPi)) + 8, 24, 768);

    // Certification contour; nudge the box outward while it grazes a zero.
    contour_probe probe{&d, &mp};
    search_box work = box;
    int winding = 0;
    for (int tries = 0;; ++tries) {
        try {
            winding = contour_winding(probe, work, std::max(64, std::max(nx, ny)));
            break;
        } catch (const error& e) {
            if (e.code != errc::contour_near_root || tries >= 4) throw;
            const double dx = (1e-6 + tries * 3e-6) * box_width(box);
            const double dy = (1e-6 + tries * 3e-6) * box_height(box);
            work.re_min -= dx;
            work.re_max += dx;
            work.im_min -= dy;
            work.im_max += dy;
            if (work.re_min <= 0.0 && work.re_max >= 0.0 && work.im_min <= 0.0 &&
                work.im_max >= 0.0)
                throw; // the nudge would swallow lambda = 0
        }
    }

    spectrum_result best;
    for (int attempt = 0;; ++attempt) {
        std::vector<root_record> roots;
        // phase field on the sampling grid
        std::vector<double> phase(std::size_t(nx + 1) * std::size_t(ny + 1));
        auto at = [&](int ix, int iy) -> cdouble {
            return {work.re_min + box_width(work) * ix / nx,
                    work.im_min + box_height(work) * iy / ny};
        };
        for (int iy = 0; iy <= ny; ++iy)
            for (int ix = 0; ix <= nx; ++ix) {
                const cdouble lam = at(ix, iy);
                const scaled_value v = characteristic(d, mp, lam);
                phase[std::size_t(iy) * (nx + 1) + ix] =
                    v.f == cdouble(0.0, 0.0) ? 0.0 : std::arg(v.f);
            }
        auto ph = [&](int ix, int iy) { return phase[std::size_t(iy) * (nx + 1) + ix]; };

        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double w = wrap_pi(ph(ix + 1, iy) - ph(ix, iy)) +
                                 wrap_pi(ph(ix + 1, iy + 1) - ph(ix + 1, iy)) +
                                 wrap_pi(ph(ix, iy + 1) - ph(ix + 1, iy + 1)) +
                                 wrap_pi(ph(ix, iy) - ph(ix, iy + 1));
                if (std::abs(w) < kPi) continue; // no enclosed zero indicated
                const cdouble center = 0.5 * (at(ix, iy) + at(ix + 1, iy + 1));
                const newton_result nr = newton_polish(d, mp, center, opt);
                if (!nr.converged || !inside(work, nr.lambda)) continue;
                bool dup = false;
                for (const auto& r : roots)
                    if (std::abs(r.lambda - nr.lambda) <
                        opt.dedup_tol * std::max(1.0, std::abs(nr.lambda))) {
                        dup = true;
                        break;
                    }
                if (!dup)
                    roots.push_back({reported_value(mp.j, nr.lambda), nr.lambda, mp.ell,
                                     nr.last_step});
            }

        std::sort(roots.begin(), roots.end(), [](const root_record& a, const root_record& b) {
            return a.lambda.real() != b.lambda.real() ? a.lambda.real() < b.lambda.real()
                                                      : a.lambda.imag() < b.lambda.imag();
        });
        best.roots = std::move(roots);
        best.winding_count = winding;
        best.certified = int(best.roots.size()) == winding;
        if (best.certified || attempt >= opt.max_refine) return best;
        nx *= 2;
        ny *= 2;
    }
}

double spectral_gap(const layered_domain& d, int j, int ell_max, const search_box& box,
                    const search_options& opt) {
    double gap = std::numeric_limits<double>::infinity();
    for (int ell = 0; ell <= ell_max; ++ell) {
        const spectrum_result res = find_roots(d, {j, ell}, box, opt);
        for (const auto& r : res.roots) gap = std::min(gap, r.value.imag());
    }
    return gap;
}

} // namespace layerspec::spectral
