// SPDX-License-Identifier: Apache-2.0
#include "layerspec/bessel.hpp"

#include <algorithm>
#include <cmath>

#include "layerspec/errors.hpp"

namespace layerspec::bessel {
namespace {

constexpr double kRescaleAt = 1e250;
constexpr double kRescaleBy = 1e-250;
const double kRescaleLog = std::log(kRescaleAt);
constexpr double kTrigScaleAbove = 300.0; // |Im z| beyond which exp(|Im z|) needs factoring out
constexpr double kSeriesBelow = 0.5;      // j via ascending series below this |z|
constexpr double kUpwardFraction = 0.75;  // j via upward recurrence while ell < frac*|z| - 2

// sin z = s*e^ls, cos z = c*e^ls with s, c of modulus <= 1-ish. For large
// |Im z| the dominant exponential is factored into ls so nothing overflows.
void scaled_trig(cdouble z, cdouble& s, cdouble& c, double& ls) {
    const double x = z.real();
    const double y = z.imag();
    const double ay = std::abs(y);
    if (ay < kTrigScaleAbove) {
        s = std::sin(z);
        c = std::cos(z);
        ls = 0.0;
        return;
    }
    ls = ay;
    // One exponential has unit modulus after scaling, the other is e^{-2|y|}.
    const cdouble sub = std::exp(cdouble(-2.0 * ay, y > 0 ? x : -x));
    const cdouble dom = std::exp(cdouble(0.0, y > 0 ? -x : x));
    if (y > 0) {
        s = (sub - dom) / cdouble(0.0, 2.0);
        c = (sub + dom) / 2.0;
    } else {
        s = (dom - sub) / cdouble(0.0, 2.0);
        c = (dom + sub) / 2.0;
    }
}

// Fold the scale into the mantissa when the result is safely representable.
sph_bessel_value pack(cdouble f, cdouble df, double ls) {
    if (ls == 0.0) return {f, df, 0.0};
    const double m = std::max({std::abs(f.real()), std::abs(f.imag()),
                               std::abs(df.real()), std::abs(df.imag()), 1e-300});
    const double folded = ls + std::log(m);
    if (folded > -600.0 && folded < 600.0) {
        const double e = std::exp(ls);
        return {f * e, df * e, 0.0};
    }
    return {f, df, ls};
}

struct closed_forms {
    cdouble j0, j1, y0, y1, dj0, dy0;
    double ls; // shared scale for all six
};

closed_forms closed_at(cdouble z) {
    cdouble s, c;
    double ls;
    scaled_trig(z, s, c, ls);
    closed_forms r;
    r.ls = ls;
    r.j0 = s / z;
    r.j1 = s / (z * z) - c / z;
    r.y0 = -c / z;
    r.y1 = -c / (z * z) - s / z;
    r.dj0 = c / z - s / (z * z);
    r.dy0 = c / (z * z) + s / z;
    return r;
}

// Upward recurrence from seeds (f0, f1) at shared scale ls0. Derivatives via
// f'_l = f_{l-1} - (l+1)/z * f_l, with the l = 0 derivative supplied by the
// caller (it needs the l = -1 member). Forward-stable only when the seeds
// span the dominant solution, which holds for y always and for j below the
// turning point.
void upward_table(cdouble z, cdouble f0, cdouble df0, cdouble f1, double ls0,
                  int ell_max, std::vector<sph_bessel_value>& out) {
    out.resize(static_cast<size_t>(ell_max) + 1);
    out[0] = pack(f0, df0, ls0);
    if (ell_max == 0) return;
    cdouble prev = f0;
    cdouble cur = f1;
    double extra = 0.0;
    for (int ell = 1;; ++ell) {
        const cdouble dcur = prev - (double(ell) + 1.0) / z * cur;
        out[static_cast<size_t>(ell)] = pack(cur, dcur, ls0 + extra);
        if (ell == ell_max) break;
        cdouble next = (2.0 * ell + 1.0) / z * cur - prev;
        prev = cur;
        cur = next;
        if (std::abs(cur.real()) > kRescaleAt || std::abs(cur.imag()) > kRescaleAt) {
            prev *= kRescaleBy;
            cur *= kRescaleBy;
            extra += kRescaleLog;
        }
    }
}

// Ascending series for j_ell and its derivative, valid for small |z|.
// j_ell = z^ell/(2ell+1)!! * sum_k t_k,   t_k = t_{k-1} * (-z^2/2)/(k(2ell+2k+1))
// j'_ell = z^{ell-1}/(2ell+1)!! * sum_k (ell+2k) t_k
sph_bessel_value series_j(int ell, cdouble z) {
    const cdouble w = -0.5 * z * z;
    cdouble term(1.0, 0.0);
    cdouble sum = term;
    cdouble dsum = double(ell) * term;
    for (int k = 1; k <= 60; ++k) {
        term *= w / (double(k) * (2.0 * ell + 2.0 * k + 1.0));
        sum += term;
        dsum += (double(ell) + 2.0 * k) * term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    // prefactor z^ell/(2ell+1)!! in log form; (2l+1)!! = (2l+1)!/(2^l l!)
    const double ldf = std::lgamma(2.0 * ell + 2.0) - ell * std::log(2.0) -
                       std::lgamma(double(ell) + 1.0);
    const double lmag = ell * std::log(std::abs(z)) - ldf;
    const cdouble phase = (ell == 0) ? cdouble(1.0, 0.0)
                                     : std::exp(cdouble(0.0, ell * std::arg(z)));
    return pack(phase * sum, phase * dsum / z, lmag);
}

int miller_start(int ell_max, double az) {
    const int delta = static_cast<int>(std::ceil(8.0 * std::cbrt(az))) + 12;
    return std::max(ell_max, static_cast<int>(std::ceil(az))) + delta;
}

// Downward Miller recurrence for j: run from well above max(ell_max, |z|)
// with arbitrary tail values, record raw value/derivative/scale per order,
// then normalize against whichever of the closed-form j_0, j_1 is larger.
void miller_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out) {
    const int L = miller_start(ell_max, std::abs(z));
    std::vector<cdouble> g(static_cast<size_t>(ell_max) + 1);
    std::vector<cdouble> dg(static_cast<size_t>(ell_max) + 1);
    std::vector<double> E(static_cast<size_t>(ell_max) + 1);

    cdouble above(0.0, 0.0); // f_{l+1} at current scale
    cdouble here(1.0, 0.0);  // f_l at current scale
    double extra = 0.0;
    for (int ell = L; ell >= 0; --ell) {
        if (ell <= ell_max) {
            g[static_cast<size_t>(ell)] = here;
            dg[static_cast<size_t>(ell)] =
                (2.0 * ell + 1.0) / z * here - above - (double(ell) + 1.0) / z * here;
            // (f_{l-1} computed from the recurrence, same running scale)
            E[static_cast<size_t>(ell)] = extra;
        }
        if (ell == 0) break;
        cdouble below = (2.0 * ell + 1.0) / z * here - above;
        above = here;
        here = below;
        if (std::abs(here.real()) > kRescaleAt || std::abs(here.imag()) > kRescaleAt) {
            above *= kRescaleBy;
            here *= kRescaleBy;
            extra += kRescaleLog;
        }
    }

    const closed_forms cf = closed_at(z);
    // Pick the better-conditioned normalizer; j_0 and j_1 have no common zero.
    const bool use0 = std::abs(cf.j0) >= std::abs(cf.j1);
    const int lref = use0 ? 0 : 1;
    const cdouble jref = use0 ? cf.j0 : cf.j1;
    const cdouble gref = g[static_cast<size_t>(lref)];
    const double Eref = E[static_cast<size_t>(lref)];
    if (gref == cdouble(0.0, 0.0))
        fail(errc::overflow_risk, "bessel normalization collapsed");
    const cdouble ratio = jref / gref;

    out.resize(static_cast<size_t>(ell_max) + 1);
    for (int ell = 0; ell <= ell_max; ++ell) {
        const size_t i = static_cast<size_t>(ell);
        out[i] = pack(ratio * g[i], ratio * dg[i], cf.ls + E[i] - Eref);
    }
    // l = 0 derivative from the closed form (the pass has no l = -1 member).
    out[0] = pack(cf.j0, cf.dj0, cf.ls);
}

void check_z(cdouble z) {
    if (z == cdouble(0.0, 0.0)) fail(errc::bad_config, "bessel argument must be nonzero");
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        fail(errc::bad_config, "bessel argument must be finite");
    if (std::abs(z) < 1e-290)
        fail(errc::overflow_risk, "bessel argument too close to zero");
}

thread_local std::vector<sph_bessel_value> tl_table;

} // namespace

void sph_j_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out) {
    check_z(z);
    if (ell_max < 0) fail(errc::bad_config, "bessel order must be >= 0");
    const double az = std::abs(z);
    if (az < kSeriesBelow) {
        out.resize(static_cast<size_t>(ell_max) + 1);
        for (int ell = 0; ell <= ell_max; ++ell)
            out[static_cast<size_t>(ell)] = series_j(ell, z);
        return;
    }
    if (ell_max < kUpwardFraction * az - 2.0) {
        const closed_forms cf = closed_at(z);
        upward_table(z, cf.j0, cf.dj0, cf.j1, cf.ls, ell_max, out);
        return;
    }
    miller_table(ell_max, z, out);
}

void sph_y_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out) {
    check_z(z);
    if (ell_max < 0) fail(errc::bad_config, "bessel order must be >= 0");
    const closed_forms cf = closed_at(z);
    upward_table(z, cf.y0, cf.dy0, cf.y1, cf.ls, ell_max, out);
}

void sph_h_radiating_table(int ell_max, cdouble z, std::vector<sph_bessel_value>& out) {
    check_z(z);
    if (ell_max < 0) fail(errc::bad_config, "bessel order must be >= 0");
    // h_0 = i e^{-iz}/z, h_1 = e^{-iz} (i - z)/z^2. |e^{-iz}| = e^{Im z}, so
    // factoring exactly e^{Im z} into the scale leaves a unit-modulus mantissa
    // in both half-planes.
    const cdouble emiz = std::exp(cdouble(0.0, -z.real()));
    const cdouble h0 = cdouble(0.0, 1.0) * emiz / z;
    const cdouble h1 = emiz * (cdouble(0.0, 1.0) - z) / (z * z);
    const cdouble dh0 = emiz / z - h0 / z; // d/dz [i e^{-iz}/z] = e^{-iz}/z - i e^{-iz}/z^2
    upward_table(z, h0, dh0, h1, z.imag(), ell_max, out);
}

sph_bessel_value sph_j(int ell, cdouble z) {
    sph_j_table(ell, z, tl_table);
    return tl_table[static_cast<size_t>(ell)];
}

sph_bessel_value sph_y(int ell, cdouble z) {
    sph_y_table(ell, z, tl_table);
    return tl_table[static_cast<size_t>(ell)];
}

sph_bessel_value sph_h_radiating(int ell, cdouble z) {
    sph_h_radiating_table(ell, z, tl_table);
    return tl_table[static_cast<size_t>(ell)];
}

double wronskian_residual(int ell, cdouble z) {
    // The j/y cross-Wronskian equals 1/z^2, but away from the real axis both
    // functions ride the same dominant exponential and the difference cancels
    // like e^{-2|Im z|}; pairing j with the radiating branch keeps every term
    // the size of the answer. The defect is conjugation-symmetric, so evaluate
    // in the half-plane where that pairing is well conditioned.
    if (z.imag() > 0.0) z = std::conj(z);
    const sph_bessel_value j = sph_j(ell, z);
    const sph_bessel_value h = sph_h_radiating(ell, z);
    const cdouble w = j.f * h.df - j.df * h.f;
    const double ls = j.log_scale + h.log_scale;
    // exact: j h' - j' h = -i (j y' - j' y) = -i/z^2
    return std::abs(cdouble(0.0, 1.0) * w * std::exp(ls) * z * z - 1.0);
}

} // namespace layerspec::bessel
