// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "layerspec/bessel.hpp"
#include "layerspec/errors.hpp"

using namespace layerspec;
using namespace layerspec::bessel;

namespace {

// value including its scale, for ranges where that is representable
cdouble full(const sph_bessel_value& v) { return v.f * std::exp(v.log_scale); }
cdouble dfull(const sph_bessel_value& v) { return v.df * std::exp(v.log_scale); }

// relative defect of f_{l-1} + f_{l+1} = (2l+1)/z * f_l on a shared-scale triple
double recurrence_defect(const sph_bessel_value& lo, const sph_bessel_value& mid,
                         const sph_bessel_value& hi, int ell, cdouble z) {
    const double m = std::max({lo.log_scale, mid.log_scale, hi.log_scale});
    const cdouble a = lo.f * std::exp(lo.log_scale - m);
    const cdouble b = mid.f * std::exp(mid.log_scale - m) * (2.0 * ell + 1.0) / z;
    const cdouble c = hi.f * std::exp(hi.log_scale - m);
    const double scale = std::abs(a) + std::abs(b) + std::abs(c);
    return scale == 0.0 ? 0.0 : std::abs(a + c - b) / scale;
}

} // namespace

TEST_CASE("closed-form anchors") {
    // j0(1) = sin(1)
    CHECK(std::abs(full(sph_j(0, {1.0, 0.0})) - cdouble(0.8414709848078965, 0.0)) < 1e-15);
    // j1(0.1), series-dominated region
    CHECK(std::abs(full(sph_j(1, {0.1, 0.0})) - cdouble(0.03330001190255757, 0.0)) < 1e-15);
    // y0(pi) = -cos(pi)/pi = 1/pi
    CHECK(std::abs(full(sph_y(0, {M_PI, 0.0})) - cdouble(0.3183098861837907, 0.0)) < 1e-15);
    // y1(2) = -cos(2)/4 - sin(2)/2
    CHECK(std::abs(full(sph_y(1, {2.0, 0.0})) - cdouble(-0.3506120042760553, 0.0)) < 1e-15);
    // h0(1) = i e^{-i} = sin(1) + i cos(1)
    CHECK(std::abs(full(sph_h_radiating(0, {1.0, 0.0})) -
                   cdouble(0.8414709848078965, 0.5403023058681398)) < 1e-15);
    // derivative anchors: j0'(2) = cos(2)/2 - sin(2)/4
    CHECK(std::abs(dfull(sph_j(0, {2.0, 0.0})) -
                   cdouble(-0.4353977749799916, 0.0)) < 1e-15);
}

TEST_CASE("wronskian stays machine-small across the working range") {
    const double zs[] = {0.05, 0.4, 1.0, 3.0, 17.0, 80.0, 333.0, 500.0};
    const double ys[] = {0.0, -0.5, 0.5, -5.0, 5.0, -20.0, 20.0};
    const int ells[] = {0, 1, 2, 5, 13, 27, 44, 60};
    for (double za : zs)
        for (double yi : ys)
            for (int ell : ells) {
                const cdouble z(za, yi);
                INFO("ell=", ell, " z=", za, "+", yi, "i");
                CHECK(wronskian_residual(ell, z) < 1e-10);
            }
}

TEST_CASE("three-term recurrence is consistent across branch switches") {
    const cdouble zs[] = {{0.3, 0.0}, {0.9, 0.1}, {6.7, 0.0}, {30.0, -3.0},
                          {120.0, 10.0}, {480.0, -20.0}};
    for (cdouble z : zs) {
        std::vector<sph_bessel_value> j, y;
        sph_j_table(62, z, j);
        sph_y_table(62, z, y);
        for (int ell = 1; ell <= 61; ++ell) {
            INFO("ell=", ell, " z=", z.real(), "+", z.imag(), "i");
            CHECK(recurrence_defect(j[ell - 1], j[ell], j[ell + 1], ell, z) < 1e-10);
            CHECK(recurrence_defect(y[ell - 1], y[ell], y[ell + 1], ell, z) < 1e-10);
        }
    }
}

TEST_CASE("pointwise and table evaluations agree across internal branches") {
    // ell = 10 at |z| = 30 evaluates via upward recurrence; a table up to 40
    // takes the downward path. Both must land on the same numbers.
    const cdouble z(30.0, 0.0);
    std::vector<sph_bessel_value> tab;
    sph_j_table(40, z, tab);
    const auto p = sph_j(10, z);
    CHECK(std::abs(full(tab[10]) - full(p)) < 1e-12 * std::abs(full(p)));
    const auto pc = sph_j(10, cdouble(30.0, 4.0));
    sph_j_table(40, cdouble(30.0, 4.0), tab);
    CHECK(std::abs(full(tab[10]) - full(pc)) < 1e-12 * std::abs(full(pc)));
}

TEST_CASE("conjugate symmetry for j and y") {
    const cdouble zs[] = {{2.0, 1.0}, {15.0, -4.0}, {70.0, 12.0}, {0.3, 0.05}};
    for (cdouble z : zs)
        for (int ell : {0, 1, 4, 11, 33}) {
            const auto a = sph_j(ell, z);
            const auto b = sph_j(ell, std::conj(z));
            CHECK(std::abs(full(b) - std::conj(full(a))) <= 1e-12 * std::abs(full(a)));
            const auto c = sph_y(ell, z);
            const auto d = sph_y(ell, std::conj(z));
            CHECK(std::abs(full(d) - std::conj(full(c))) <= 1e-12 * std::abs(full(c)));
        }
}

TEST_CASE("small-argument limit j_ell * (2ell+1)!!/z^ell -> 1") {
    const cdouble z(1e-3, 0.0);
    double dfact = 1.0;
    for (int ell = 0; ell <= 8; ++ell) {
        if (ell > 0) dfact *= 2.0 * ell + 1.0;
        const auto v = sph_j(ell, z);
        const cdouble ratio = full(v) * dfact / std::pow(z, cdouble(double(ell), 0.0));
        CHECK(std::abs(ratio - 1.0) < 1e-6);
    }
}

TEST_CASE("deep elliptic orders carry an explicit scale instead of underflowing") {
    const auto v = sph_j(300, {0.5, 0.0});
    CHECK(v.log_scale < -700.0);
    CHECK(std::isfinite(v.f.real()));
    CHECK(std::abs(v.f) > 0.0);
    // and the dominant counterpart overflows into a positive scale
    const auto w = sph_y(300, {0.5, 0.0});
    CHECK(w.log_scale > 700.0);
    // their cross-wronskian still closes
    CHECK(wronskian_residual(300, {0.5, 0.0}) < 1e-10);
}

TEST_CASE("large imaginary parts factor into the scale") {
    const cdouble z(10.0, 400.0);
    const auto j = sph_j(0, z);
    // |j0| ~ e^{400}/(2|z|): the scale must carry roughly 400
    CHECK(j.log_scale + std::log(std::abs(j.f)) ==
          doctest::Approx(400.0 - std::log(2.0 * std::abs(z))).epsilon(1e-3));
    CHECK(wronskian_residual(3, z) < 1e-10);
}

TEST_CASE("radiating branch matches j - i y where that is well conditioned") {
    for (cdouble z : {cdouble(5.0, -0.5), cdouble(12.0, 0.0), cdouble(3.0, -1.0)})
        for (int ell : {0, 1, 3, 8}) {
            const auto h = sph_h_radiating(ell, z);
            const cdouble want = full(sph_j(ell, z)) - cdouble(0.0, 1.0) * full(sph_y(ell, z));
            CHECK(std::abs(full(h) - want) < 1e-10 * std::abs(want));
        }
}

TEST_CASE("radiating branch decays in the lower half-plane") {
    // |h(z)| ~ e^{Im z}: far below the axis the naive j - i y combination
    // would cancel to noise, the direct evaluation must stay clean.
    const cdouble z(20.0, -18.0);
    const auto h = sph_h_radiating(0, z);
    const cdouble exact = cdouble(0.0, 1.0) * std::exp(cdouble(0.0, -1.0) * z) / z;
    CHECK(std::abs(full(h) - exact) < 1e-12 * std::abs(exact));
    // l = 1 closed form: e^{-iz} (i - z)/z^2
    const auto h1 = sph_h_radiating(1, z);
    const cdouble exact1 =
        std::exp(cdouble(0.0, -1.0) * z) * (cdouble(0.0, 1.0) - z) / (z * z);
    CHECK(std::abs(full(h1) - exact1) < 1e-12 * std::abs(exact1));
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(sph_j(0, {0.0, 0.0}), error);
    CHECK_THROWS_AS(sph_j(-1, {1.0, 0.0}), error);
    const double nan = std::nan("");
    CHECK_THROWS_AS(sph_y(2, {nan, 0.0}), error);
}
