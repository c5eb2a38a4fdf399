// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>

#include "layerspec/domain.hpp"
#include "layerspec/errors.hpp"
#include "layerspec/spectral.hpp"

using namespace layerspec;
using namespace layerspec::spectral;

namespace {

layered_domain single_layer(double a0 = 0.0) {
    layered_domain d;
    d.radii = {1.0, 2.0};
    d.speeds = {1.0};
    d.a0 = a0;
    d.inner_bc = inner_bc_kind::dirichlet;
    return d;
}

layered_domain mono() {
    layered_domain d;
    d.radii = {1.0, 2.0, 3.0};
    d.speeds = {2.0, 1.0};
    d.a0 = 1.0;
    d.inner_bc = inner_bc_kind::dirichlet;
    return d;
}

cdouble full(const scaled_value& v) { return v.f * std::exp(v.log_scale); }
cdouble state_value(const boundary_state& s) { return s.value * std::exp(s.log_scale); }
cdouble state_deriv(const boundary_state& s) { return s.deriv * std::exp(s.log_scale); }

// Independent oracle for the ell = 0 single-layer problem: with v = r R,
// v'' + lambda^2 v = 0, v(1) = 0, v'(1) = 1, so v = sin(lambda (r-1))/lambda
// and the outer Neumann row (a0 = 0) reads 2 lambda cos lambda - sin lambda = 0.
double oracle_first_root() {
    auto f = [](double l) { return 2.0 * l * std::cos(l) - std::sin(l); };
    double lo = 1.0, hi = 1.5; // f(1) > 0, f(1.5) < 0
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("propagation reproduces the closed-form single-layer solution") {
    // R(r) = sin(lambda (r-1))/(lambda r); at lambda = pi: R(2) = 0, R'(2) = -1/2
    const auto d = single_layer();
    const cdouble lam(M_PI, 0.0);
    const auto out = propagate(d, 0, lam, inner_seed(d), 1.0, 2.0);
    CHECK(std::abs(state_value(out)) < 1e-14);
    CHECK(std::abs(state_deriv(out) - cdouble(-0.5, 0.0)) < 1e-13);

    // generic lambda, generic interior radius
    const cdouble lam2(2.3, 0.7);
    const double r = 1.643;
    const auto mid = propagate(d, 0, lam2, inner_seed(d), 1.0, r);
    const cdouble v = std::sin(lam2 * (r - 1.0)) / lam2;
    const cdouble vp = std::cos(lam2 * (r - 1.0));
    const cdouble R = v / r;
    const cdouble Rp = vp / r - v / (r * r);
    CHECK(std::abs(state_value(mid) - R) < 1e-13 * std::abs(R));
    CHECK(std::abs(state_deriv(mid) - Rp) < 1e-13 * std::abs(Rp));
}

TEST_CASE("propagation is invertible") {
    const auto d = mono();
    const cdouble lam(7.3, 0.9);
    for (int ell : {0, 3, 9}) {
        const auto fwd = propagate(d, ell, lam, inner_seed(d), 1.0, 3.0);
        const auto back = propagate(d, ell, lam, fwd, 3.0, 1.0);
        const auto seed = inner_seed(d);
        // compare as rays: scale-normalized cross product vanishes
        const cdouble cross = state_value(back) * state_deriv(seed) -
                              state_deriv(back) * state_value(seed);
        const double mag = std::abs(state_value(back)) + std::abs(state_deriv(back));
        CHECK(std::abs(cross) < 1e-11 * mag);
    }
}

TEST_CASE("characteristic at the first single-layer eigenvalue") {
    const auto d = single_layer();
    const double lam0 = oracle_first_root();
    CHECK(lam0 == doctest::Approx(1.16556118520721).epsilon(1e-10));
    const auto v = characteristic(d, {1, 0}, {lam0, 0.0});
    CHECK(std::abs(full(v)) < 1e-12);
    // and clearly nonzero away from the root
    CHECK(std::abs(full(characteristic(d, {1, 0}, {1.4, 0.0}))) > 1e-3);
}

TEST_CASE("find_roots pins the oracle root and certifies the count") {
    const auto d = single_layer();
    const double lam0 = oracle_first_root();
    const auto res = find_roots(d, {1, 0}, {0.5, 2.0, -0.2, 0.2});
    REQUIRE(res.roots.size() == 1);
    CHECK(res.certified);
    CHECK(res.winding_count == 1);
    CHECK(std::abs(res.roots[0].lambda - cdouble(lam0, 0.0)) < 1e-9);
    CHECK(std::abs(res.roots[0].value - res.roots[0].lambda) == 0.0); // j = 1 reports lambda
}

TEST_CASE("j = 0 reports generator eigenvalues z = lambda^2") {
    const auto d = single_layer();
    const double lam0 = oracle_first_root(); // a0 = 0 makes j = 0 and j = 1 rows identical
    const auto res = find_roots(d, {0, 0}, {0.5, 2.0, -0.2, 0.2});
    REQUIRE(res.roots.size() == 1);
    CHECK(res.certified);
    CHECK(std::abs(res.roots[0].value - cdouble(lam0 * lam0, 0.0)) < 1e-8);
}

TEST_CASE("self-adjoint eigenvalues stay on the real axis") {
    const auto d = single_layer();
    const auto res = find_roots(d, {1, 0}, {0.5, 12.0, -0.5, 0.5});
    CHECK(res.certified);
    CHECK(res.roots.size() >= 3);
    for (const auto& r : res.roots) CHECK(std::abs(r.lambda.imag()) < 1e-9);
}

TEST_CASE("dissipation pushes every root into the upper half-plane") {
    const auto d = mono();
    for (int ell : {0, 2, 5}) {
        const auto res = find_roots(d, {1, ell}, {3.0, 12.0, -0.75, 3.0});
        CHECK(res.certified);
        CHECK_FALSE(res.roots.empty());
        for (const auto& r : res.roots) {
            INFO("ell=", ell, " root=", r.lambda.real(), "+", r.lambda.imag(), "i");
            CHECK(r.lambda.imag() > 0.0);
        }
    }
    // j = 0: the reported z = lambda^2 carries the dissipation sign
    const auto res0 = find_roots(d, {0, 0}, {3.0, 12.0, -0.75, 3.0});
    CHECK(res0.certified);
    CHECK_FALSE(res0.roots.empty());
    for (const auto& r : res0.roots) CHECK(r.value.imag() > 0.0);
}

TEST_CASE("roots mirror as lambda -> -conj(lambda)") {
    const auto d = mono();
    const auto right = find_roots(d, {1, 1}, {3.0, 9.0, 0.0, 2.5});
    const auto left = find_roots(d, {1, 1}, {-9.0, -3.0, 0.0, 2.5});
    CHECK(right.certified);
    CHECK(left.certified);
    REQUIRE(right.roots.size() == left.roots.size());
    REQUIRE_FALSE(right.roots.empty());
    for (std::size_t i = 0; i < right.roots.size(); ++i) {
        const cdouble mirrored = -std::conj(left.roots[left.roots.size() - 1 - i].lambda);
        CHECK(std::abs(right.roots[i].lambda - mirrored) < 1e-8);
    }
}

TEST_CASE("a fictitious interface changes nothing") {
    const auto plain = single_layer();
    layered_domain split = plain;
    split.radii = {1.0, 1.37, 2.0};
    split.speeds = {1.0, 1.0};

    const auto ra = find_roots(plain, {1, 2}, {1.0, 7.0, -0.3, 0.3});
    const auto rb = find_roots(split, {1, 2}, {1.0, 7.0, -0.3, 0.3});
    CHECK(ra.certified);
    CHECK(rb.certified);
    REQUIRE(ra.roots.size() == rb.roots.size());
    for (std::size_t i = 0; i < ra.roots.size(); ++i)
        CHECK(std::abs(ra.roots[i].lambda - rb.roots[i].lambda) < 1e-8);

    // mode shapes agree up to a constant phase: compare magnitudes
    const auto g1 = make_mode_grid_dr(plain, 0.01);
    const auto g2 = make_mode_grid_dr(split, 0.01);
    REQUIRE(g1.r.size() == g2.r.size());
    const cdouble lam = ra.roots[0].lambda;
    const auto s1 = mode_shape(plain, {1, 2}, lam, g1);
    const auto s2 = mode_shape(split, {1, 2}, lam, g2);
    for (std::size_t i = 0; i < s1.values.size(); ++i)
        CHECK(std::abs(std::abs(s1.values[i]) - std::abs(s2.values[i])) < 1e-8);
}

TEST_CASE("geometric rescaling maps roots as lambda -> lambda/s") {
    const auto base = single_layer();
    layered_domain scaled = base;
    const double s = 3.0;
    scaled.radii = {s * 1.0, s * 2.0};

    const double lam0 = oracle_first_root();
    const auto res = find_roots(scaled, {1, 0}, {lam0 / s - 0.2, lam0 / s + 0.2, -0.1, 0.1});
    REQUIRE(res.roots.size() == 1);
    CHECK(std::abs(res.roots[0].lambda - cdouble(lam0 / s, 0.0)) < 1e-9);
}

TEST_CASE("mode shape matches the closed form") {
    const auto d = single_layer();
    const auto g = make_mode_grid(d, 301);
    const cdouble lam(M_PI, 0.0);
    const auto shape = mode_shape(d, {1, 0}, lam, g);
    // R ~ sin(pi (r-1))/r, peak normalized to 1
    double peak = 0.0;
    std::vector<double> want(g.r.size());
    for (std::size_t i = 0; i < g.r.size(); ++i) {
        want[i] = std::abs(std::sin(M_PI * (g.r[i] - 1.0)) / g.r[i]);
        peak = std::max(peak, want[i]);
    }
    for (std::size_t i = 0; i < g.r.size(); ++i)
        CHECK(std::abs(std::abs(shape.values[i]) - want[i] / peak) < 1e-10);
}

TEST_CASE("trapped ordering produces far smaller gaps than the monotone one") {
    // shallow check on a small window; the full comparison runs in acceptance
    layered_domain rev = mono();
    rev.speeds = {1.0, 2.0};
    const search_box box{4.0, 7.0, -0.1, 2.5};
    const double gap_mono = spectral_gap(mono(), 1, 2, box);
    const double gap_rev = spectral_gap(rev, 1, 2, box);
    CHECK(gap_mono > 0.0);
    CHECK(gap_rev > 0.0);
    CHECK(gap_rev < gap_mono);
}

TEST_CASE("invalid boxes are rejected") {
    const auto d = single_layer();
    CHECK_THROWS_AS(find_roots(d, {1, 0}, {2.0, 1.0, -1.0, 1.0}), error);
    // a box straddling lambda = 0
    bool threw = false;
    try {
        find_roots(d, {1, 0}, {-1.0, 1.0, -1.0, 1.0});
    } catch (const error& e) {
        threw = true;
        CHECK(e.code == errc::invalid_box);
        CHECK(std::string(e.what()).find("lambda = 0") != std::string::npos);
    }
    CHECK(threw);
    // j = 0 must not cross into Re lambda < 0
    CHECK_THROWS_AS(find_roots(d, {0, 0}, {-2.0, -1.0, 0.5, 1.0}), error);
}

TEST_CASE("propagate validates its endpoints") {
    const auto d = single_layer();
    CHECK_THROWS_AS(propagate(d, 0, {1.0, 0.0}, inner_seed(d), 1.0, 2.5), error);
    CHECK_THROWS_AS(propagate(d, 0, {0.0, 0.0}, inner_seed(d), 1.0, 2.0), error);
    CHECK_THROWS_AS(propagate(d, -1, {1.0, 0.0}, inner_seed(d), 1.0, 2.0), error);
}
