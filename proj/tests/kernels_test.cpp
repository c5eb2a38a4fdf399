// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "layerspec/kernels.hpp"

namespace k = layerspec::kernels;
using k::cdouble;

namespace {

struct data_set {
    std::vector<cdouble> a, b, out;
    std::vector<double> w, x;
};

data_set make_dataset(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    data_set d;
    d.a.resize(n);
    d.b.resize(n);
    d.out.resize(n);
    d.w.resize(n);
    d.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.a[i] = {u(rng), u(rng)};
        d.b[i] = {u(rng), u(rng)};
        d.w[i] = u(rng);
        d.x[i] = u(rng);
    }
    return d;
}

bool have_avx2() {
    try {
        k::force_isa(k::isa::avx2);
        k::force_isa(k::isa::scalar);
        return true;
    } catch (...) {
        k::force_isa(k::isa::scalar);
        return false;
    }
}

} // namespace

TEST_CASE("scalar kernels match straightforward loops") {
    k::force_isa(k::isa::scalar);
    auto d = make_dataset(137, 7);
    const std::size_t n = d.a.size();

    k::cmul(d.a.data(), d.b.data(), d.out.data(), n);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(d.out[i] - d.a[i] * d.b[i]) < 1e-15);

    k::rmul(d.w.data(), d.a.data(), d.out.data(), n);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(d.out[i] - d.w[i] * d.a[i]) < 1e-15);

    double nexp = 0.0;
    for (std::size_t i = 0; i < n; ++i) nexp += std::norm(d.a[i]);
    CHECK(k::norm2sq(d.a.data(), n) == doctest::Approx(nexp).epsilon(1e-13));

    cdouble dexp(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) dexp += std::conj(d.a[i]) * d.b[i];
    CHECK(std::abs(k::dotc(d.a.data(), d.b.data(), n) - dexp) < 1e-13);

    double wexp = 0.0;
    for (std::size_t i = 0; i < n; ++i) wexp += d.w[i] * std::norm(d.a[i]);
    CHECK(k::wsum_abs2(d.w.data(), d.a.data(), n) == doctest::Approx(wexp).epsilon(1e-13));

    double sexp = 0.0;
    for (std::size_t i = 0; i < n; ++i) sexp += d.w[i] * d.x[i] * d.x[i];
    CHECK(k::wsum_sq(d.w.data(), d.x.data(), n) == doctest::Approx(sexp).epsilon(1e-13));

    const cdouble alpha(0.3, -0.7);
    k::green_combine(d.w.data(), d.a.data(), d.b.data(), d.b.data(), d.a.data(), alpha,
                     d.out.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
        const cdouble want = alpha * d.w[i] * (d.a[i] * d.b[i] + d.b[i] * d.a[i]);
        CHECK(std::abs(d.out[i] - want) < 1e-14);
    }
}

TEST_CASE("avx2 kernels agree with scalar") {
    if (!have_avx2()) {
        MESSAGE("avx2 unavailable on this host, equivalence suite skipped");
        return;
    }
    // lengths straddling vector width and tail handling
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 64u, 129u, 1000u}) {
        auto d = make_dataset(n, 1000 + unsigned(n));
        std::vector<cdouble> got(n), want(n);

        k::force_isa(k::isa::scalar);
        k::cmul(d.a.data(), d.b.data(), want.data(), n);
        const double n2 = k::norm2sq(d.a.data(), n);
        const cdouble dc = k::dotc(d.a.data(), d.b.data(), n);
        const double wa = k::wsum_abs2(d.w.data(), d.a.data(), n);
        const double ws = k::wsum_sq(d.w.data(), d.x.data(), n);
        std::vector<cdouble> gc_want(n);
        k::green_combine(d.w.data(), d.a.data(), d.b.data(), d.b.data(), d.a.data(),
                         {0.5, 0.25}, gc_want.data(), n);

        k::force_isa(k::isa::avx2);
        k::cmul(d.a.data(), d.b.data(), got.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-14);
        CHECK(k::norm2sq(d.a.data(), n) == doctest::Approx(n2).epsilon(1e-13));
        CHECK(std::abs(k::dotc(d.a.data(), d.b.data(), n) - dc) < 1e-13);
        CHECK(k::wsum_abs2(d.w.data(), d.a.data(), n) == doctest::Approx(wa).epsilon(1e-13));
        CHECK(k::wsum_sq(d.w.data(), d.x.data(), n) == doctest::Approx(ws).epsilon(1e-13));
        std::vector<cdouble> gc_got(n);
        k::green_combine(d.w.data(), d.a.data(), d.b.data(), d.b.data(), d.a.data(),
                         {0.5, 0.25}, gc_got.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(gc_got[i] - gc_want[i]) < 1e-13);
    }
    k::force_isa(k::isa::scalar);
}

TEST_CASE("wave_step matches the reference stencil and respects bounds") {
    const std::size_t n = 41;
    std::vector<double> v(n), vo(n), cl(n), cp(n);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = u(rng);
        vo[i] = u(rng);
        cl[i] = 0.5 + 0.4 * u(rng);
        cp[i] = 0.01 * u(rng);
    }
    auto run = [&](k::isa which) {
        k::force_isa(which);
        std::vector<double> vn(n, 42.0);
        k::wave_step(vn.data(), v.data(), vo.data(), cl.data(), cp.data(), 1, n - 1);
        return vn;
    };
    k::force_isa(k::isa::scalar);
    auto got = run(k::isa::scalar);
    CHECK(got[0] == 42.0);      // untouched outside [i0, i1)
    CHECK(got[n - 1] == 42.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double want =
            2.0 * v[i] - vo[i] + cl[i] * (v[i - 1] - 2.0 * v[i] + v[i + 1]) - cp[i] * v[i];
        CHECK(got[i] == doctest::Approx(want).epsilon(1e-14));
    }
    if (have_avx2()) {
        auto vec = run(k::isa::avx2);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(vec[i] == doctest::Approx(got[i]).epsilon(1e-13));
    }
    k::force_isa(k::isa::scalar);
}

TEST_CASE("isa names are reported") {
    CHECK(k::isa_name(k::isa::scalar) == "scalar");
    CHECK(k::isa_name(k::isa::avx2) == "avx2");
    CHECK_FALSE(k::isa_name(k::active_isa()).empty());
}
