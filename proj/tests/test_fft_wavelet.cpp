// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waveop/fft.hpp"
#include "waveop/wavelet.hpp"

using namespace waveop;
using Catch::Approx;
using fft::cplx;

namespace {

std::vector<cplx> rand_signal(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<cplx> v(static_cast<size_t>(n));
    for (auto& c : v) c = {d(rng), d(rng)};
    return v;
}

std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
    const int n = int(x.size());
    std::vector<cplx> y(x.size());
    for (int k = 0; k < n; ++k) {
        cplx acc = 0;
        for (int j = 0; j < n; ++j)
            acc += x[size_t(j)] * std::polar(1.0, -2.0 * M_PI * j * k / n);
        y[size_t(k)] = acc;
    }
    return y;
}

} // namespace

TEST_CASE("1d transform matches the direct definition") {
    for (int n : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 21, 35, 70}) {
        auto x = rand_signal(n, 100 + uint64_t(n));
        auto want = naive_dft(x);
        std::vector<cplx> got(x.size());
        fft::plan_for(n).forward(x.data(), got.data());
        double worst = 0;
        for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[size_t(k)] - want[size_t(k)]));
        INFO("n = " << n);
        REQUIRE(worst < 1e-9);
    }
}

TEST_CASE("1d inverse round trip") {
    for (int n : {2, 6, 35, 70}) {
        auto x = rand_signal(n, 200 + uint64_t(n));
        std::vector<cplx> f(x.size()), back(x.size());
        fft::plan_for(n).forward(x.data(), f.data());
        fft::plan_for(n).inverse(f.data(), back.data());
        for (int k = 0; k < n; ++k) REQUIRE(std::abs(back[size_t(k)] - x[size_t(k)]) < 1e-12);
    }
}

TEST_CASE("impulse and single-tone spectra") {
    std::vector<cplx> delta(8, 0.0);
    delta[0] = 1.0;
    std::vector<cplx> f(8);
    fft::plan_for(8).forward(delta.data(), f.data());
    for (int k = 0; k < 8; ++k) REQUIRE(std::abs(f[size_t(k)] - cplx(1.0)) < 1e-12);

    // cos(2*pi*3 t/16) concentrates into bins 3 and 13 with weight n/2
    const int n = 16;
    std::vector<cplx> tone(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) tone[size_t(t)] = std::cos(2.0 * M_PI * 3 * t / n);
    std::vector<cplx> ft(static_cast<size_t>(n));
    fft::plan_for(n).forward(tone.data(), ft.data());
    for (int k = 0; k < n; ++k) {
        const double want = (k == 3 || k == 13) ? n / 2.0 : 0.0;
        REQUIRE(std::abs(ft[size_t(k)] - cplx(want)) < 1e-10);
    }
}

TEST_CASE("2d transform matches naive double loop") {
    const int h = 6, w = 10;
    auto x = rand_signal(h * w, 301);
    std::vector<cplx> got = x;
    fft::fft2_forward(got.data(), h, w);
    for (int ky = 0; ky < h; ++ky)
        for (int kx = 0; kx < w; ++kx) {
            cplx acc = 0;
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    acc += x[size_t(y * w + xx)] *
                           std::polar(1.0, -2.0 * M_PI * (double(ky) * y / h + double(kx) * xx / w));
            REQUIRE(std::abs(got[size_t(ky * w + kx)] - acc) < 1e-9);
        }
}

TEST_CASE("2d energy identity and round trip on the working grid") {
    const int h = 70, w = 70;
    auto x = rand_signal(h * w, 302);
    for (auto& c : x) c = {c.real(), 0.0}; // real field

    double spatial = 0;
    for (auto& c : x) spatial += std::norm(c);

    std::vector<cplx> f = x;
    fft::fft2_forward(f.data(), h, w);
    double spectral = 0;
    for (auto& c : f) spectral += std::norm(c);
    REQUIRE(spatial == Approx(spectral / double(h * w)).epsilon(1e-10));

    std::vector<cplx> back = f;
    fft::fft2_inverse(back.data(), h, w);
    double worst = 0;
    for (size_t i = 0; i < back.size(); ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
    REQUIRE(worst < 1e-11);
}

TEST_CASE("single-level analysis: constant block concentrates into LL") {
    const int h = 4, w = 4;
    std::vector<double> u(h * w, 3.0);
    std::vector<double> bands(4 * 2 * 2);
    wavelet::haar2_fwd_even(u.data(), h, w, bands.data());
    for (int i = 0; i < 4; ++i) REQUIRE(bands[size_t(i)] == Approx(6.0)); // 2x the constant
    for (int i = 4; i < 16; ++i) REQUIRE(bands[size_t(i)] == Approx(0.0).margin(1e-14));
}

TEST_CASE("analysis preserves energy and inverts exactly") {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> d(-2, 2);
    const int h = 6, w = 8;
    std::vector<double> u(size_t(h * w));
    for (auto& v : u) v = d(rng);

    std::vector<double> bands(size_t(4 * (h / 2) * (w / 2)));
    wavelet::haar2_fwd_even(u.data(), h, w, bands.data());

    double eu = 0, eb = 0;
    for (double v : u) eu += v * v;
    for (double v : bands) eb += v * v;
    REQUIRE(eu == Approx(eb).epsilon(1e-12));

    std::vector<double> back(u.size());
    wavelet::haar2_inv_even(bands.data(), h, w, back.data());
    for (size_t i = 0; i < u.size(); ++i) REQUIRE(back[i] == Approx(u[i]).margin(1e-13));
}

TEST_CASE("odd extents round trip through edge padding") {
    std::mt19937_64 rng(402);
    std::uniform_real_distribution<double> d(-2, 2);
    for (auto [h, w] : {std::pair{5, 7}, {35, 35}, {9, 4}, {70, 35}}) {
        std::vector<double> u(size_t(h * w));
        for (auto& v : u) v = d(rng);
        const int h2 = (h + 1) / 2, w2 = (w + 1) / 2;
        std::vector<double> bands(size_t(4 * h2 * w2));
        wavelet::haar2_forward(u.data(), h, w, bands.data());
        std::vector<double> back(u.size());
        wavelet::haar2_inverse(bands.data(), h, w, back.data());
        for (size_t i = 0; i < u.size(); ++i) REQUIRE(back[i] == Approx(u[i]).margin(1e-12));
    }
}

TEST_CASE("padded transforms satisfy the adjoint identity") {
    // <F x, y> == <x, F^T y> for both analysis and synthesis with odd extents.
    std::mt19937_64 rng(403);
    std::uniform_real_distribution<double> d(-1, 1);
    const int h = 5, w = 7, h2 = 3, w2 = 4;
    std::vector<double> x(size_t(h * w)), y(size_t(4 * h2 * w2));
    for (auto& v : x) v = d(rng);
    for (auto& v : y) v = d(rng);

    std::vector<double> fx(y.size());
    wavelet::haar2_forward(x.data(), h, w, fx.data());
    std::vector<double> fty(x.size());
    wavelet::haar2_forward_adjoint(y.data(), h, w, fty.data());
    double lhs = 0, rhs = 0;
    for (size_t i = 0; i < y.size(); ++i) lhs += fx[i] * y[i];
    for (size_t i = 0; i < x.size(); ++i) rhs += x[i] * fty[i];
    REQUIRE(lhs == Approx(rhs).epsilon(1e-12));

    std::vector<double> iy(x.size());
    wavelet::haar2_inverse(y.data(), h, w, iy.data());
    std::vector<double> itx(y.size());
    wavelet::haar2_inverse_adjoint(x.data(), h, w, itx.data());
    lhs = rhs = 0;
    for (size_t i = 0; i < x.size(); ++i) lhs += iy[i] * x[i];
    for (size_t i = 0; i < y.size(); ++i) rhs += y[i] * itx[i];
    REQUIRE(lhs == Approx(rhs).epsilon(1e-12));
}
