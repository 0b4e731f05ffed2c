// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "test_util.hpp"
#include "waveop/metrics.hpp"

using namespace waveop;
using testutil::rand_tensor;

namespace {

constexpr double kPi = 3.14159265358979323846;

Tensor tone_field(int64_t H, int64_t W, double ky, double kx) {
    Tensor t({H, W});
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            t[y * W + x] = std::cos(2.0 * kPi * (ky * double(y) / double(H) +
                                                 kx * double(x) / double(W)));
    return t;
}

} // namespace

TEST_CASE("pointwise error metrics") {
    Tensor a = Tensor::from_vector({2, 2}, {0.0, 0.0, 3.0, 4.0});
    Tensor b = Tensor::zeros({2, 2});
    CHECK(mae(a, b) == Catch::Approx(1.75).margin(1e-12));
    CHECK(rmse(a, b) == Catch::Approx(2.5).margin(1e-12));
    CHECK(mae(a, a) == 0.0);
    CHECK(rmse(a, a) == 0.0);
    CHECK_THROWS_AS(mae(a, Tensor::zeros({2, 3})), shape_error);
}

TEST_CASE("ssim fundamentals") {
    Tensor a = rand_tensor({16, 16}, 5, 0.0, 1.0);
    Tensor b = rand_tensor({16, 16}, 6, 0.0, 1.0);

    CHECK(ssim(a, a, 1.0) == Catch::Approx(1.0).margin(1e-9));
    CHECK(ssim(a, b, 1.0) == Catch::Approx(ssim(b, a, 1.0)).margin(1e-12));
    CHECK(ssim(a, b, 1.0) < 1.0);

    // Channel-leading rank-3 views are accepted.
    CHECK(ssim(a.view({1, 16, 16}), a, 1.0) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("ssim of two flat images is the luminance floor") {
    // mu_x = 0, mu_y = 1, unit data range: the structural factor is exactly 1
    // and the luminance factor is C1 / (1 + C1) with C1 = 1e-4.
    Tensor x = Tensor::zeros({16, 16});
    Tensor y = Tensor::ones({16, 16});
    const double expect = 1e-4 / (1.0 + 1e-4);
    CHECK(ssim(x, y, 1.0) == Catch::Approx(expect).margin(1e-12));
    CHECK(ssim(x, y, 1.0) == Catch::Approx(9.999e-5).margin(1e-7));
}

TEST_CASE("anticorrelated structure scores negative") {
    // A period-2 checkerboard has near-zero local means inside the Gaussian
    // window, so the luminance factor stays positive while the structural
    // factor flips sign against its negation.
    Tensor a({32, 32});
    for (int64_t y = 0; y < 32; ++y)
        for (int64_t x = 0; x < 32; ++x) a[y * 32 + x] = ((y + x) % 2 == 0) ? 1.0 : -1.0;
    Tensor na({32, 32});
    for (int64_t i = 0; i < na.numel(); ++i) na[i] = -a[i];
    CHECK(ssim(a, na, 2.0) < 0.0);
}

TEST_CASE("ssim rejects bad inputs") {
    Tensor small = Tensor::zeros({8, 8});
    CHECK_THROWS_AS(ssim(small, small, 1.0), shape_error); // window 11 > 8
    Tensor ok = Tensor::zeros({16, 16});
    CHECK_THROWS_AS(ssim(ok, Tensor::zeros({16, 15}), 1.0), shape_error);
    CHECK_THROWS_AS(ssim(ok, ok, 0.0), numeric_error);
    CHECK(ssim(small, small, 1.0, 5) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("dominant frequency of a pure tone") {
    Tensor f = tone_field(70, 70, 7.0, 0.0);
    const SpectrumDiagnostics d = spectrum_diagnostics(f);
    CHECK(d.f_dom == Catch::Approx(7.0).margin(1e-9));
    CHECK(d.r_star == Catch::Approx(7.0 / std::hypot(35.0, 35.0)).margin(1e-9));
    CHECK(d.r_star == Catch::Approx(0.141421).margin(1e-5));
    // A 7-cycle tone sits well inside the low band at tau = 0.25.
    CHECK(d.hf_lf < 1e-9);
}

TEST_CASE("constant fields have no dominant frequency") {
    const SpectrumDiagnostics d = spectrum_diagnostics(Tensor::full({32, 32}, 3.0));
    CHECK(d.f_dom == 0.0);
    CHECK(d.r_star == 0.0);
    CHECK(d.hf_lf == 0.0);
}

TEST_CASE("band ratio orders high- and low-frequency mixtures") {
    // Same two tones, opposite energy split.
    Tensor lo_heavy({32, 32}), hi_heavy({32, 32});
    Tensor lo = tone_field(32, 32, 2.0, 0.0), hi = tone_field(32, 32, 13.0, 0.0);
    for (int64_t i = 0; i < lo.numel(); ++i) {
        lo_heavy[i] = 2.0 * lo[i] + 0.5 * hi[i];
        hi_heavy[i] = 0.5 * lo[i] + 2.0 * hi[i];
    }
    const double r_lo = spectrum_diagnostics(lo_heavy).hf_lf;
    const double r_hi = spectrum_diagnostics(hi_heavy).hf_lf;
    CHECK(r_lo < 1.0);
    CHECK(r_hi > 1.0);
    CHECK(r_hi > r_lo);
}

TEST_CASE("log-spectrum correlation") {
    Tensor a = rand_tensor({24, 24}, 11);
    Tensor b = rand_tensor({24, 24}, 12);
    CHECK(spectral_correlation(a, a) == Catch::Approx(1.0).margin(1e-12));
    const double r = spectral_correlation(a, b);
    CHECK(r <= 1.0);
    CHECK(r >= -1.0);
    // Flat spectra on both sides degenerate to perfect agreement.
    CHECK(spectral_correlation(Tensor::full({8, 8}, 2.0), Tensor::full({8, 8}, 2.0)) == 1.0);
}

TEST_CASE("spectral energy ratio") {
    Tensor v = rand_tensor({20, 20}, 21, 0.5, 2.0);
    Tensor half({20, 20});
    for (int64_t i = 0; i < v.numel(); ++i) half[i] = 0.5 * v[i];
    CHECK(energy_ratio(half, v) == Catch::Approx(0.25).margin(1e-9));
    CHECK(energy_ratio(v, v) == Catch::Approx(1.0).margin(1e-12));

    // Parseval: the spectral ratio equals the spatial energy ratio.
    Tensor w = rand_tensor({20, 20}, 22, 0.5, 2.0);
    double num = 0, den = 0;
    for (int64_t i = 0; i < v.numel(); ++i) {
        num += w[i] * w[i];
        den += v[i] * v[i];
    }
    CHECK(energy_ratio(w, v) == Catch::Approx(num / den).margin(1e-9));

    CHECK_THROWS_AS(energy_ratio(v, Tensor::zeros({20, 20})), numeric_error);
}

TEST_CASE("per-sample report row") {
    Tensor gt = rand_tensor({1, 16, 16}, 31, 1.5, 4.5);
    const SampleMetrics m = compute_sample_metrics("s0001", "curve", gt, gt, 3.0);
    CHECK(m.mae == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.ssim == Catch::Approx(1.0).margin(1e-9));
    CHECK(m.spec_corr == Catch::Approx(1.0).margin(1e-9));
    CHECK(m.energy_ratio == Catch::Approx(1.0).margin(1e-12));

    CHECK(metrics_csv_header() ==
          "sample_id,family,mae,rmse,ssim,f_dom,r_star,hf_lf,spec_corr,energy_ratio");
    const std::string row = metrics_csv_row(m);
    CHECK(row.substr(0, 12) == "s0001,curve,");
    CHECK(row.find("nan") == std::string::npos);
}
