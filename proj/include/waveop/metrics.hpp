// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Evaluation metrics for predicted velocity models: pointwise errors, SSIM
// with a Gaussian window, and Fourier-domain diagnostics that quantify how
// much high-frequency structure a prediction carries relative to ground
// truth. Everything here is forward-only (never recorded on the tape).

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "waveop/fft.hpp"
#include "waveop/tensor.hpp"

namespace waveop {

inline double mae(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw shape_error("mae: shape mismatch");
    double acc = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / double(a.numel());
}

inline double rmse(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw shape_error("rmse: shape mismatch");
    double acc = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / double(a.numel()));
}

namespace detail {

// Accepts [H, W] or [1, H, W]; returns extents and the flat data pointer.
inline const double* as_plane(const Tensor& t, int64_t& H, int64_t& W, const char* where) {
    if (t.rank() == 2) {
        H = t.dim(0);
        W = t.dim(1);
    } else if (t.rank() == 3 && t.dim(0) == 1) {
        H = t.dim(1);
        W = t.dim(2);
    } else {
        throw shape_error(std::string(where) + ": want a single-channel 2D field, got " +
                          shape_str(t.shape()));
    }
    return t.data();
}

// Power spectrum |FFT2|^2 of a 2D field, row-major [H x W], unshifted.
inline std::vector<double> power_spectrum(const double* p, int64_t H, int64_t W) {
    std::vector<fft::cplx> buf(static_cast<size_t>(H * W));
    for (int64_t i = 0; i < H * W; ++i) buf[size_t(i)] = {p[i], 0.0};
    fft::fft2_forward(buf.data(), int(H), int(W));
    std::vector<double> pow(static_cast<size_t>(H * W));
    for (int64_t i = 0; i < H * W; ++i) pow[size_t(i)] = std::norm(buf[size_t(i)]);
    return pow;
}

// Distance of bin (ky, kx) from the zero-frequency bin after centering.
inline double bin_radius(int64_t ky, int64_t kx, int64_t H, int64_t W) {
    const double dy = double(ky <= H / 2 ? ky : ky - H);
    const double dx = double(kx <= W / 2 ? kx : kx - W);
    return std::hypot(dy, dx);
}

} // namespace detail

// Mean local SSIM over all fully-interior Gaussian windows.
inline double ssim(const Tensor& a, const Tensor& b, double data_range, int window = 11,
                   double sigma = 1.5) {
    int64_t H = 0, W = 0;
    const double* pa = detail::as_plane(a, H, W, "ssim");
    int64_t Hb = 0, Wb = 0;
    const double* pb = detail::as_plane(b, Hb, Wb, "ssim");
    if (H != Hb || W != Wb) throw shape_error("ssim: shape mismatch");
    if (window < 1 || window > H || window > W)
        throw shape_error("ssim: window does not fit the image");
    if (!(data_range > 0.0)) throw numeric_error("ssim: data range must be positive");

    std::vector<double> g(static_cast<size_t>(window) * window);
    const double c = (window - 1) / 2.0;
    double gsum = 0.0;
    for (int i = 0; i < window; ++i)
        for (int j = 0; j < window; ++j) {
            const double d2 = (i - c) * (i - c) + (j - c) * (j - c);
            g[size_t(i) * window + j] = std::exp(-d2 / (2.0 * sigma * sigma));
            gsum += g[size_t(i) * window + j];
        }
    for (double& v : g) v /= gsum;

    const double C1 = (0.01 * data_range) * (0.01 * data_range);
    const double C2 = (0.03 * data_range) * (0.03 * data_range);
    double acc = 0.0;
    int64_t count = 0;
    for (int64_t y = 0; y + window <= H; ++y)
        for (int64_t x = 0; x + window <= W; ++x) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int i = 0; i < window; ++i)
                for (int j = 0; j < window; ++j) {
                    const double wgt = g[size_t(i) * window + j];
                    const double va = pa[(y + i) * W + (x + j)];
                    const double vb = pb[(y + i) * W + (x + j)];
                    mx += wgt * va;
                    my += wgt * vb;
                    mxx += wgt * va * va;
                    myy += wgt * vb * vb;
                    mxy += wgt * va * vb;
                }
            const double sx = mxx - mx * mx;
            const double sy = myy - my * my;
            const double sxy = mxy - mx * my;
            acc += ((2 * mx * my + C1) * (2 * sxy + C2)) /
                   ((mx * mx + my * my + C1) * (sx + sy + C2));
            ++count;
        }
    return acc / double(count);
}

struct SpectrumDiagnostics {
    double f_dom = 0.0;  // radial index of the strongest non-DC bin
    double r_star = 0.0; // f_dom normalized by the corner frequency
    double hf_lf = 0.0;  // high-band to low-band energy ratio at tau = 0.25
};

inline SpectrumDiagnostics spectrum_diagnostics(const Tensor& field, double tau = 0.25) {
    int64_t H = 0, W = 0;
    const double* p = detail::as_plane(field, H, W, "spectrum_diagnostics");
    const std::vector<double> pow = detail::power_spectrum(p, H, W);

    double best = 0.0, best_r = 0.0, dc = pow[0];
    for (int64_t ky = 0; ky < H; ++ky)
        for (int64_t kx = 0; kx < W; ++kx) {
            if (ky == 0 && kx == 0) continue;
            const double e = pow[size_t(ky * W + kx)];
            if (e > best) {
                best = e;
                best_r = detail::bin_radius(ky, kx, H, W);
            }
        }
    SpectrumDiagnostics out;
    // A spectrum concentrated entirely at DC has no dominant frequency.
    const bool dc_only = best <= 1e-12 * std::max(dc, 1.0);
    out.f_dom = dc_only ? 0.0 : best_r;
    const double f_max = std::hypot(double(H) / 2.0, double(W) / 2.0);
    out.r_star = out.f_dom / f_max;

    if (dc_only) return out; // roundoff noise in the bands is not real energy
    const double cut = tau * f_max;
    double hf = 0.0, lf = 0.0;
    for (int64_t ky = 0; ky < H; ++ky)
        for (int64_t kx = 0; kx < W; ++kx) {
            if (ky == 0 && kx == 0) continue;
            const double r = detail::bin_radius(ky, kx, H, W);
            (r > cut ? hf : lf) += pow[size_t(ky * W + kx)];
        }
    if (lf == 0.0)
        out.hf_lf = hf == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
        out.hf_lf = hf / lf;
    return out;
}

// Pearson correlation of log10 power spectra (floored at 1e-12).
inline double spectral_correlation(const Tensor& a, const Tensor& b) {
    int64_t H = 0, W = 0;
    const double* pa = detail::as_plane(a, H, W, "spectral_correlation");
    int64_t Hb = 0, Wb = 0;
    const double* pb = detail::as_plane(b, Hb, Wb, "spectral_correlation");
    if (H != Hb || W != Wb) throw shape_error("spectral_correlation: shape mismatch");
    const std::vector<double> qa = detail::power_spectrum(pa, H, W);
    const std::vector<double> qb = detail::power_spectrum(pb, H, W);
    const int64_t n = H * W;
    std::vector<double> la(static_cast<size_t>(n)), lb(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        la[size_t(i)] = std::log10(qa[size_t(i)] + 1e-12);
        lb[size_t(i)] = std::log10(qb[size_t(i)] + 1e-12);
    }
    double ma = 0, mb = 0;
    for (int64_t i = 0; i < n; ++i) {
        ma += la[size_t(i)];
        mb += lb[size_t(i)];
    }
    ma /= double(n);
    mb /= double(n);
    double saa = 0, sbb = 0, sab = 0;
    for (int64_t i = 0; i < n; ++i) {
        const double da = la[size_t(i)] - ma, db = lb[size_t(i)] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return la == lb ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Total spectral energy of the prediction relative to ground truth.
inline double energy_ratio(const Tensor& pred, const Tensor& gt) {
    int64_t H = 0, W = 0;
    const double* pp = detail::as_plane(pred, H, W, "energy_ratio");
    int64_t Hg = 0, Wg = 0;
    const double* pg = detail::as_plane(gt, Hg, Wg, "energy_ratio");
    if (H != Hg || W != Wg) throw shape_error("energy_ratio: shape mismatch");
    const std::vector<double> qp = detail::power_spectrum(pp, H, W);
    const std::vector<double> qg = detail::power_spectrum(pg, H, W);
    double num = 0, den = 0;
    for (double v : qp) num += v;
    for (double v : qg) den += v;
    if (den == 0.0) throw numeric_error("energy_ratio: ground truth has zero energy");
    return num / den;
}

// One evaluated sample, as written to the report CSV.
struct SampleMetrics {
    std::string sample_id;
    std::string family;
    double mae = 0, rmse = 0, ssim = 0;
    double f_dom = 0, r_star = 0, hf_lf = 0;
    double spec_corr = 0, energy_ratio = 0;
};

inline SampleMetrics compute_sample_metrics(const std::string& id, const std::string& family,
                                            const Tensor& pred, const Tensor& gt,
                                            double data_range) {
    SampleMetrics m;
    m.sample_id = id;
    m.family = family;
    m.mae = mae(pred, gt);
    m.rmse = rmse(pred, gt);
    m.ssim = ssim(pred, gt, data_range);
    const SpectrumDiagnostics d = spectrum_diagnostics(pred);
    m.f_dom = d.f_dom;
    m.r_star = d.r_star;
    m.hf_lf = d.hf_lf;
    m.spec_corr = spectral_correlation(pred, gt);
    m.energy_ratio = energy_ratio(pred, gt);
    return m;
}

inline std::string metrics_csv_header() {
    return "sample_id,family,mae,rmse,ssim,f_dom,r_star,hf_lf,spec_corr,energy_ratio";
}

inline std::string metrics_csv_row(const SampleMetrics& m) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                  m.sample_id.c_str(), m.family.c_str(), m.mae, m.rmse, m.ssim, m.f_dom,
                  m.r_star, m.hf_lf, m.spec_corr, m.energy_ratio);
    return std::string(buf);
}

} // namespace waveop
