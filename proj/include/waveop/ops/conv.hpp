// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Direct 2D convolution (cross-correlation) and bilinear resampling on
// channel-major [C x H x W] tensors. Desk-scale problem sizes make the naive
// loops perfectly adequate once vectorized by the compiler.

#include <cmath>

#include "waveop/tape.hpp"

namespace waveop {

struct Conv2dSpec {
    int stride_h = 1, stride_w = 1;
    int pad_h = 0, pad_w = 0;
    int dil_h = 1, dil_w = 1;
};

inline int64_t conv_out_extent(int64_t in, int k, int stride, int pad, int dil) {
    const int64_t span = int64_t(dil) * (k - 1) + 1;
    const int64_t num = in + 2 * int64_t(pad) - span;
    if (num < 0) throw shape_error("conv2d: kernel does not fit input");
    return num / stride + 1;
}

// x [Cin x H x W], w [Cout x Cin x kh x kw], b [Cout] -> [Cout x Ho x Wo]
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dSpec& sp = {}) {
    if (x.rank() != 3 || w.rank() != 4 || b.rank() != 1)
        throw shape_error("conv2d: want x[C,H,W], w[Co,Ci,kh,kw], b[Co]");
    const int64_t Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int64_t Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (w.dim(1) != Ci || b.dim(0) != Co)
        throw shape_error("conv2d: channel mismatch " + shape_str(x.shape()) + " vs " +
                          shape_str(w.shape()));
    const int64_t Ho = conv_out_extent(H, int(kh), sp.stride_h, sp.pad_h, sp.dil_h);
    const int64_t Wo = conv_out_extent(W, int(kw), sp.stride_w, sp.pad_w, sp.dil_w);
    Tensor out({Co, Ho, Wo});
    for (int64_t co = 0; co < Co; ++co)
        for (int64_t oy = 0; oy < Ho; ++oy)
            for (int64_t ox = 0; ox < Wo; ++ox) {
                double acc = b[co];
                for (int64_t ci = 0; ci < Ci; ++ci)
                    for (int64_t ky = 0; ky < kh; ++ky) {
                        const int64_t iy = oy * sp.stride_h - sp.pad_h + ky * sp.dil_h;
                        if (iy < 0 || iy >= H) continue;
                        for (int64_t kx = 0; kx < kw; ++kx) {
                            const int64_t ix = ox * sp.stride_w - sp.pad_w + kx * sp.dil_w;
                            if (ix < 0 || ix >= W) continue;
                            acc += x[(ci * H + iy) * W + ix] * w[((co * Ci + ci) * kh + ky) * kw + kx];
                        }
                    }
                out[(co * Ho + oy) * Wo + ox] = acc;
            }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), ws = w.storage(), bs = b.storage(), os = out.storage();
        Tensor xc = x, wc = w;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), Ci * H * W);
            double* gw = t.grad_acc(ws.get(), Co * Ci * kh * kw);
            double* gb = t.grad_acc(bs.get(), Co);
            for (int64_t co = 0; co < Co; ++co)
                for (int64_t oy = 0; oy < Ho; ++oy)
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        const double g = go[(co * Ho + oy) * Wo + ox];
                        if (g == 0.0) continue;
                        gb[co] += g;
                        for (int64_t ci = 0; ci < Ci; ++ci)
                            for (int64_t ky = 0; ky < kh; ++ky) {
                                const int64_t iy = oy * sp.stride_h - sp.pad_h + ky * sp.dil_h;
                                if (iy < 0 || iy >= H) continue;
                                for (int64_t kx = 0; kx < kw; ++kx) {
                                    const int64_t ix = ox * sp.stride_w - sp.pad_w + kx * sp.dil_w;
                                    if (ix < 0 || ix >= W) continue;
                                    gx[(ci * H + iy) * W + ix] +=
                                        g * wc[((co * Ci + ci) * kh + ky) * kw + kx];
                                    gw[((co * Ci + ci) * kh + ky) * kw + kx] +=
                                        g * xc[(ci * H + iy) * W + ix];
                                }
                            }
                    }
        });
    }
    return out;
}

// Same-size 3x3-style convenience: zero padding chosen so output extent
// matches input for odd kernels at stride 1.
inline Tensor conv2d_same(const Tensor& x, const Tensor& w, const Tensor& b, int dil = 1) {
    Conv2dSpec sp;
    sp.dil_h = sp.dil_w = dil;
    sp.pad_h = int(dil * (w.dim(2) - 1) / 2);
    sp.pad_w = int(dil * (w.dim(3) - 1) / 2);
    return conv2d(x, w, b, sp);
}

// Pointwise channel mix: w [Co x Ci], b [Co], on [Ci x H x W].
inline Tensor conv1x1(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.rank() != 3 || w.rank() != 2 || b.rank() != 1 || w.dim(1) != x.dim(0) ||
        b.dim(0) != w.dim(0))
        throw shape_error("conv1x1: bad shapes");
    return conv2d(x, w.view({w.dim(0), w.dim(1), 1, 1}), b);
}

// Bilinear resample [C x H x W] -> [C x Ho x Wo] with corner alignment:
// source coordinate of output index i is i*(in-1)/(out-1).
inline Tensor bilinear_resize(const Tensor& x, int64_t Ho, int64_t Wo) {
    if (x.rank() != 3) throw shape_error("bilinear_resize: want rank 3");
    if (Ho < 1 || Wo < 1) throw shape_error("bilinear_resize: bad target size");
    const int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    std::vector<int64_t> y0(static_cast<size_t>(Ho)), x0(static_cast<size_t>(Wo));
    std::vector<double> fy(static_cast<size_t>(Ho)), fx(static_cast<size_t>(Wo));
    for (int64_t i = 0; i < Ho; ++i) {
        const double s = Ho == 1 ? 0.0 : double(i) * double(H - 1) / double(Ho - 1);
        int64_t lo = int64_t(std::floor(s));
        if (lo > H - 2) lo = std::max<int64_t>(H - 2, 0);
        y0[size_t(i)] = lo;
        fy[size_t(i)] = H == 1 ? 0.0 : s - double(lo);
    }
    for (int64_t i = 0; i < Wo; ++i) {
        const double s = Wo == 1 ? 0.0 : double(i) * double(W - 1) / double(Wo - 1);
        int64_t lo = int64_t(std::floor(s));
        if (lo > W - 2) lo = std::max<int64_t>(W - 2, 0);
        x0[size_t(i)] = lo;
        fx[size_t(i)] = W == 1 ? 0.0 : s - double(lo);
    }
    Tensor out({C, Ho, Wo});
    const int64_t y1step = H > 1 ? 1 : 0, x1step = W > 1 ? 1 : 0;
    for (int64_t c = 0; c < C; ++c)
        for (int64_t oy = 0; oy < Ho; ++oy) {
            const int64_t ya = y0[size_t(oy)], yb = ya + y1step;
            const double wy = fy[size_t(oy)];
            for (int64_t ox = 0; ox < Wo; ++ox) {
                const int64_t xa = x0[size_t(ox)], xb = xa + x1step;
                const double wx = fx[size_t(ox)];
                out[(c * Ho + oy) * Wo + ox] =
                    (1 - wy) * (1 - wx) * x[(c * H + ya) * W + xa] +
                    (1 - wy) * wx * x[(c * H + ya) * W + xb] +
                    wy * (1 - wx) * x[(c * H + yb) * W + xa] +
                    wy * wx * x[(c * H + yb) * W + xb];
            }
        }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), C * H * W);
            for (int64_t c = 0; c < C; ++c)
                for (int64_t oy = 0; oy < Ho; ++oy) {
                    const int64_t ya = y0[size_t(oy)], yb = ya + y1step;
                    const double wy = fy[size_t(oy)];
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        const int64_t xa = x0[size_t(ox)], xb = xa + x1step;
                        const double wx = fx[size_t(ox)];
                        const double g = go[(c * Ho + oy) * Wo + ox];
                        gx[(c * H + ya) * W + xa] += g * (1 - wy) * (1 - wx);
                        gx[(c * H + ya) * W + xb] += g * (1 - wy) * wx;
                        gx[(c * H + yb) * W + xa] += g * wy * (1 - wx);
                        gx[(c * H + yb) * W + xb] += g * wy * wx;
                    }
                }
        });
    }
    return out;
}

} // namespace waveop
