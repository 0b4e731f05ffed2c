// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Tape-aware single-level Haar analysis/synthesis on [C x H x W] fields.
// Band tensors are [C x 4 x ceil(H/2) x ceil(W/2)] with LL,LH,HL,HH order.
// Odd extents use edge replication on the way down, so synthesis needs the
// original extents to crop; both directions use exact transposes in backward.

#include "waveop/tape.hpp"
#include "waveop/wavelet.hpp"

namespace waveop {

inline Tensor haar_level(const Tensor& x) {
    if (x.rank() != 3) throw shape_error("haar_level: want [C,H,W]");
    const int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int64_t h2 = (H + 1) / 2, w2 = (W + 1) / 2;
    Tensor out({C, 4, h2, w2});
    for (int64_t c = 0; c < C; ++c)
        wavelet::haar2_forward(x.data() + c * H * W, int(H), int(W),
                               out.data() + c * 4 * h2 * w2);
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), C * H * W);
            std::vector<double> tmp(size_t(H * W));
            for (int64_t c = 0; c < C; ++c) {
                wavelet::haar2_forward_adjoint(go + c * 4 * h2 * w2, int(H), int(W), tmp.data());
                for (int64_t i = 0; i < H * W; ++i) gx[c * H * W + i] += tmp[size_t(i)];
            }
        });
    }
    return out;
}

inline Tensor haar_level_inverse(const Tensor& bands, int64_t H, int64_t W) {
    if (bands.rank() != 4 || bands.dim(1) != 4)
        throw shape_error("haar_level_inverse: want [C,4,h2,w2]");
    const int64_t C = bands.dim(0), h2 = bands.dim(2), w2 = bands.dim(3);
    if ((H + 1) / 2 != h2 || (W + 1) / 2 != w2)
        throw shape_error("haar_level_inverse: target extents do not match bands");
    Tensor out({C, H, W});
    for (int64_t c = 0; c < C; ++c)
        wavelet::haar2_inverse(bands.data() + c * 4 * h2 * w2, int(H), int(W),
                               out.data() + c * H * W);
    if (Tape* tp = Tape::current()) {
        auto bs = bands.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gb = t.grad_acc(bs.get(), C * 4 * h2 * w2);
            std::vector<double> tmp(size_t(4 * h2 * w2));
            for (int64_t c = 0; c < C; ++c) {
                wavelet::haar2_inverse_adjoint(go + c * H * W, int(H), int(W), tmp.data());
                for (int64_t i = 0; i < 4 * h2 * w2; ++i) gb[c * 4 * h2 * w2 + i] += tmp[size_t(i)];
            }
        });
    }
    return out;
}

} // namespace waveop
