// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "waveop/tape.hpp"

namespace waveop {

inline Tensor sum(const Tensor& x) {
    Tensor out({1});
    double acc = 0.0;
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    out[0] = acc;
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double g = t.grad_of(os.get())[0];
            double* gx = t.grad_acc(xs.get(), n);
            for (int64_t i = 0; i < n; ++i) gx[i] += g;
        });
    }
    return out;
}

inline Tensor mean(const Tensor& x) {
    Tensor out({1});
    double acc = 0.0;
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    out[0] = acc / double(n);
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double g = t.grad_of(os.get())[0] / double(n);
            double* gx = t.grad_acc(xs.get(), n);
            for (int64_t i = 0; i < n; ++i) gx[i] += g;
        });
    }
    return out;
}

// Mean over everything but the leading dimension: [R, ...] -> [R].
inline Tensor row_mean(const Tensor& x) {
    if (x.rank() < 2) throw shape_error("row_mean: want rank >= 2");
    const int64_t R = x.dim(0), M = x.numel() / R;
    Tensor out({R});
    for (int64_t r = 0; r < R; ++r) {
        double acc = 0.0;
        for (int64_t m = 0; m < M; ++m) acc += x[r * M + m];
        out[r] = acc / double(M);
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * M);
            for (int64_t r = 0; r < R; ++r) {
                const double g = go[r] / double(M);
                for (int64_t m = 0; m < M; ++m) gx[r * M + m] += g;
            }
        });
    }
    return out;
}

// Row-wise stable softmax on a [R x C] tensor.
inline Tensor softmax_rows(const Tensor& x) {
    if (x.rank() != 2) throw shape_error("softmax_rows: want rank 2");
    const int64_t R = x.dim(0), C = x.dim(1);
    Tensor out(x.shape());
    for (int64_t r = 0; r < R; ++r) {
        double mx = x[r * C];
        for (int64_t c = 1; c < C; ++c) mx = std::max(mx, x[r * C + c]);
        double z = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            out[r * C + c] = std::exp(x[r * C + c] - mx);
            z += out[r * C + c];
        }
        for (int64_t c = 0; c < C; ++c) out[r * C + c] /= z;
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        Tensor oc = out;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            for (int64_t r = 0; r < R; ++r) {
                double dot = 0.0;
                for (int64_t c = 0; c < C; ++c) dot += go[r * C + c] * oc[r * C + c];
                for (int64_t c = 0; c < C; ++c)
                    gx[r * C + c] += oc[r * C + c] * (go[r * C + c] - dot);
            }
        });
    }
    return out;
}

// Row-wise log-softmax (stable); pairs with select_per_row for cross-entropy.
inline Tensor log_softmax_rows(const Tensor& x) {
    if (x.rank() != 2) throw shape_error("log_softmax_rows: want rank 2");
    const int64_t R = x.dim(0), C = x.dim(1);
    Tensor out(x.shape());
    for (int64_t r = 0; r < R; ++r) {
        double mx = x[r * C];
        for (int64_t c = 1; c < C; ++c) mx = std::max(mx, x[r * C + c]);
        double z = 0.0;
        for (int64_t c = 0; c < C; ++c) z += std::exp(x[r * C + c] - mx);
        const double lse = mx + std::log(z);
        for (int64_t c = 0; c < C; ++c) out[r * C + c] = x[r * C + c] - lse;
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        Tensor oc = out;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            for (int64_t r = 0; r < R; ++r) {
                double gsum = 0.0;
                for (int64_t c = 0; c < C; ++c) gsum += go[r * C + c];
                for (int64_t c = 0; c < C; ++c)
                    gx[r * C + c] += go[r * C + c] - std::exp(oc[r * C + c]) * gsum;
            }
        });
    }
    return out;
}

} // namespace waveop
