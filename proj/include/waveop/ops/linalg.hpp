// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "waveop/gemm.hpp"
#include "waveop/tape.hpp"

namespace waveop {

// [m x k] @ [k x n] -> [m x n]
inline Tensor matmul_op(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw shape_error("matmul: bad shapes " + shape_str(a.shape()) + " @ " +
                          shape_str(b.shape()));
    const int m = int(a.dim(0)), k = int(a.dim(1)), n = int(b.dim(1));
    Tensor out({m, n});
    matmul(a.data(), b.data(), out.data(), m, k, n);
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), bs = b.storage(), os = out.storage();
        Tensor ac = a, bc = b;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), int64_t(m) * k);
            double* gb = t.grad_acc(bs.get(), int64_t(k) * n);
            matmul_tB(go, bc.data(), ga, m, n, k, /*accumulate=*/true);
            matmul_tA(ac.data(), go, gb, m, k, n, /*accumulate=*/true);
        });
    }
    return out;
}

// x[R x C] + b[C] broadcast over rows.
inline Tensor add_bias_rows(const Tensor& x, const Tensor& b) {
    if (x.rank() != 2 || b.rank() != 1 || x.dim(1) != b.dim(0))
        throw shape_error("add_bias_rows: bad shapes " + shape_str(x.shape()) + " + " +
                          shape_str(b.shape()));
    const int64_t R = x.dim(0), C = x.dim(1);
    Tensor out(x.shape());
    for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c) out[r * C + c] = x[r * C + c] + b[c];
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), bs = b.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            double* gb = t.grad_acc(bs.get(), C);
            for (int64_t r = 0; r < R; ++r)
                for (int64_t c = 0; c < C; ++c) {
                    gx[r * C + c] += go[r * C + c];
                    gb[c] += go[r * C + c];
                }
        });
    }
    return out;
}

// Affine map on rows: x[R x Cin] @ W[Cin x Cout] + b[Cout].
inline Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
    return add_bias_rows(matmul_op(x, W), b);
}

// Per-row layer norm with affine parameters: [R x C], gamma/beta [C].
inline Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                              double eps = 1e-5) {
    if (x.rank() != 2 || gamma.rank() != 1 || beta.rank() != 1 || gamma.dim(0) != x.dim(1) ||
        beta.dim(0) != x.dim(1))
        throw shape_error("layer_norm_rows: bad shapes");
    const int64_t R = x.dim(0), C = x.dim(1);
    Tensor out(x.shape());
    Tensor xhat(x.shape());
    Tensor inv_sigma({R});
    for (int64_t r = 0; r < R; ++r) {
        double mu = 0.0;
        for (int64_t c = 0; c < C; ++c) mu += x[r * C + c];
        mu /= double(C);
        double var = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            const double d = x[r * C + c] - mu;
            var += d * d;
        }
        var /= double(C);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[r] = is;
        for (int64_t c = 0; c < C; ++c) {
            xhat[r * C + c] = (x[r * C + c] - mu) * is;
            out[r * C + c] = gamma[c] * xhat[r * C + c] + beta[c];
        }
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), gs = gamma.storage(), bs = beta.storage(), os = out.storage();
        Tensor gc = gamma;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            double* gg = t.grad_acc(gs.get(), C);
            double* gb = t.grad_acc(bs.get(), C);
            for (int64_t r = 0; r < R; ++r) {
                double mean_gh = 0.0, mean_ghx = 0.0;
                for (int64_t c = 0; c < C; ++c) {
                    const double gh = go[r * C + c] * gc[c];
                    mean_gh += gh;
                    mean_ghx += gh * xhat[r * C + c];
                    gg[c] += go[r * C + c] * xhat[r * C + c];
                    gb[c] += go[r * C + c];
                }
                mean_gh /= double(C);
                mean_ghx /= double(C);
                for (int64_t c = 0; c < C; ++c) {
                    const double gh = go[r * C + c] * gc[c];
                    gx[r * C + c] += inv_sigma[r] * (gh - mean_gh - xhat[r * C + c] * mean_ghx);
                }
            }
        });
    }
    return out;
}

// y = x / sum(x) for a vector (probability renormalization).
// Backward: gx_j = (g_j - sum_i g_i y_i) / s.
inline Tensor normalize_sum(const Tensor& x) {
    if (x.rank() != 1) throw shape_error("normalize_sum: want rank 1");
    const int64_t n = x.numel();
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += x[i];
    if (s == 0.0) throw numeric_error("normalize_sum: zero sum");
    Tensor out(x.shape());
    for (int64_t i = 0; i < n; ++i) out[i] = x[i] / s;
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        Tensor oc = out;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), n);
            double dot = 0.0;
            for (int64_t i = 0; i < n; ++i) dot += go[i] * oc[i];
            for (int64_t i = 0; i < n; ++i) gx[i] += (go[i] - dot) / s;
        });
    }
    return out;
}

// y = x / ||x||_2 for a vector. Backward: (g - (g . y) y) / ||x||.
inline Tensor vec_normalize(const Tensor& x) {
    if (x.rank() != 1) throw shape_error("vec_normalize: want rank 1");
    const int64_t n = x.numel();
    double s2 = 0.0;
    for (int64_t i = 0; i < n; ++i) s2 += x[i] * x[i];
    const double s = std::sqrt(s2);
    if (s == 0.0) throw numeric_error("vec_normalize: zero norm");
    Tensor out(x.shape());
    for (int64_t i = 0; i < n; ++i) out[i] = x[i] / s;
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        Tensor oc = out;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), n);
            double dot = 0.0;
            for (int64_t i = 0; i < n; ++i) dot += go[i] * oc[i];
            for (int64_t i = 0; i < n; ++i) gx[i] += (go[i] - dot * oc[i]) / s;
        });
    }
    return out;
}

} // namespace waveop
