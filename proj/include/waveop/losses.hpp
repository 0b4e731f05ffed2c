// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Training objective for velocity-model prediction: a weighted sum of mean
// absolute error, mean squared error, a finite-difference gradient-matching
// term, and a Fourier amplitude-matching term. All terms are mean reductions,
// so the weighted combination stays flat (no nested averaging).

#include <vector>

#include "waveop/ops.hpp"

namespace waveop {

struct LossWeights {
    double l1 = 0.4395;
    double l2 = 0.3534;
    double grad = 0.15;
    double fourier = 0.05;
};

inline void check_same_shape(const Tensor& pred, const Tensor& target, const char* where) {
    if (pred.shape() != target.shape())
        throw shape_error(std::string(where) + ": shape mismatch " + shape_str(pred.shape()) +
                          " vs " + shape_str(target.shape()));
}

// mean |pred - target|
inline Tensor l1_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "l1_loss");
    return mean(abs_val(sub(pred, target)));
}

// mean (pred - target)^2
inline Tensor l2_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "l2_loss");
    return mean(square(sub(pred, target)));
}

// Mean absolute forward difference of the residual along x plus along y,
// each averaged over its valid positions only.
inline Tensor grad_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "grad_loss");
    if (pred.rank() != 3) throw shape_error("grad_loss: want [C, H, W]");
    const int64_t H = pred.dim(1), W = pred.dim(2);
    if (H < 2 || W < 2) throw shape_error("grad_loss: field too small for differences");
    Tensor r = sub(pred, target);
    Tensor dx = sub(narrow(r, 2, 1, W - 1), narrow(r, 2, 0, W - 1));
    Tensor dy = sub(narrow(r, 1, 1, H - 1), narrow(r, 1, 0, H - 1));
    return add(mean(abs_val(dx)), mean(abs_val(dy)));
}

// mean | |F(pred)| - |F(target)| | over all FFT bins.
inline Tensor fourier_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "fourier_loss");
    if (pred.rank() != 3) throw shape_error("fourier_loss: want [C, H, W]");
    Tensor ap = complex_abs(fft2_op(pred));
    Tensor at = complex_abs(fft2_op(target));
    return mean(abs_val(sub(ap, at)));
}

inline Tensor total_loss(const Tensor& pred, const Tensor& target,
                         const LossWeights& w = {}) {
    Tensor out = scale(l1_loss(pred, target), w.l1);
    out = add(out, scale(l2_loss(pred, target), w.l2));
    out = add(out, scale(grad_loss(pred, target), w.grad));
    out = add(out, scale(fourier_loss(pred, target), w.fourier));
    return out;
}

// Optional auxiliary classification term (disabled by default in training
// configs): mean negative log-likelihood of the target classes under the
// row-wise softmax of the logits.
inline Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int64_t>& targets) {
    if (logits.rank() != 2) throw shape_error("cross_entropy: want [R, K] logits");
    Tensor logp = log_softmax_rows(logits);
    return neg(mean(select_per_row(logp, targets)));
}

} // namespace waveop
