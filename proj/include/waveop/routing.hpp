// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Routing and fusion for the operator mixture: linear softmax routers over
// pooled latent fields, probability-weighted fusion of expert predictions, and
// a contrastive strong/weak fusion that boosts the top-k operator groups and
// subtracts the rest.

#include <algorithm>
#include <numeric>
#include <vector>

#include "waveop/operators.hpp"

namespace waveop {

// Softmax router on the channel-mean-pooled latent field.
class LinearRouter {
public:
    int in_channels;
    int classes;
    Tensor w, b; // [C, K], [K]

    LinearRouter(int C, int K, uint64_t seed) : in_channels(C), classes(K) {
        if (C < 1) throw shape_error("router: bad channel count");
        if (K < 2) throw shape_error("router: need at least 2 classes");
        std::mt19937_64 rng(seed);
        w = Tensor::normal({C, K}, rng, 0.0, 0.02);
        b = Tensor::zeros({K});
    }

    Tensor logits(const Tensor& z) const {
        if (z.rank() != 3 || z.dim(0) != in_channels)
            throw shape_error("router: want latent [" + std::to_string(in_channels) +
                              ", H, W], got " + shape_str(z.shape()));
        Tensor pooled = row_mean(z.view({in_channels, z.dim(1) * z.dim(2)}));
        return linear(pooled.view({1, in_channels}), w, b); // [1, K]
    }

    Tensor probs(const Tensor& z) const {
        return softmax_rows(logits(z)).view({classes});
    }

    NamedParams params() const {
        NamedParams p;
        p.add("w", w);
        p.add("b", b);
        return p;
    }
};

// Probability-weighted sum of predictions: sum_i gamma[i] * preds[i].
// Differentiable in both the weights and the predictions.
inline Tensor fuse_weighted(const Tensor& gamma, const std::vector<Tensor>& preds) {
    if (gamma.rank() != 1 || int64_t(preds.size()) != gamma.dim(0))
        throw shape_error("fuse_weighted: weight/prediction count mismatch");
    if (preds.empty()) throw shape_error("fuse_weighted: empty prediction list");
    Tensor out;
    for (size_t i = 0; i < preds.size(); ++i) {
        Tensor term = mul(preds[i], narrow(gamma, 0, int64_t(i), 1));
        out = out.defined() ? add(out, term) : term;
    }
    return out;
}

// Indices of the k largest entries (ties keep the lower index) and the rest.
struct TopKSplit {
    std::vector<int64_t> strong, weak;
};

inline TopKSplit top_k_split(const Tensor& beta, int k) {
    if (beta.rank() != 1) throw shape_error("top_k_split: want rank 1 scores");
    const int64_t G = beta.dim(0);
    if (k < 1 || k > G) throw shape_error("top_k_split: k out of range");
    std::vector<int64_t> order(static_cast<size_t>(G));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int64_t a, int64_t bi) { return beta[a] > beta[bi]; });
    TopKSplit split;
    split.strong.assign(order.begin(), order.begin() + k);
    split.weak.assign(order.begin() + k, order.end());
    std::sort(split.strong.begin(), split.strong.end());
    std::sort(split.weak.begin(), split.weak.end());
    return split;
}

namespace detail {

inline std::vector<Tensor> gather_preds(const std::vector<Tensor>& preds,
                                        const std::vector<int64_t>& idx) {
    std::vector<Tensor> out;
    out.reserve(idx.size());
    for (int64_t i : idx) out.push_back(preds[size_t(i)]);
    return out;
}

} // namespace detail

// Contrastive fusion of per-group predictions. Selects the k groups with the
// largest scores (membership is treated as constant for gradients; scores stay
// differentiable through the renormalized weights), renormalizes scores within
// the strong and weak sets independently, and returns
//   (1 + lambda) * strong_average - lambda * weak_average.
// With k == G the weak term vanishes; with lambda == 0 the result is the plain
// strong-set weighted average.
inline Tensor strong_weak_fuse(const Tensor& beta, const std::vector<Tensor>& preds, int k,
                               double lambda) {
    if (beta.rank() != 1 || int64_t(preds.size()) != beta.dim(0))
        throw shape_error("strong_weak_fuse: score/prediction count mismatch");
    const TopKSplit split = top_k_split(beta, k);
    Tensor strong_w = normalize_sum(gather_rows(beta, split.strong));
    Tensor fused = fuse_weighted(strong_w, detail::gather_preds(preds, split.strong));
    if (split.weak.empty() || lambda == 0.0) {
        return lambda == 0.0 ? fused : scale(fused, 1.0 + lambda);
    }
    Tensor weak_w = normalize_sum(gather_rows(beta, split.weak));
    Tensor weak = fuse_weighted(weak_w, detail::gather_preds(preds, split.weak));
    return sub(scale(fused, 1.0 + lambda), scale(weak, lambda));
}

// Fixed operator-family grouping: one group per operator kind, ordered
// FNO, WNO, MNO, LNO.
inline ExpertKind group_kind(int g) {
    if (g < 0 || g >= int(kAllExpertKinds.size())) throw shape_error("group_kind: bad index");
    return kAllExpertKinds[size_t(g)];
}

constexpr int kNumGroups = int(kAllExpertKinds.size());

// Metadata for the pretrained expert pool: per velocity family (type) the best
// operator kind with its checkpoint, and per (group, type) the full grid of
// specialist checkpoints. Checkpoint strings are paths relative to the
// registry file. Serialization lives with the pipeline I/O code.
struct ExpertRegistry {
    std::vector<std::string> families;                    // type index -> name
    std::vector<ExpertKind> best_kind;                    // per type
    std::vector<std::string> best_path;                   // per type
    std::array<std::vector<std::string>, 4> group_paths;  // [group][type]
    std::vector<std::array<double, 4>> val_mae;           // per type, per kind

    int num_types() const { return int(families.size()); }

    void validate() const {
        const size_t T = families.size();
        if (T == 0) throw error("expert registry: no families");
        if (best_kind.size() != T || best_path.size() != T || val_mae.size() != T)
            throw error("expert registry: inconsistent per-type tables");
        for (const auto& g : group_paths)
            if (g.size() != T) throw error("expert registry: inconsistent group table");
    }
};

} // namespace waveop
