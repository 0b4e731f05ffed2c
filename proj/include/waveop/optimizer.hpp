// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// AdamW with decoupled weight decay, plus a warmup + cosine-annealing
// learning-rate schedule with decaying warm restarts.

#include <cmath>
#include <vector>

#include "waveop/params.hpp"
#include "waveop/tape.hpp"

namespace waveop {

struct AdamWConfig {
    double lr = 2.6e-4;
    double weight_decay = 0.089;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.0; // global gradient-norm ceiling; 0 disables clipping
};

struct SchedulerConfig {
    int warmup = 20;   // linear ramp steps before the first cosine segment
    int period = 100;  // steps per cosine segment
    double decay = 0.29; // base-rate multiplier applied at each restart
};

// Learning-rate multiplier at a given global step:
//   t < warmup:   (t + 1) / warmup               (lr(0) is the warmup start)
//   t >= warmup:  decay^r * 0.5 * (1 + cos(pi * tau / period))
// where r indexes the cosine segment and tau its in-segment offset; every
// boundary t = warmup + r * period therefore resets to decay^r.
inline double lr_multiplier(const SchedulerConfig& sc, int64_t step) {
    if (sc.warmup < 1 || sc.period < 1 || sc.decay <= 0.0)
        throw error("scheduler: bad configuration");
    if (step < 0) throw error("scheduler: negative step");
    if (step < sc.warmup) return double(step + 1) / double(sc.warmup);
    const int64_t into = step - sc.warmup;
    const int64_t r = into / sc.period;
    const int64_t tau = into % sc.period;
    constexpr double kPi = 3.14159265358979323846;
    return std::pow(sc.decay, double(r)) *
           0.5 * (1.0 + std::cos(kPi * double(tau) / double(sc.period)));
}

class AdamW {
public:
    AdamW(NamedParams params, const AdamWConfig& cfg = {}) : cfg_(cfg), params_(std::move(params)) {
        if (cfg_.lr <= 0.0) throw error("adamw: learning rate must be positive");
        m_.resize(params_.items.size());
        v_.resize(params_.items.size());
        for (size_t i = 0; i < params_.items.size(); ++i) {
            m_[i].assign(size_t(params_.items[i].second.numel()), 0.0);
            v_[i].assign(size_t(params_.items[i].second.numel()), 0.0);
        }
    }

    // One update from gradients accumulated on the tape. Parameters without a
    // gradient entry are treated as having zero gradient.
    void step(Tape& tape, double lr_mult = 1.0) {
        ++t_;
        const double lr = cfg_.lr * lr_mult;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        double gscale = 1.0;
        if (cfg_.clip_norm > 0.0) {
            double sq = 0.0;
            for (auto& [name, p] : params_.items) {
                (void)name;
                if (const double* g = tape.grad_of(p.key()))
                    for (int64_t j = 0; j < p.numel(); ++j) sq += g[j] * g[j];
            }
            const double norm = std::sqrt(sq);
            if (norm > cfg_.clip_norm) gscale = cfg_.clip_norm / norm;
        }
        for (size_t i = 0; i < params_.items.size(); ++i) {
            Tensor& p = params_.items[i].second;
            const double* g = tape.grad_of(p.key());
            double* m = m_[i].data();
            double* v = v_[i].data();
            for (int64_t j = 0; j < p.numel(); ++j) {
                const double gj = (g ? g[j] : 0.0) * gscale;
                m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
                v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                p[j] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p[j]);
            }
        }
    }

    int64_t steps_taken() const { return t_; }
    const NamedParams& params() const { return params_; }

private:
    AdamWConfig cfg_;
    NamedParams params_;
    std::vector<std::vector<double>> m_, v_;
    int64_t t_ = 0;
};

} // namespace waveop
