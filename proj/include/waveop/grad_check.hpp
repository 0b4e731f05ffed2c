// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Finite-difference verification of tape gradients. For a scalar-valued
// closure f that reads x from its (mutable) storage, reports
//   max_i |analytic_i - central_i| / max(|analytic_i|, 1e-8)
// where central_i uses a symmetric step of eps.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "waveop/tape.hpp"

namespace waveop {

// Checks the listed coordinates of x (all of them when coords is empty).
inline double grad_check_coords(const std::function<Tensor()>& f, Tensor x,
                                std::vector<int64_t> coords, double eps = 1e-5) {
    std::vector<double> analytic(size_t(x.numel()));
    {
        TapeScope scope;
        Tensor loss = f();
        scope.tape.backward(loss);
        Tensor g = scope.tape.grad_tensor(x);
        std::copy(g.data(), g.data() + x.numel(), analytic.begin());
    }
    if (coords.empty()) {
        coords.resize(size_t(x.numel()));
        std::iota(coords.begin(), coords.end(), 0);
    }
    double worst = 0.0;
    NoTapeScope off;
    for (int64_t i : coords) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f().item();
        x[i] = keep - eps;
        const double dn = f().item();
        x[i] = keep;
        const double numeric = (up - dn) / (2.0 * eps);
        const double denom = std::max(std::abs(analytic[size_t(i)]), 1e-8);
        worst = std::max(worst, std::abs(analytic[size_t(i)] - numeric) / denom);
    }
    return worst;
}

inline double grad_check(const std::function<Tensor()>& f, Tensor x, double eps = 1e-5) {
    return grad_check_coords(f, x, {}, eps);
}

// Checks a deterministic random sample of at most max_coords coordinates.
inline double grad_check_sample(const std::function<Tensor()>& f, Tensor x, int max_coords,
                                uint64_t seed, double eps = 1e-5) {
    std::vector<int64_t> coords(size_t(x.numel()));
    std::iota(coords.begin(), coords.end(), 0);
    if (int64_t(coords.size()) > max_coords) {
        std::mt19937_64 rng(seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(size_t(max_coords));
    }
    return grad_check_coords(f, x, std::move(coords), eps);
}

} // namespace waveop
