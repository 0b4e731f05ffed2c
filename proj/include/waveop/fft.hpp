// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mixed-radix complex FFT (decimation in time, arbitrary factorizations).
// Sizes with small prime factors run in O(n log n); a large prime factor p
// falls back to an O(p^2) butterfly inside the recursion, which is fine for
// the grid sizes used here (70 = 2*5*7 and small test sizes).

#include <complex>
#include <memory>
#include <unordered_map>
#include <vector>

#include "waveop/common.hpp"

namespace waveop::fft {

using cplx = std::complex<double>;

class Plan {
public:
    explicit Plan(int n) : n_(n) {
        if (n <= 0) throw shape_error("fft: size must be positive");
        twiddle_.resize(n);
        const double step = -2.0 * 3.14159265358979323846 / n;
        for (int k = 0; k < n; ++k) twiddle_[k] = std::polar(1.0, step * k);
        int m = n;
        for (int r = 2; r * r <= m;) {
            if (m % r == 0) {
                radices_.push_back(r);
                m /= r;
            } else {
                ++r;
            }
        }
        if (m > 1) radices_.push_back(m);
    }

    int size() const { return n_; }

    // out-of-place forward DFT: out[k] = sum_j in[j] * exp(-2*pi*i*j*k/n)
    void forward(const cplx* in, cplx* out) const { rec(in, out, n_, 1, 0); }

    void inverse(const cplx* in, cplx* out) const {
        std::vector<cplx> tmp(n_);
        for (int i = 0; i < n_; ++i) tmp[i] = std::conj(in[i]);
        forward(tmp.data(), out);
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) out[i] = std::conj(out[i]) * s;
    }

private:
    void rec(const cplx* in, cplx* out, int n, int stride, size_t level) const {
        if (n == 1) {
            out[0] = in[0];
            return;
        }
        const int r = radices_[level];
        const int m = n / r;
        for (int q = 0; q < r; ++q) rec(in + q * stride, out + q * m, m, stride * r, level + 1);

        // Combine the r sub-transforms column by column. Twiddles for the
        // current size n are the master table decimated by n_/n.
        const int64_t mult = n_ / n;
        std::vector<cplx> col(r);
        for (int k = 0; k < m; ++k) {
            for (int q = 0; q < r; ++q) {
                const int64_t idx = (int64_t(q) * k * mult) % n_;
                col[q] = out[q * m + k] * twiddle_[idx];
            }
            const int64_t rmult = int64_t(n_) / r;
            for (int j = 0; j < r; ++j) {
                cplx acc = col[0];
                for (int q = 1; q < r; ++q) {
                    const int64_t idx = ((int64_t(j) * q) % r) * rmult;
                    acc += col[q] * twiddle_[idx];
                }
                out[j * m + k] = acc;
            }
        }
    }

    int n_;
    std::vector<int> radices_;
    std::vector<cplx> twiddle_;
};

inline const Plan& plan_for(int n) {
    thread_local std::unordered_map<int, std::unique_ptr<Plan>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Plan>(n)).first;
    return *it->second;
}

// In-place 2D transforms on a row-major [h x w] complex grid.
// forward is unnormalized; inverse carries the 1/(h*w) factor.
inline void fft2_forward(cplx* data, int h, int w) {
    const Plan& pw = plan_for(w);
    std::vector<cplx> row(w);
    for (int y = 0; y < h; ++y) {
        pw.forward(data + int64_t(y) * w, row.data());
        std::copy(row.begin(), row.end(), data + int64_t(y) * w);
    }
    const Plan& ph = plan_for(h);
    std::vector<cplx> col(h), colf(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = data[int64_t(y) * w + x];
        ph.forward(col.data(), colf.data());
        for (int y = 0; y < h; ++y) data[int64_t(y) * w + x] = colf[y];
    }
}

inline void fft2_inverse(cplx* data, int h, int w) {
    const int64_t n = int64_t(h) * w;
    for (int64_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
    fft2_forward(data, h, w);
    const double s = 1.0 / double(n);
    for (int64_t i = 0; i < n; ++i) data[i] = std::conj(data[i]) * s;
}

} // namespace waveop::fft
