// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Orthonormal 2D Haar transform, single level, out of place.
// Band layout is [4][h/2][w/2] with LL=0, LH=1, HL=2, HH=3.
// Odd extents are handled by the callers via edge replication; the helpers
// pad_edge / fold_edge / zero_pad / crop are the pieces needed to keep the
// padded transform and its transpose exact.

#include <algorithm>
#include <cstring>
#include <vector>

#include "waveop/common.hpp"

namespace waveop::wavelet {

// h, w must be even. bands: 4 * (h/2) * (w/2) doubles.
inline void haar2_fwd_even(const double* u, int h, int w, double* bands) {
    if (h % 2 || w % 2) throw shape_error("haar2_fwd_even: extents must be even");
    const int h2 = h / 2, w2 = w / 2;
    double* ll = bands;
    double* lh = bands + int64_t(h2) * w2;
    double* hl = bands + 2 * int64_t(h2) * w2;
    double* hh = bands + 3 * int64_t(h2) * w2;
    for (int i = 0; i < h2; ++i) {
        const double* r0 = u + int64_t(2 * i) * w;
        const double* r1 = r0 + w;
        for (int j = 0; j < w2; ++j) {
            const double a = r0[2 * j], b = r0[2 * j + 1];
            const double c = r1[2 * j], d = r1[2 * j + 1];
            const int64_t o = int64_t(i) * w2 + j;
            ll[o] = 0.5 * (a + b + c + d);
            lh[o] = 0.5 * (a - b + c - d);
            hl[o] = 0.5 * (a + b - c - d);
            hh[o] = 0.5 * (a - b - c + d);
        }
    }
}

inline void haar2_inv_even(const double* bands, int h, int w, double* u) {
    if (h % 2 || w % 2) throw shape_error("haar2_inv_even: extents must be even");
    const int h2 = h / 2, w2 = w / 2;
    const double* ll = bands;
    const double* lh = bands + int64_t(h2) * w2;
    const double* hl = bands + 2 * int64_t(h2) * w2;
    const double* hh = bands + 3 * int64_t(h2) * w2;
    for (int i = 0; i < h2; ++i) {
        double* r0 = u + int64_t(2 * i) * w;
        double* r1 = r0 + w;
        for (int j = 0; j < w2; ++j) {
            const int64_t o = int64_t(i) * w2 + j;
            const double A = ll[o], B = lh[o], C = hl[o], D = hh[o];
            r0[2 * j] = 0.5 * (A + B + C + D);
            r0[2 * j + 1] = 0.5 * (A - B + C - D);
            r1[2 * j] = 0.5 * (A + B - C - D);
            r1[2 * j + 1] = 0.5 * (A - B - C + D);
        }
    }
}

inline int even_up(int n) { return n + (n & 1); }

// Edge-replicate the last row/column when an extent is odd.
inline void pad_edge(const double* u, int h, int w, double* up) {
    const int hp = even_up(h), wp = even_up(w);
    for (int i = 0; i < hp; ++i) {
        const double* src = u + int64_t(std::min(i, h - 1)) * w;
        double* dst = up + int64_t(i) * wp;
        std::memcpy(dst, src, sizeof(double) * w);
        for (int j = w; j < wp; ++j) dst[j] = src[w - 1];
    }
}

// Transpose of pad_edge: accumulate replicated cells back onto the source.
inline void fold_edge(const double* up, int h, int w, double* u) {
    const int hp = even_up(h), wp = even_up(w);
    std::memset(u, 0, sizeof(double) * h * w);
    for (int i = 0; i < hp; ++i) {
        const int si = std::min(i, h - 1);
        double* dst = u + int64_t(si) * w;
        const double* src = up + int64_t(i) * wp;
        for (int j = 0; j < wp; ++j) dst[std::min(j, w - 1)] += src[j];
    }
}

inline void crop(const double* up, int hp, int wp, int h, int w, double* u) {
    for (int i = 0; i < h; ++i)
        std::memcpy(u + int64_t(i) * w, up + int64_t(i) * wp, sizeof(double) * w);
}

inline void zero_pad(const double* u, int h, int w, int hp, int wp, double* up) {
    std::memset(up, 0, sizeof(double) * hp * wp);
    for (int i = 0; i < h; ++i)
        std::memcpy(up + int64_t(i) * wp, u + int64_t(i) * w, sizeof(double) * w);
}

// Convenience single-level transform for arbitrary extents.
// bands holds 4 * ceil(h/2) * ceil(w/2) doubles.
inline void haar2_forward(const double* u, int h, int w, double* bands) {
    if (h % 2 == 0 && w % 2 == 0) {
        haar2_fwd_even(u, h, w, bands);
        return;
    }
    const int hp = even_up(h), wp = even_up(w);
    std::vector<double> up(int64_t(hp) * wp);
    pad_edge(u, h, w, up.data());
    haar2_fwd_even(up.data(), hp, wp, bands);
}

inline void haar2_inverse(const double* bands, int h, int w, double* u) {
    if (h % 2 == 0 && w % 2 == 0) {
        haar2_inv_even(bands, h, w, u);
        return;
    }
    const int hp = even_up(h), wp = even_up(w);
    std::vector<double> up(int64_t(hp) * wp);
    haar2_inv_even(bands, hp, wp, up.data());
    crop(up.data(), hp, wp, h, w, u);
}

// Transpose (adjoint) of haar2_forward as a linear map R^{h*w} -> bands.
inline void haar2_forward_adjoint(const double* bands, int h, int w, double* u) {
    if (h % 2 == 0 && w % 2 == 0) {
        haar2_inv_even(bands, h, w, u); // orthogonal: adjoint == inverse
        return;
    }
    const int hp = even_up(h), wp = even_up(w);
    std::vector<double> up(int64_t(hp) * wp);
    haar2_inv_even(bands, hp, wp, up.data());
    fold_edge(up.data(), h, w, u);
}

// Transpose (adjoint) of haar2_inverse as a linear map bands -> R^{h*w}.
inline void haar2_inverse_adjoint(const double* u, int h, int w, double* bands) {
    if (h % 2 == 0 && w % 2 == 0) {
        haar2_fwd_even(u, h, w, bands);
        return;
    }
    const int hp = even_up(h), wp = even_up(w);
    std::vector<double> up(int64_t(hp) * wp);
    zero_pad(u, h, w, hp, wp, up.data());
    haar2_fwd_even(up.data(), hp, wp, bands);
}

} // namespace waveop::wavelet
