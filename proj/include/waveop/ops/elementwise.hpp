// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pointwise ops. Binary ops require identical shapes, except that the right
// operand may be a 1-element tensor (broadcast scalar).

#include <cmath>

#include "waveop/tape.hpp"

namespace waveop {

namespace detail {
inline void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (a.shape() != b.shape())
        throw shape_error(std::string(who) + ": shape mismatch " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
}
} // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    const bool bs = b.numel() == 1 && a.numel() != 1;
    if (!bs) detail::check_same_shape(a, b, "add");
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] + (bs ? b[0] : b[i]);
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), bst = b.storage(), os = out.storage();
        const int64_t bn = b.numel();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            double* gb = t.grad_acc(bst.get(), bn);
            for (int64_t i = 0; i < n; ++i) {
                ga[i] += go[i];
                gb[bs ? 0 : i] += go[i];
            }
        });
    }
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    const bool bs = b.numel() == 1 && a.numel() != 1;
    if (!bs) detail::check_same_shape(a, b, "sub");
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] - (bs ? b[0] : b[i]);
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), bst = b.storage(), os = out.storage();
        const int64_t bn = b.numel();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            double* gb = t.grad_acc(bst.get(), bn);
            for (int64_t i = 0; i < n; ++i) {
                ga[i] += go[i];
                gb[bs ? 0 : i] -= go[i];
            }
        });
    }
    return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    const bool bs = b.numel() == 1 && a.numel() != 1;
    if (!bs) detail::check_same_shape(a, b, "mul");
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] * (bs ? b[0] : b[i]);
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), bst = b.storage(), os = out.storage();
        Tensor ac = a, bc = b; // keep values for the product rule
        const int64_t bn = b.numel();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            double* gb = t.grad_acc(bst.get(), bn);
            for (int64_t i = 0; i < n; ++i) {
                ga[i] += go[i] * (bs ? bc[0] : bc[i]);
                gb[bs ? 0 : i] += go[i] * ac[i];
            }
        });
    }
    return out;
}

inline Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] * c;
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * c;
        });
    }
    return out;
}

inline Tensor add_scalar(const Tensor& a, double c) {
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] + c;
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            for (int64_t i = 0; i < n; ++i) ga[i] += go[i];
        });
    }
    return out;
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

// Exact GELU: 0.5 * x * (1 + erf(x / sqrt(2))).
inline Tensor gelu(const Tensor& a) {
    Tensor out(a.shape());
    const int64_t n = a.numel();
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (int64_t i = 0; i < n; ++i) out[i] = 0.5 * a[i] * (1.0 + std::erf(a[i] * inv_sqrt2));
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), os = out.storage();
        Tensor ac = a;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            constexpr double inv_sqrt2pi = 0.3989422804014326779;
            for (int64_t i = 0; i < n; ++i) {
                const double x = ac[i];
                const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
                const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
                ga[i] += go[i] * (cdf + x * pdf);
            }
        });
    }
    return out;
}

// |x| with subgradient 0 at the kink.
inline Tensor abs_val(const Tensor& a) {
    Tensor out(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = std::abs(a[i]);
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), os = out.storage();
        Tensor ac = a;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), n);
            for (int64_t i = 0; i < n; ++i) {
                const double s = ac[i] > 0.0 ? 1.0 : (ac[i] < 0.0 ? -1.0 : 0.0);
                ga[i] += go[i] * s;
            }
        });
    }
    return out;
}

inline Tensor square(const Tensor& a) { return mul(a, a); }

// out[r, :] = x[r, :] * s[r] for x viewed as [R x M] rows.
inline Tensor scale_rows(const Tensor& x, const Tensor& s) {
    if (x.rank() < 1 || s.rank() != 1)
        throw shape_error("scale_rows: want x rank>=1 and s rank 1");
    const int64_t R = s.dim(0);
    if (x.dim(0) != R)
        throw shape_error("scale_rows: leading extent of x must equal len(s)");
    const int64_t M = x.numel() / R;
    Tensor out(x.shape());
    for (int64_t r = 0; r < R; ++r)
        for (int64_t m = 0; m < M; ++m) out[r * M + m] = x[r * M + m] * s[r];
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), ss = s.storage(), os = out.storage();
        Tensor xc = x, sc = s;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * M);
            double* gs = t.grad_acc(ss.get(), R);
            for (int64_t r = 0; r < R; ++r) {
                double acc = 0.0;
                for (int64_t m = 0; m < M; ++m) {
                    gx[r * M + m] += go[r * M + m] * sc[r];
                    acc += go[r * M + m] * xc[r * M + m];
                }
                gs[r] += acc;
            }
        });
    }
    return out;
}

// Stops gradient flow; result owns fresh storage.
inline Tensor detach(const Tensor& a) { return a.clone(); }

} // namespace waveop
