// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shape manipulation ops. reshape aliases storage (gradients flow through
// identity); narrow/concat/gather copy and scatter-add on the way back.

#include <numeric>

#include "waveop/tape.hpp"

namespace waveop {

inline Tensor reshape(const Tensor& x, Shape shape) { return x.view(std::move(shape)); }

namespace detail {
// Strides of a row-major shape.
inline std::vector<int64_t> strides_of(const Shape& s) {
    std::vector<int64_t> st(s.size(), 1);
    for (size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
    return st;
}
} // namespace detail

// Contiguous sub-block along one dimension, copied out.
inline Tensor narrow(const Tensor& x, int dim, int64_t start, int64_t len) {
    if (dim < 0 || dim >= x.rank()) throw shape_error("narrow: bad dim");
    if (start < 0 || len <= 0 || start + len > x.dim(dim))
        throw shape_error("narrow: range [" + std::to_string(start) + "," +
                          std::to_string(start + len) + ") exceeds extent " +
                          std::to_string(x.dim(dim)));
    Shape oshape = x.shape();
    oshape[size_t(dim)] = len;
    Tensor out(oshape);
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < dim; ++i) outer *= x.dim(i);
    for (int i = dim + 1; i < x.rank(); ++i) inner *= x.dim(i);
    const int64_t ext = x.dim(dim);
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t l = 0; l < len; ++l)
            std::copy(x.data() + (o * ext + start + l) * inner,
                      x.data() + (o * ext + start + l + 1) * inner,
                      out.data() + (o * len + l) * inner);
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        const int64_t xn = x.numel();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), xn);
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t l = 0; l < len; ++l) {
                    double* dst = gx + (o * ext + start + l) * inner;
                    const double* src = go + (o * len + l) * inner;
                    for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
                }
        });
    }
    return out;
}

inline Tensor concat(const Tensor& a, const Tensor& b, int dim) {
    if (a.rank() != b.rank()) throw shape_error("concat: rank mismatch");
    if (dim < 0 || dim >= a.rank()) throw shape_error("concat: bad dim");
    for (int i = 0; i < a.rank(); ++i)
        if (i != dim && a.dim(i) != b.dim(i))
            throw shape_error("concat: shape mismatch " + shape_str(a.shape()) + " vs " +
                              shape_str(b.shape()));
    Shape oshape = a.shape();
    oshape[size_t(dim)] += b.dim(dim);
    Tensor out(oshape);
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < dim; ++i) outer *= a.dim(i);
    for (int i = dim + 1; i < a.rank(); ++i) inner *= a.dim(i);
    const int64_t ea = a.dim(dim), eb = b.dim(dim), eo = ea + eb;
    for (int64_t o = 0; o < outer; ++o) {
        std::copy(a.data() + o * ea * inner, a.data() + (o + 1) * ea * inner,
                  out.data() + o * eo * inner);
        std::copy(b.data() + o * eb * inner, b.data() + (o + 1) * eb * inner,
                  out.data() + (o * eo + ea) * inner);
    }
    if (Tape* tp = Tape::current()) {
        auto as = a.storage(), bs = b.storage(), os = out.storage();
        const int64_t an = a.numel(), bn = b.numel();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* ga = t.grad_acc(as.get(), an);
            double* gb = t.grad_acc(bs.get(), bn);
            for (int64_t o = 0; o < outer; ++o) {
                const double* ga_src = go + o * eo * inner;
                const double* gb_src = go + (o * eo + ea) * inner;
                for (int64_t i = 0; i < ea * inner; ++i) ga[o * ea * inner + i] += ga_src[i];
                for (int64_t i = 0; i < eb * inner; ++i) gb[o * eb * inner + i] += gb_src[i];
            }
        });
    }
    return out;
}

// Select whole rows of a [R x ...] tensor by fixed indices (not differentiated
// through the index set; gradients scatter-add into the chosen rows).
inline Tensor gather_rows(const Tensor& x, const std::vector<int64_t>& idx) {
    if (x.rank() < 1) throw shape_error("gather_rows: rank must be >= 1");
    const int64_t R = x.dim(0);
    const int64_t inner = x.numel() / std::max<int64_t>(R, 1);
    for (int64_t i : idx)
        if (i < 0 || i >= R) throw shape_error("gather_rows: index " + std::to_string(i) + " out of range");
    Shape oshape = x.shape();
    oshape[0] = int64_t(idx.size());
    Tensor out(oshape);
    for (size_t k = 0; k < idx.size(); ++k)
        std::copy(x.data() + idx[k] * inner, x.data() + (idx[k] + 1) * inner,
                  out.data() + int64_t(k) * inner);
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        const int64_t xn = x.numel();
        auto ic = idx;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), xn);
            for (size_t k = 0; k < ic.size(); ++k)
                for (int64_t i = 0; i < inner; ++i) gx[ic[k] * inner + i] += go[int64_t(k) * inner + i];
        });
    }
    return out;
}

// One element per row of a [R x C] tensor.
inline Tensor select_per_row(const Tensor& x, const std::vector<int64_t>& idx) {
    if (x.rank() != 2) throw shape_error("select_per_row: want rank 2");
    const int64_t R = x.dim(0), C = x.dim(1);
    if (int64_t(idx.size()) != R) throw shape_error("select_per_row: need one index per row");
    Tensor out({R});
    for (int64_t r = 0; r < R; ++r) {
        if (idx[size_t(r)] < 0 || idx[size_t(r)] >= C)
            throw shape_error("select_per_row: index out of range");
        out[r] = x[r * C + idx[size_t(r)]];
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        auto ic = idx;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            for (int64_t r = 0; r < R; ++r) gx[r * C + ic[size_t(r)]] += go[r];
        });
    }
    return out;
}

inline Tensor transpose2d(const Tensor& x) {
    if (x.rank() != 2) throw shape_error("transpose2d: want rank 2");
    const int64_t R = x.dim(0), C = x.dim(1);
    Tensor out({C, R});
    for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c) out[c * R + r] = x[r * C + c];
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), R * C);
            for (int64_t r = 0; r < R; ++r)
                for (int64_t c = 0; c < C; ++c) gx[r * C + c] += go[c * R + r];
        });
    }
    return out;
}

} // namespace waveop
