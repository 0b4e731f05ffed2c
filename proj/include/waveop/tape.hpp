// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reverse-mode autodiff tape. Ops record one closure per node in execution
// order; backward() walks the list in reverse, so by the time a node runs all
// of its consumers have already deposited their contributions. Gradients are
// keyed by storage identity, which makes views (reshape) free: they share the
// base tensor's buffer.

#include <functional>
#include <unordered_map>
#include <vector>

#include "waveop/tensor.hpp"

namespace waveop {

class Tape {
public:
    using BackFn = std::function<void(Tape&)>;

    void record(Storage* out, BackFn fn) { nodes_.push_back({out, std::move(fn)}); }

    size_t size() const { return nodes_.size(); }

    // Gradient buffer of s, or nullptr when nothing has flowed into it.
    double* grad_of(Storage* s) {
        auto it = grads_.find(s);
        return it == grads_.end() ? nullptr : it->second.data();
    }

    // Gradient buffer of s, created zero-filled on first touch.
    double* grad_acc(Storage* s, int64_t n) {
        auto it = grads_.find(s);
        if (it == grads_.end())
            it = grads_.emplace(s, std::vector<double>(size_t(n), 0.0)).first;
        return it->second.data();
    }

    void backward(const Tensor& loss) {
        if (loss.numel() != 1)
            throw shape_error("backward: loss must be scalar, got " + shape_str(loss.shape()));
        grads_.clear();
        grads_[loss.key()] = {1.0};
        for (size_t i = nodes_.size(); i-- > 0;) {
            if (grads_.find(nodes_[i].out) == grads_.end()) continue;
            nodes_[i].fn(*this);
        }
    }

    const std::vector<double>* grad(const Tensor& t) const {
        auto it = grads_.find(t.key());
        return it == grads_.end() ? nullptr : &it->second;
    }

    // Gradient as a tensor shaped like t; zeros when t never got a gradient.
    Tensor grad_tensor(const Tensor& t) const {
        Tensor g(t.shape());
        if (const auto* v = grad(t)) std::copy(v->begin(), v->end(), g.data());
        return g;
    }

    void reset() {
        nodes_.clear();
        grads_.clear();
    }

    static Tape* current();

private:
    struct Node {
        Storage* out;
        BackFn fn;
    };
    std::vector<Node> nodes_;
    std::unordered_map<Storage*, std::vector<double>> grads_;
};

inline Tape*& tape_slot() {
    thread_local Tape* t = nullptr;
    return t;
}

inline Tape* Tape::current() { return tape_slot(); }

// RAII: makes a fresh tape active on this thread for the scope's lifetime.
struct TapeScope {
    Tape tape;
    TapeScope() : prev_(tape_slot()) { tape_slot() = &tape; }
    ~TapeScope() { tape_slot() = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

// RAII: suspends recording (forward-only evaluation).
struct NoTapeScope {
    NoTapeScope() : prev_(tape_slot()) { tape_slot() = nullptr; }
    ~NoTapeScope() { tape_slot() = prev_; }
    NoTapeScope(const NoTapeScope&) = delete;
    NoTapeScope& operator=(const NoTapeScope&) = delete;

private:
    Tape* prev_;
};

} // namespace waveop
