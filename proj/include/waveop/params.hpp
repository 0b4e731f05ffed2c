// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ordered named-parameter registry shared by models, the optimizer and the
// checkpoint reader/writer. Tensors are shared-storage handles, so mutating
// through the registry updates the owning model.

#include <string>
#include <utility>
#include <vector>

#include "waveop/tensor.hpp"

namespace waveop {

struct NamedParams {
    std::vector<std::pair<std::string, Tensor>> items;

    void add(const std::string& name, const Tensor& t) { items.emplace_back(name, t); }

    Tensor* find(const std::string& name) {
        for (auto& [n, t] : items)
            if (n == name) return &t;
        return nullptr;
    }

    const Tensor* find(const std::string& name) const {
        for (const auto& [n, t] : items)
            if (n == name) return &t;
        return nullptr;
    }

    size_t size() const { return items.size(); }

    int64_t numel() const {
        int64_t n = 0;
        for (const auto& [name, t] : items) n += t.numel();
        return n;
    }
};

// Checksum over raw parameter bytes in registry order; used to assert that
// frozen weights stay untouched during fine-tuning.
inline uint64_t params_checksum(const NamedParams& p) {
    uint64_t h = 1469598103934665603ull;
    for (const auto& [name, t] : p.items) {
        h = fnv1a(name.data(), name.size(), h);
        h = fnv1a(t.data(), size_t(t.numel()) * sizeof(double), h);
    }
    return h;
}

} // namespace waveop
