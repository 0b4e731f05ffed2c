// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense double-precision n-d tensor with shared storage. Complex data is
// stored interleaved as a trailing dimension of size 2. All math lives in
// the op layer; this type is plain data plus shape bookkeeping.

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <random>
#include <vector>

#include "waveop/common.hpp"

namespace waveop {

struct Storage {
    std::vector<double> data;
    explicit Storage(int64_t n) : data(size_t(n), 0.0) {}
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape)
        : st_(std::make_shared<Storage>(shape_numel(shape))), shape_(std::move(shape)) {}

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, double v) {
        Tensor t(std::move(shape));
        std::fill(t.st_->data.begin(), t.st_->data.end(), v);
        return t;
    }

    static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }

    static Tensor scalar(double v) { return full({1}, v); }

    static Tensor from_vector(Shape shape, const std::vector<double>& v) {
        Tensor t(std::move(shape));
        if (int64_t(v.size()) != t.numel())
            throw shape_error("from_vector: size mismatch, got " + std::to_string(v.size()) +
                              " for shape " + shape_str(t.shape()));
        std::copy(v.begin(), v.end(), t.data());
        return t;
    }

    // Uniform in [lo, hi) from the supplied engine; used for weight init.
    static Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
        Tensor t(std::move(shape));
        std::uniform_real_distribution<double> dist(lo, hi);
        for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = dist(rng);
        return t;
    }

    static Tensor normal(Shape shape, std::mt19937_64& rng, double mean, double stddev) {
        Tensor t(std::move(shape));
        std::normal_distribution<double> dist(mean, stddev);
        for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = dist(rng);
        return t;
    }

    bool defined() const { return st_ != nullptr; }
    const Shape& shape() const { return shape_; }
    int rank() const { return int(shape_.size()); }
    int64_t dim(int i) const { return shape_[size_t(i)]; }
    int64_t numel() const { return st_ ? int64_t(st_->data.size()) : 0; }

    double* data() { return st_->data.data(); }
    const double* data() const { return st_->data.data(); }
    double& operator[](int64_t i) { return st_->data[size_t(i)]; }
    double operator[](int64_t i) const { return st_->data[size_t(i)]; }

    double item() const {
        if (numel() != 1) throw shape_error("item: tensor has " + std::to_string(numel()) + " elements");
        return st_->data[0];
    }

    std::shared_ptr<Storage> storage() const { return st_; }
    Storage* key() const { return st_.get(); }

    // Same data, new shape (shares storage; caller must keep numel equal).
    Tensor view(Shape shape) const {
        if (shape_numel(shape) != numel())
            throw shape_error("view: cannot view " + shape_str(shape_) + " as " + shape_str(shape));
        Tensor t;
        t.st_ = st_;
        t.shape_ = std::move(shape);
        return t;
    }

    // Deep copy into fresh storage (drops any tape association by identity).
    Tensor clone() const {
        Tensor t(shape_);
        std::copy(st_->data.begin(), st_->data.end(), t.st_->data.begin());
        return t;
    }

private:
    std::shared_ptr<Storage> st_;
    Shape shape_;
};

} // namespace waveop
