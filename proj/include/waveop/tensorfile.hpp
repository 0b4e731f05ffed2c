// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Binary container for named tensors, and the checkpoint layer built on it.
//
// File layout (all integers little-endian):
//   magic   4 bytes  "WFWI"
//   version u16      currently 1
//   count   u32      number of tensors
//   per tensor:
//     name_len u16, name bytes (UTF-8)
//     rank     u8
//     dims     rank x u64
//     dtype    u8   (1 = f32, 2 = f64)
//     payload  row-major values, dtype-sized, little-endian
//
// Checkpoints reuse the container: model weights are stored under their own
// names and bookkeeping (module kind, config hash, step, RNG seed) under
// reserved "__checkpoint__/..." entries.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "waveop/params.hpp"
#include "waveop/tensor.hpp"

namespace waveop {

enum class Dtype : uint8_t { f32 = 1, f64 = 2 };

namespace detail {

constexpr char kMagic[4] = {'W', 'F', 'W', 'I'};
constexpr uint16_t kVersion = 1;

inline void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(uint8_t(v & 0xff));
    b.push_back(uint8_t(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::vector<uint8_t>& b, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(b, bits);
}

inline void put_f32(std::vector<uint8_t>& b, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(b, bits);
}

// Bounds-checked little-endian reader over an in-memory buffer.
struct ByteReader {
    const uint8_t* p;
    size_t n;
    size_t off = 0;

    void need(size_t k) const {
        if (off + k > n) throw error("tensorfile: truncated file");
    }
    uint8_t u8() {
        need(1);
        return p[off++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(p[off]) | uint16_t(p[off + 1]) << 8;
        off += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(p[off + size_t(i)]) << (8 * i);
        off += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(p[off + size_t(i)]) << (8 * i);
        off += 8;
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str(size_t k) {
        need(k);
        std::string s(reinterpret_cast<const char*>(p + off), k);
        off += k;
        return s;
    }
};

} // namespace detail

inline std::vector<uint8_t> serialize_tensors(const NamedParams& params, Dtype dtype = Dtype::f64) {
    std::vector<uint8_t> b;
    b.insert(b.end(), detail::kMagic, detail::kMagic + 4);
    detail::put_u16(b, detail::kVersion);
    if (params.items.size() > 0xffffffffull) throw error("tensorfile: too many tensors");
    detail::put_u32(b, uint32_t(params.items.size()));
    for (const auto& [name, t] : params.items) {
        if (name.size() > 0xffffull) throw error("tensorfile: tensor name too long");
        detail::put_u16(b, uint16_t(name.size()));
        b.insert(b.end(), name.begin(), name.end());
        const auto& shape = t.shape();
        if (shape.size() > 0xffull) throw error("tensorfile: rank too large");
        b.push_back(uint8_t(shape.size()));
        for (int64_t d : shape) detail::put_u64(b, uint64_t(d));
        b.push_back(uint8_t(dtype));
        if (dtype == Dtype::f64) {
            for (int64_t i = 0; i < t.numel(); ++i) detail::put_f64(b, t.data()[i]);
        } else {
            for (int64_t i = 0; i < t.numel(); ++i) detail::put_f32(b, float(t.data()[i]));
        }
    }
    return b;
}

inline NamedParams parse_tensors(const std::vector<uint8_t>& bytes) {
    detail::ByteReader r{bytes.data(), bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, detail::kMagic, 4) != 0) throw error("tensorfile: bad magic");
    r.off = 4;
    const uint16_t version = r.u16();
    if (version != detail::kVersion)
        throw error("tensorfile: unsupported version " + std::to_string(version));
    const uint32_t count = r.u32();
    NamedParams out;
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t name_len = r.u16();
        std::string name = r.str(name_len);
        const uint8_t rank = r.u8();
        Shape shape(rank);
        int64_t numel = 1;
        for (uint8_t d = 0; d < rank; ++d) {
            const uint64_t dim = r.u64();
            if (dim == 0 || dim > (1ull << 32)) throw error("tensorfile: bad dimension");
            shape[d] = int64_t(dim);
            numel *= shape[d];
        }
        const uint8_t dtype = r.u8();
        Tensor t(shape);
        if (dtype == uint8_t(Dtype::f64)) {
            for (int64_t j = 0; j < numel; ++j) t.data()[j] = r.f64();
        } else if (dtype == uint8_t(Dtype::f32)) {
            for (int64_t j = 0; j < numel; ++j) t.data()[j] = double(r.f32());
        } else {
            throw error("tensorfile: unknown dtype " + std::to_string(dtype));
        }
        out.add(name, t);
    }
    if (r.off != r.n) throw error("tensorfile: trailing bytes");
    return out;
}

inline void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw error("write failed: " + path);
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open: " + path);
    f.seekg(0, std::ios::end);
    const std::streamsize n = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(n), uint8_t(0));
    if (n > 0) f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw error("read failed: " + path);
    return bytes;
}

inline void save_tensorfile(const std::string& path, const NamedParams& params,
                            Dtype dtype = Dtype::f64) {
    write_file_bytes(path, serialize_tensors(params, dtype));
}

inline NamedParams load_tensorfile(const std::string& path) {
    return parse_tensors(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
    std::string kind;         // module identifier, e.g. "encoder+fno"
    uint64_t config_hash = 0; // hash of the run configuration that produced it
    int64_t step = 0;         // optimizer steps taken
    uint64_t rng_seed = 0;    // master seed; with step this pins the RNG state
    NamedParams tensors;
};

namespace detail {

inline Tensor u64_tensor(uint64_t v) {
    // Split into 32-bit halves so each value is exactly representable.
    Tensor t({2});
    t[0] = double(v >> 32);
    t[1] = double(v & 0xffffffffull);
    return t;
}

inline uint64_t u64_from_tensor(const Tensor& t) {
    if (t.numel() != 2) throw error("checkpoint: malformed integer field");
    return (uint64_t(t[0]) << 32) | uint64_t(t[1]);
}

} // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    NamedParams all;
    Tensor kind({int64_t(c.kind.size()) > 0 ? int64_t(c.kind.size()) : 1});
    for (size_t i = 0; i < c.kind.size(); ++i) kind[int64_t(i)] = double(uint8_t(c.kind[i]));
    all.add("__checkpoint__/kind_len", detail::u64_tensor(uint64_t(c.kind.size())));
    all.add("__checkpoint__/kind", kind);
    all.add("__checkpoint__/config_hash", detail::u64_tensor(c.config_hash));
    all.add("__checkpoint__/step", detail::u64_tensor(uint64_t(c.step)));
    all.add("__checkpoint__/rng_seed", detail::u64_tensor(c.rng_seed));
    for (const auto& [name, t] : c.tensors.items) all.add(name, t);
    save_tensorfile(path, all, Dtype::f64);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    NamedParams all = load_tensorfile(path);
    Checkpoint c;
    bool have_meta = false;
    uint64_t kind_len = 0;
    Tensor kind_chars;
    for (auto& [name, t] : all.items) {
        if (name == "__checkpoint__/kind_len") {
            kind_len = detail::u64_from_tensor(t);
        } else if (name == "__checkpoint__/kind") {
            kind_chars = t;
        } else if (name == "__checkpoint__/config_hash") {
            c.config_hash = detail::u64_from_tensor(t);
            have_meta = true;
        } else if (name == "__checkpoint__/step") {
            c.step = int64_t(detail::u64_from_tensor(t));
        } else if (name == "__checkpoint__/rng_seed") {
            c.rng_seed = detail::u64_from_tensor(t);
        } else {
            c.tensors.add(name, t);
        }
    }
    if (!have_meta) throw error("checkpoint: missing metadata in " + path);
    if (int64_t(kind_len) > kind_chars.numel()) throw error("checkpoint: malformed kind field");
    for (uint64_t i = 0; i < kind_len; ++i)
        c.kind.push_back(char(uint8_t(kind_chars[int64_t(i)])));
    return c;
}

// Copies stored weights into a model's registry by name. Every model parameter
// must be present with a matching element count.
inline void load_weights_into(NamedParams& model, const NamedParams& stored) {
    for (auto& [name, t] : model.items) {
        const Tensor* src = nullptr;
        for (const auto& [sn, st] : stored.items)
            if (sn == name) {
                src = &st;
                break;
            }
        if (!src) throw error("checkpoint: missing tensor " + name);
        if (src->numel() != t.numel())
            throw error("checkpoint: size mismatch for " + name);
        std::copy(src->data(), src->data() + src->numel(), t.data());
    }
}

} // namespace waveop
