// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Four latent-to-velocity operator families sharing one interface: a spectral
// (Fourier) operator, a wavelet multi-resolution operator, a multiscale
// dilated-convolution operator, and a local operator built from a
// finite-radius stencil plus a pointwise map of spatial gradients. Each maps a
// latent field [C x H x W] to a single-channel prediction [1 x H x W].

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "waveop/ops.hpp"
#include "waveop/params.hpp"

namespace waveop {

enum class ExpertKind { FNO = 0, WNO = 1, MNO = 2, LNO = 3 };

inline const char* expert_kind_name(ExpertKind k) {
    switch (k) {
        case ExpertKind::FNO: return "fno";
        case ExpertKind::WNO: return "wno";
        case ExpertKind::MNO: return "mno";
        case ExpertKind::LNO: return "lno";
    }
    throw error("unknown expert kind");
}

inline ExpertKind expert_kind_from_name(const std::string& s) {
    if (s == "fno") return ExpertKind::FNO;
    if (s == "wno") return ExpertKind::WNO;
    if (s == "mno") return ExpertKind::MNO;
    if (s == "lno") return ExpertKind::LNO;
    throw error("unknown expert kind: " + s);
}

constexpr std::array<ExpertKind, 4> kAllExpertKinds = {ExpertKind::FNO, ExpertKind::WNO,
                                                       ExpertKind::MNO, ExpertKind::LNO};

struct OperatorConfig {
    int channels = 16; // latent input channels
    int hidden = 16;
    int layers = 2;
    // Fourier operator
    int modes_x = 12;
    int modes_y = 12;
    bool fno_bypass = true;
    // Wavelet operator
    int wno_depth = 3;
    // Multiscale operator: dilations 1, 2, 4, ...
    int mno_scales = 3;
    // Local operator stencil radius
    int lno_radius = 3;

    void validate() const {
        if (channels < 1 || hidden < 1 || layers < 1) throw shape_error("operator: bad dims");
        if (modes_x < 1 || modes_y < 1) throw shape_error("operator: bad mode counts");
        if (wno_depth < 1) throw shape_error("operator: bad wavelet depth");
        if (mno_scales < 1) throw shape_error("operator: bad scale count");
        if (lno_radius < 1) throw shape_error("operator: bad stencil radius");
    }
};

class Operator {
public:
    virtual ~Operator() = default;
    virtual ExpertKind kind() const = 0;
    virtual Tensor apply(const Tensor& z) const = 0;
    virtual NamedParams params() const = 0;
    const char* kind_name() const { return expert_kind_name(kind()); }

protected:
    static void check_input(const Tensor& z, int channels) {
        if (z.rank() != 3 || z.dim(0) != channels)
            throw shape_error("operator: want latent [" + std::to_string(channels) +
                              ", H, W], got " + shape_str(z.shape()));
    }
};

namespace detail {

inline Tensor conv_kernel_init(Shape shape, std::mt19937_64& rng) {
    int64_t fan_in = 1;
    for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
    return Tensor::normal(shape, rng, 0.0, std::sqrt(2.0 / double(fan_in)));
}

// Forward-difference gradients along x (last axis) and y, zero at the far
// edge, stacked on the channel axis: [C,H,W] -> [2C,H,W].
inline Tensor forward_diff_stack(const Tensor& h) {
    const int64_t C = h.dim(0), H = h.dim(1), W = h.dim(2);
    Tensor dx = sub(narrow(h, 2, 1, W - 1), narrow(h, 2, 0, W - 1));
    dx = concat(dx, Tensor::zeros({C, H, 1}), 2);
    Tensor dy = sub(narrow(h, 1, 1, H - 1), narrow(h, 1, 0, H - 1));
    dy = concat(dy, Tensor::zeros({C, 1, W}), 1);
    return concat(dx, dy, 0);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Fourier operator: per layer, mix a low-frequency block of FFT modes with a
// learned complex channel map, add an optional pointwise linear bypass, then a
// pointwise nonlinearity.
class FnoOperator : public Operator {
public:
    OperatorConfig cfg;
    Tensor lift_w, lift_b;
    std::vector<Tensor> spec_w;         // per layer [mx, my, hidden, hidden, 2]
    std::vector<Tensor> byp_w, byp_b;   // per layer [hidden, hidden], [hidden]
    Tensor proj_w, proj_b;

    FnoOperator(const OperatorConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        std::mt19937_64 rng(seed);
        const int Hd = cfg.hidden;
        lift_w = detail::conv_kernel_init({Hd, cfg.channels}, rng);
        lift_b = Tensor::zeros({Hd});
        const double sspec = 1.0 / double(Hd) / double(Hd);
        for (int l = 0; l < cfg.layers; ++l) {
            spec_w.push_back(
                Tensor::uniform({cfg.modes_x, cfg.modes_y, Hd, Hd, 2}, rng, 0.0, sspec));
            byp_w.push_back(detail::conv_kernel_init({Hd, Hd}, rng));
            byp_b.push_back(Tensor::zeros({Hd}));
        }
        proj_w = detail::conv_kernel_init({1, Hd}, rng);
        proj_b = Tensor::zeros({1});
    }

    ExpertKind kind() const override { return ExpertKind::FNO; }

    // One spectral layer before the nonlinearity.
    Tensor spectral_layer(const Tensor& h, int l) const {
        Tensor z = fft2_op(h);
        z = fno_mode_mix(z, spec_w[size_t(l)]);
        Tensor y = ifft2_real_op(z);
        if (cfg.fno_bypass) y = add(y, conv1x1(h, byp_w[size_t(l)], byp_b[size_t(l)]));
        return y;
    }

    Tensor core(const Tensor& h0) const {
        Tensor h = h0;
        for (int l = 0; l < cfg.layers; ++l) h = gelu(spectral_layer(h, l));
        return h;
    }

    Tensor apply(const Tensor& z) const override {
        check_input(z, cfg.channels);
        return conv1x1(core(conv1x1(z, lift_w, lift_b)), proj_w, proj_b);
    }

    NamedParams params() const override {
        NamedParams p;
        p.add("lift_w", lift_w);
        p.add("lift_b", lift_b);
        for (int l = 0; l < cfg.layers; ++l) {
            const std::string pre = "layer" + std::to_string(l) + ".";
            p.add(pre + "spec_w", spec_w[size_t(l)]);
            p.add(pre + "byp_w", byp_w[size_t(l)]);
            p.add(pre + "byp_b", byp_b[size_t(l)]);
        }
        p.add("proj_w", proj_w);
        p.add("proj_b", proj_b);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Wavelet operator: multi-level 2D Haar pyramid; learnable per-channel scales
// on the three detail bands of every level and on the deepest approximation
// band; inverse transform; nonlinearity; projection. Unit scales make the
// transform an exact identity.
class WnoOperator : public Operator {
public:
    OperatorConfig cfg;
    Tensor lift_w, lift_b;
    std::vector<Tensor> detail_scale; // per level [hidden * 3]
    Tensor approx_scale;              // [hidden]
    Tensor proj_w, proj_b;

    WnoOperator(const OperatorConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        std::mt19937_64 rng(seed);
        const int Hd = cfg.hidden;
        lift_w = detail::conv_kernel_init({Hd, cfg.channels}, rng);
        lift_b = Tensor::zeros({Hd});
        for (int l = 0; l < cfg.wno_depth; ++l)
            detail_scale.push_back(Tensor::ones({Hd * 3}));
        approx_scale = Tensor::ones({Hd});
        proj_w = detail::conv_kernel_init({1, Hd}, rng);
        proj_b = Tensor::zeros({1});
    }

    ExpertKind kind() const override { return ExpertKind::WNO; }

    // Decompose-scale-reconstruct across the pyramid.
    Tensor transform(const Tensor& h0) const {
        const int64_t C = h0.dim(0);
        std::vector<Tensor> scaled_details;
        std::vector<std::pair<int64_t, int64_t>> extents;
        Tensor cur = h0;
        for (int l = 0; l < cfg.wno_depth; ++l) {
            const int64_t H = cur.dim(1), W = cur.dim(2);
            if (H < 2 || W < 2)
                throw shape_error("wavelet operator: depth " + std::to_string(cfg.wno_depth) +
                                  " exceeds what a " + shape_str(h0.shape()) +
                                  " field supports");
            extents.emplace_back(H, W);
            const int64_t h2 = (H + 1) / 2, w2 = (W + 1) / 2;
            Tensor bands = haar_level(cur);                        // [C,4,h2,w2]
            Tensor det = narrow(bands, 1, 1, 3).view({C * 3, h2, w2});
            det = scale_rows(det, detail_scale[size_t(l)]).view({C, 3, h2, w2});
            scaled_details.push_back(det);
            cur = narrow(bands, 1, 0, 1).view({C, h2, w2});
        }
        cur = scale_rows(cur, approx_scale);
        for (int l = cfg.wno_depth - 1; l >= 0; --l) {
            const auto [H, W] = extents[size_t(l)];
            const int64_t h2 = (H + 1) / 2, w2 = (W + 1) / 2;
            Tensor bands = concat(cur.view({C, 1, h2, w2}), scaled_details[size_t(l)], 1);
            cur = haar_level_inverse(bands, H, W);
        }
        return cur;
    }

    Tensor apply(const Tensor& z) const override {
        check_input(z, cfg.channels);
        Tensor h = conv1x1(z, lift_w, lift_b);
        return conv1x1(gelu(transform(h)), proj_w, proj_b);
    }

    NamedParams params() const override {
        NamedParams p;
        p.add("lift_w", lift_w);
        p.add("lift_b", lift_b);
        for (int l = 0; l < cfg.wno_depth; ++l)
            p.add("level" + std::to_string(l) + ".detail_scale", detail_scale[size_t(l)]);
        p.add("approx_scale", approx_scale);
        p.add("proj_w", proj_w);
        p.add("proj_b", proj_b);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Multiscale operator: parallel dilated 3x3 branches (dilation 1, 2, 4, ...)
// each followed by a residual pointwise map phi(u) = u + W2 gelu(W1 u + b1)
// + b2, summed across scales.
class MnoOperator : public Operator {
public:
    OperatorConfig cfg;
    Tensor lift_w, lift_b;
    struct Branch {
        Tensor k, kb;               // [hidden, hidden, 3, 3], [hidden]
        Tensor w1, b1, w2, b2;      // pointwise residual map
    };
    std::vector<std::vector<Branch>> branches; // [layer][scale]
    Tensor proj_w, proj_b;

    MnoOperator(const OperatorConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        std::mt19937_64 rng(seed);
        const int Hd = cfg.hidden;
        lift_w = detail::conv_kernel_init({Hd, cfg.channels}, rng);
        lift_b = Tensor::zeros({Hd});
        branches.resize(size_t(cfg.layers));
        for (auto& layer : branches) {
            layer.resize(size_t(cfg.mno_scales));
            for (auto& br : layer) {
                br.k = detail::conv_kernel_init({Hd, Hd, 3, 3}, rng);
                br.kb = Tensor::zeros({Hd});
                br.w1 = detail::conv_kernel_init({Hd, Hd}, rng);
                br.b1 = Tensor::zeros({Hd});
                br.w2 = Tensor::zeros({Hd, Hd});
                br.b2 = Tensor::zeros({Hd});
            }
        }
        proj_w = detail::conv_kernel_init({1, Hd}, rng);
        proj_b = Tensor::zeros({1});
    }

    ExpertKind kind() const override { return ExpertKind::MNO; }

    static Tensor pointwise_residual(const Tensor& u, const Branch& br) {
        return add(u, conv1x1(gelu(conv1x1(u, br.w1, br.b1)), br.w2, br.b2));
    }

    // Sum of dilated branches for one layer, before the nonlinearity.
    Tensor mixing_layer(const Tensor& h, int l) const {
        Tensor out;
        int dil = 1;
        for (const auto& br : branches[size_t(l)]) {
            Tensor u = conv2d_same(h, br.k, br.kb, dil);
            u = pointwise_residual(u, br);
            out = out.defined() ? add(out, u) : u;
            dil *= 2;
        }
        return out;
    }

    Tensor core(const Tensor& h0) const {
        Tensor h = h0;
        for (int l = 0; l < cfg.layers; ++l) h = gelu(mixing_layer(h, l));
        return h;
    }

    Tensor apply(const Tensor& z) const override {
        check_input(z, cfg.channels);
        return conv1x1(core(conv1x1(z, lift_w, lift_b)), proj_w, proj_b);
    }

    NamedParams params() const override {
        NamedParams p;
        p.add("lift_w", lift_w);
        p.add("lift_b", lift_b);
        for (int l = 0; l < cfg.layers; ++l)
            for (int s = 0; s < cfg.mno_scales; ++s) {
                const auto& br = branches[size_t(l)][size_t(s)];
                const std::string pre =
                    "layer" + std::to_string(l) + ".scale" + std::to_string(s) + ".";
                p.add(pre + "k", br.k);
                p.add(pre + "kb", br.kb);
                p.add(pre + "w1", br.w1);
                p.add(pre + "b1", br.b1);
                p.add(pre + "w2", br.w2);
                p.add(pre + "b2", br.b2);
            }
        p.add("proj_w", proj_w);
        p.add("proj_b", proj_b);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Local operator: per layer, a finite-radius stencil convolution plus a
// pointwise two-layer map of forward-difference spatial gradients. A single
// layer cannot propagate information farther than radius + 1 cells.
class LnoOperator : public Operator {
public:
    OperatorConfig cfg;
    Tensor lift_w, lift_b;
    struct Layer {
        Tensor k, kb;               // [hidden, hidden, 2r+1, 2r+1], [hidden]
        Tensor psi_w1, psi_b1;      // [hidden, 2*hidden], [hidden]
        Tensor psi_w2, psi_b2;      // [hidden, hidden], [hidden]
    };
    std::vector<Layer> layers_;
    Tensor proj_w, proj_b;

    LnoOperator(const OperatorConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        std::mt19937_64 rng(seed);
        const int Hd = cfg.hidden;
        const int ks = 2 * cfg.lno_radius + 1;
        lift_w = detail::conv_kernel_init({Hd, cfg.channels}, rng);
        lift_b = Tensor::zeros({Hd});
        layers_.resize(size_t(cfg.layers));
        for (auto& ly : layers_) {
            ly.k = detail::conv_kernel_init({Hd, Hd, ks, ks}, rng);
            ly.kb = Tensor::zeros({Hd});
            ly.psi_w1 = detail::conv_kernel_init({Hd, 2 * Hd}, rng);
            ly.psi_b1 = Tensor::zeros({Hd});
            ly.psi_w2 = detail::conv_kernel_init({Hd, Hd}, rng);
            ly.psi_b2 = Tensor::zeros({Hd});
        }
        proj_w = detail::conv_kernel_init({1, Hd}, rng);
        proj_b = Tensor::zeros({1});
    }

    ExpertKind kind() const override { return ExpertKind::LNO; }

    // Stencil term plus gradient term, before the nonlinearity.
    Tensor local_layer(const Tensor& h, int l) const {
        const auto& ly = layers_[size_t(l)];
        Tensor grads = detail::forward_diff_stack(h);
        Tensor psi = conv1x1(gelu(conv1x1(grads, ly.psi_w1, ly.psi_b1)), ly.psi_w2, ly.psi_b2);
        return add(conv2d_same(h, ly.k, ly.kb), psi);
    }

    Tensor core(const Tensor& h0) const {
        Tensor h = h0;
        for (int l = 0; l < cfg.layers; ++l) h = gelu(local_layer(h, l));
        return h;
    }

    Tensor apply(const Tensor& z) const override {
        check_input(z, cfg.channels);
        return conv1x1(core(conv1x1(z, lift_w, lift_b)), proj_w, proj_b);
    }

    NamedParams params() const override {
        NamedParams p;
        p.add("lift_w", lift_w);
        p.add("lift_b", lift_b);
        for (int l = 0; l < cfg.layers; ++l) {
            const auto& ly = layers_[size_t(l)];
            const std::string pre = "layer" + std::to_string(l) + ".";
            p.add(pre + "k", ly.k);
            p.add(pre + "kb", ly.kb);
            p.add(pre + "psi_w1", ly.psi_w1);
            p.add(pre + "psi_b1", ly.psi_b1);
            p.add(pre + "psi_w2", ly.psi_w2);
            p.add(pre + "psi_b2", ly.psi_b2);
        }
        p.add("proj_w", proj_w);
        p.add("proj_b", proj_b);
        return p;
    }
};

inline std::unique_ptr<Operator> make_operator(ExpertKind k, const OperatorConfig& cfg,
                                               uint64_t seed) {
    switch (k) {
        case ExpertKind::FNO: return std::make_unique<FnoOperator>(cfg, seed);
        case ExpertKind::WNO: return std::make_unique<WnoOperator>(cfg, seed);
        case ExpertKind::MNO: return std::make_unique<MnoOperator>(cfg, seed);
        case ExpertKind::LNO: return std::make_unique<LnoOperator>(cfg, seed);
    }
    throw error("unknown expert kind");
}

} // namespace waveop
