// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seismic-gather encoder: flattens a multi-shot gather into a single wide
// image, embeds it as patch tokens, runs a pre-norm transformer with a class
// token, and decodes the patch tokens into a fixed-size latent field aligned
// with the velocity-model grid. A bilinear resize-only baseline is included
// for ablations.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "waveop/ops.hpp"
#include "waveop/params.hpp"

namespace waveop {

struct EncoderConfig {
    // Input gather, shots x time x receivers.
    int shots = 5;
    int time_steps = 1000;
    int receivers = 70;
    // Patch grid over the flattened [1 x time x shots*receivers] image.
    int patch_t = 20;
    int patch_x = 10;
    int embed = 64;
    int blocks = 4;
    int heads = 4;
    int mlp_ratio = 4;
    // Latent output field and velocity-type head.
    int latent_channels = 16;
    int out_h = 70;
    int out_w = 70;
    int type_classes = 4;

    int image_w() const { return shots * receivers; }
    int tokens_t() const { return (time_steps + patch_t - 1) / patch_t; }
    int tokens_x() const { return (image_w() + patch_x - 1) / patch_x; }
    int tokens() const { return tokens_t() * tokens_x(); }

    void validate() const {
        if (shots < 1 || time_steps < 1 || receivers < 1)
            throw shape_error("encoder: bad gather dims");
        if (patch_t < 1 || patch_x < 1) throw shape_error("encoder: bad patch dims");
        if (embed < 1 || blocks < 0 || heads < 1 || embed % heads != 0)
            throw shape_error("encoder: embed must be a positive multiple of heads");
        if (latent_channels < 1 || out_h < 1 || out_w < 1)
            throw shape_error("encoder: bad latent dims");
        if (type_classes < 2)
            throw shape_error("encoder: type head needs at least 2 classes");
    }
};

// Bijective flattening [shots, T, R] -> [1, T, shots*R]; shot blocks are laid
// side by side along the receiver axis.
inline Tensor reshape_input(const Tensor& s) {
    if (s.rank() != 3) throw shape_error("reshape_input: want [shots, T, R]");
    const int64_t Ns = s.dim(0), T = s.dim(1), R = s.dim(2);
    Tensor out({1, T, Ns * R});
    for (int64_t sh = 0; sh < Ns; ++sh)
        for (int64_t t = 0; t < T; ++t)
            for (int64_t r = 0; r < R; ++r)
                out[t * (Ns * R) + sh * R + r] = s[(sh * T + t) * R + r];
    return out;
}

// Inverse of reshape_input, for round-trip checks.
inline Tensor reshape_input_inverse(const Tensor& img, int64_t Ns, int64_t T, int64_t R) {
    if (img.rank() != 3 || img.dim(0) != 1 || img.dim(1) != T || img.dim(2) != Ns * R)
        throw shape_error("reshape_input_inverse: bad shapes");
    Tensor out({Ns, T, R});
    for (int64_t sh = 0; sh < Ns; ++sh)
        for (int64_t t = 0; t < T; ++t)
            for (int64_t r = 0; r < R; ++r)
                out[(sh * T + t) * R + r] = img[t * (Ns * R) + sh * R + r];
    return out;
}

// Resize-only ablation baseline: bilinear map of the flattened gather onto the
// velocity grid, a single channel, no learned parameters.
inline Tensor resize_baseline(const Tensor& img, int64_t out_h = 70, int64_t out_w = 70) {
    if (img.rank() != 3 || img.dim(0) != 1)
        throw shape_error("resize_baseline: want [1, T, X]");
    return bilinear_resize(img, out_h, out_w);
}

class Encoder {
public:
    EncoderConfig cfg;

    Tensor patch_w, patch_b; // [embed, 1, patch_t, patch_x], [embed]
    Tensor cls;              // [1, embed]
    Tensor pos;              // [tokens + 1, embed]
    struct Block {
        Tensor ln1_g, ln1_b;
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ln2_g, ln2_b;
        Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    };
    std::vector<Block> tblocks;
    Tensor lnf_g, lnf_b;
    Tensor proj_w, proj_b; // [embed, latent_channels], [latent_channels]
    Tensor type_w, type_b; // [embed, type_classes], [type_classes]

    Encoder(const EncoderConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        std::mt19937_64 rng(seed);
        const int D = cfg.embed;
        const double sd = 0.02;
        patch_w = Tensor::normal({D, 1, cfg.patch_t, cfg.patch_x}, rng, 0.0, sd);
        patch_b = Tensor::zeros({D});
        cls = Tensor::normal({1, D}, rng, 0.0, sd);
        pos = Tensor::normal({cfg.tokens() + 1, D}, rng, 0.0, sd);
        const int Dm = D * cfg.mlp_ratio;
        tblocks.resize(size_t(cfg.blocks));
        for (auto& b : tblocks) {
            b.ln1_g = Tensor::ones({D});
            b.ln1_b = Tensor::zeros({D});
            b.wq = Tensor::normal({D, D}, rng, 0.0, sd);
            b.bq = Tensor::zeros({D});
            b.wk = Tensor::normal({D, D}, rng, 0.0, sd);
            b.bk = Tensor::zeros({D});
            b.wv = Tensor::normal({D, D}, rng, 0.0, sd);
            b.bv = Tensor::zeros({D});
            b.wo = Tensor::normal({D, D}, rng, 0.0, sd);
            b.bo = Tensor::zeros({D});
            b.ln2_g = Tensor::ones({D});
            b.ln2_b = Tensor::zeros({D});
            b.mlp_w1 = Tensor::normal({D, Dm}, rng, 0.0, sd);
            b.mlp_b1 = Tensor::zeros({Dm});
            b.mlp_w2 = Tensor::normal({Dm, D}, rng, 0.0, sd);
            b.mlp_b2 = Tensor::zeros({D});
        }
        lnf_g = Tensor::ones({D});
        lnf_b = Tensor::zeros({D});
        proj_w = Tensor::normal({D, cfg.latent_channels}, rng, 0.0, sd);
        proj_b = Tensor::zeros({cfg.latent_channels});
        type_w = Tensor::normal({D, cfg.type_classes}, rng, 0.0, sd);
        type_b = Tensor::zeros({cfg.type_classes});
    }

    NamedParams params() const {
        NamedParams p;
        p.add("patch_w", patch_w);
        p.add("patch_b", patch_b);
        p.add("cls", cls);
        p.add("pos", pos);
        for (size_t i = 0; i < tblocks.size(); ++i) {
            const auto& b = tblocks[i];
            const std::string pre = "block" + std::to_string(i) + ".";
            p.add(pre + "ln1_g", b.ln1_g);
            p.add(pre + "ln1_b", b.ln1_b);
            p.add(pre + "wq", b.wq);
            p.add(pre + "bq", b.bq);
            p.add(pre + "wk", b.wk);
            p.add(pre + "bk", b.bk);
            p.add(pre + "wv", b.wv);
            p.add(pre + "bv", b.bv);
            p.add(pre + "wo", b.wo);
            p.add(pre + "bo", b.bo);
            p.add(pre + "ln2_g", b.ln2_g);
            p.add(pre + "ln2_b", b.ln2_b);
            p.add(pre + "mlp_w1", b.mlp_w1);
            p.add(pre + "mlp_b1", b.mlp_b1);
            p.add(pre + "mlp_w2", b.mlp_w2);
            p.add(pre + "mlp_b2", b.mlp_b2);
        }
        p.add("lnf_g", lnf_g);
        p.add("lnf_b", lnf_b);
        p.add("proj_w", proj_w);
        p.add("proj_b", proj_b);
        p.add("type_w", type_w);
        p.add("type_b", type_b);
        return p;
    }

    // Token sequence [tokens + 1, embed] after all transformer blocks and the
    // final layer norm; row 0 is the class token.
    Tensor encode_tokens(const Tensor& img) const {
        if (img.rank() != 3 || img.dim(0) != 1 || img.dim(1) != cfg.time_steps ||
            img.dim(2) != cfg.image_w())
            throw shape_error("encoder: want [1, " + std::to_string(cfg.time_steps) + ", " +
                              std::to_string(cfg.image_w()) + "], got " + shape_str(img.shape()));
        const int D = cfg.embed;
        const int N = cfg.tokens();
        Tensor padded = pad_to_patches(img);
        Conv2dSpec sp;
        sp.stride_h = cfg.patch_t;
        sp.stride_w = cfg.patch_x;
        Tensor grid = conv2d(padded, patch_w, patch_b, sp);     // [D, th, tw]
        Tensor tokens = transpose2d(grid.view({D, N}));          // [N, D]
        tokens = add(tokens, narrow(pos, 0, 1, N));
        Tensor cls_tok = add(cls, narrow(pos, 0, 0, 1));
        Tensor x = concat(cls_tok, tokens, 0);                   // [N+1, D]
        for (const auto& b : tblocks) {
            x = add(x, attention(layer_norm_rows(x, b.ln1_g, b.ln1_b), b));
            Tensor h = layer_norm_rows(x, b.ln2_g, b.ln2_b);
            h = linear(gelu(linear(h, b.mlp_w1, b.mlp_b1)), b.mlp_w2, b.mlp_b2);
            x = add(x, h);
        }
        return layer_norm_rows(x, lnf_g, lnf_b);
    }

    // Latent field [latent_channels, out_h, out_w] from an encode_tokens
    // result: project the patch tokens per channel, then bilinearly resample
    // the token lattice onto the output grid (both maps are linear, so the
    // order does not change the result).
    Tensor latent_from_tokens(const Tensor& x) const {
        const int N = cfg.tokens();
        Tensor patch_tokens = narrow(x, 0, 1, N);                 // [N, D]
        Tensor lat = linear(patch_tokens, proj_w, proj_b);        // [N, C]
        lat = transpose2d(lat).view({cfg.latent_channels, cfg.tokens_t(), cfg.tokens_x()});
        return bilinear_resize(lat, cfg.out_h, cfg.out_w);
    }

    // Velocity-family logits [type_classes] from the class-token row of an
    // encode_tokens result.
    Tensor type_logits_from_tokens(const Tensor& x) const {
        Tensor cls_final = narrow(x, 0, 0, 1); // [1, D]
        return linear(cls_final, type_w, type_b).view({cfg.type_classes});
    }

    Tensor encode(const Tensor& img) const { return latent_from_tokens(encode_tokens(img)); }

    // Velocity-family logits [type_classes] from the class token.
    Tensor type_logits(const Tensor& img) const {
        return type_logits_from_tokens(encode_tokens(img));
    }

    // Softmax distribution over velocity families.
    Tensor type_head(const Tensor& img) const {
        return softmax_rows(type_logits(img).view({1, cfg.type_classes}))
            .view({cfg.type_classes});
    }

private:
    Tensor pad_to_patches(const Tensor& img) const {
        const int64_t T = img.dim(1), X = img.dim(2);
        const int64_t Tp = int64_t(cfg.tokens_t()) * cfg.patch_t;
        const int64_t Xp = int64_t(cfg.tokens_x()) * cfg.patch_x;
        if (Tp == T && Xp == X) return img;
        Tensor out = img;
        if (Xp > X) out = concat(out, Tensor::zeros({1, T, Xp - X}), 2);
        if (Tp > T) out = concat(out, Tensor::zeros({1, Tp - T, Xp}), 1);
        return out;
    }

    Tensor attention(const Tensor& h, const Block& b) const {
        const int64_t D = cfg.embed, Hh = cfg.heads, dh = D / Hh;
        Tensor q = linear(h, b.wq, b.bq);
        Tensor k = linear(h, b.wk, b.bk);
        Tensor v = linear(h, b.wv, b.bv);
        Tensor out;
        for (int64_t head = 0; head < Hh; ++head) {
            Tensor qh = narrow(q, 1, head * dh, dh);
            Tensor kh = narrow(k, 1, head * dh, dh);
            Tensor vh = narrow(v, 1, head * dh, dh);
            Tensor scores = scale(matmul_op(qh, transpose2d(kh)), 1.0 / std::sqrt(double(dh)));
            Tensor oh = matmul_op(softmax_rows(scores), vh);
            out = out.defined() ? concat(out, oh, 1) : oh;
        }
        return linear(out, b.wo, b.bo);
    }
};

} // namespace waveop
