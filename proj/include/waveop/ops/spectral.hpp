// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Differentiable spectral ops. Complex tensors carry an interleaved trailing
// dimension of size 2 (re, im). The 2D forward transform is unnormalized and
// the inverse carries 1/(H*W), so the adjoints are
//   d/dx  fft2      : Re(conj(fft2(conj(g))))
//   d/dz  Re(ifft2) : fft2(g) / (H*W)

#include "waveop/fft.hpp"
#include "waveop/tape.hpp"

namespace waveop {

// [C x H x W] real -> [C x H x W x 2] spectrum.
inline Tensor fft2_op(const Tensor& x) {
    if (x.rank() != 3) throw shape_error("fft2: want [C,H,W]");
    const int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int64_t hw = H * W;
    Tensor out({C, H, W, 2});
    std::vector<fft::cplx> buf(static_cast<size_t>(hw));
    for (int64_t c = 0; c < C; ++c) {
        for (int64_t i = 0; i < hw; ++i) buf[size_t(i)] = {x[c * hw + i], 0.0};
        fft::fft2_forward(buf.data(), int(H), int(W));
        for (int64_t i = 0; i < hw; ++i) {
            out[(c * hw + i) * 2] = buf[size_t(i)].real();
            out[(c * hw + i) * 2 + 1] = buf[size_t(i)].imag();
        }
    }
    if (Tape* tp = Tape::current()) {
        auto xs = x.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gx = t.grad_acc(xs.get(), C * hw);
            std::vector<fft::cplx> g(static_cast<size_t>(hw));
            for (int64_t c = 0; c < C; ++c) {
                for (int64_t i = 0; i < hw; ++i)
                    g[size_t(i)] = {go[(c * hw + i) * 2], -go[(c * hw + i) * 2 + 1]};
                fft::fft2_forward(g.data(), int(H), int(W));
                for (int64_t i = 0; i < hw; ++i) gx[c * hw + i] += g[size_t(i)].real();
            }
        });
    }
    return out;
}

// Real part of the normalized inverse transform: [C x H x W x 2] -> [C x H x W].
inline Tensor ifft2_real_op(const Tensor& z) {
    if (z.rank() != 4 || z.dim(3) != 2) throw shape_error("ifft2_real: want [C,H,W,2]");
    const int64_t C = z.dim(0), H = z.dim(1), W = z.dim(2);
    const int64_t hw = H * W;
    Tensor out({C, H, W});
    std::vector<fft::cplx> buf(static_cast<size_t>(hw));
    for (int64_t c = 0; c < C; ++c) {
        for (int64_t i = 0; i < hw; ++i)
            buf[size_t(i)] = {z[(c * hw + i) * 2], z[(c * hw + i) * 2 + 1]};
        fft::fft2_inverse(buf.data(), int(H), int(W));
        for (int64_t i = 0; i < hw; ++i) out[c * hw + i] = buf[size_t(i)].real();
    }
    if (Tape* tp = Tape::current()) {
        auto zs = z.storage(), os = out.storage();
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gz = t.grad_acc(zs.get(), C * hw * 2);
            std::vector<fft::cplx> g(static_cast<size_t>(hw));
            const double scale = 1.0 / double(hw);
            for (int64_t c = 0; c < C; ++c) {
                for (int64_t i = 0; i < hw; ++i) g[size_t(i)] = {go[c * hw + i], 0.0};
                fft::fft2_forward(g.data(), int(H), int(W));
                for (int64_t i = 0; i < hw; ++i) {
                    gz[(c * hw + i) * 2] += g[size_t(i)].real() * scale;
                    gz[(c * hw + i) * 2 + 1] += g[size_t(i)].imag() * scale;
                }
            }
        });
    }
    return out;
}

// Per-mode channel mixing for the spectral operator. A mode (kr, kc) is kept
// when its folded frequency (min(k, N-k) on each axis) is below the cutoff;
// conjugate corners address the same weight entry. z [Ci,H,W,2],
// wt [mx,my,Ci,Co,2] -> [Co,H,W,2]; dropped modes are zero.
inline Tensor fno_mode_mix(const Tensor& z, const Tensor& wt) {
    if (z.rank() != 4 || z.dim(3) != 2) throw shape_error("fno_mode_mix: want z[Ci,H,W,2]");
    if (wt.rank() != 5 || wt.dim(4) != 2)
        throw shape_error("fno_mode_mix: want wt[mx,my,Ci,Co,2]");
    const int64_t Ci = z.dim(0), H = z.dim(1), W = z.dim(2);
    const int64_t mx = wt.dim(0), my = wt.dim(1), Co = wt.dim(3);
    if (wt.dim(2) != Ci) throw shape_error("fno_mode_mix: channel mismatch");
    if (mx > (H + 1) / 2 || my > (W + 1) / 2)
        throw shape_error("fno_mode_mix: mode count exceeds grid Nyquist limit");
    const int64_t hw = H * W;
    Tensor out({Co, H, W, 2});
    auto fold = [](int64_t k, int64_t n) { return std::min(k, n - k); };
    for (int64_t kr = 0; kr < H; ++kr) {
        const int64_t fr = fold(kr, H);
        if (fr >= mx) continue;
        for (int64_t kc = 0; kc < W; ++kc) {
            const int64_t fc = fold(kc, W);
            if (fc >= my) continue;
            const int64_t pix = kr * W + kc;
            for (int64_t co = 0; co < Co; ++co) {
                double acc_re = 0.0, acc_im = 0.0;
                for (int64_t ci = 0; ci < Ci; ++ci) {
                    const int64_t wi = (((fr * my + fc) * Ci + ci) * Co + co) * 2;
                    const int64_t zi = (ci * hw + pix) * 2;
                    acc_re += wt[wi] * z[zi] - wt[wi + 1] * z[zi + 1];
                    acc_im += wt[wi] * z[zi + 1] + wt[wi + 1] * z[zi];
                }
                const int64_t oi = (co * hw + pix) * 2;
                out[oi] = acc_re;
                out[oi + 1] = acc_im;
            }
        }
    }
    if (Tape* tp = Tape::current()) {
        auto zs = z.storage(), ws = wt.storage(), os = out.storage();
        Tensor zc = z, wc = wt;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gz = t.grad_acc(zs.get(), Ci * hw * 2);
            double* gw = t.grad_acc(ws.get(), mx * my * Ci * Co * 2);
            for (int64_t kr = 0; kr < H; ++kr) {
                const int64_t fr = std::min(kr, H - kr);
                if (fr >= mx) continue;
                for (int64_t kc = 0; kc < W; ++kc) {
                    const int64_t fc = std::min(kc, W - kc);
                    if (fc >= my) continue;
                    const int64_t pix = kr * W + kc;
                    for (int64_t co = 0; co < Co; ++co) {
                        const int64_t oi = (co * hw + pix) * 2;
                        const double gr = go[oi], gi = go[oi + 1];
                        if (gr == 0.0 && gi == 0.0) continue;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            const int64_t wi = (((fr * my + fc) * Ci + ci) * Co + co) * 2;
                            const int64_t zi = (ci * hw + pix) * 2;
                            // bar_z += conj(w) * g ; bar_w += conj(z) * g
                            gz[zi] += wc[wi] * gr + wc[wi + 1] * gi;
                            gz[zi + 1] += wc[wi] * gi - wc[wi + 1] * gr;
                            gw[wi] += zc[zi] * gr + zc[zi + 1] * gi;
                            gw[wi + 1] += zc[zi] * gi - zc[zi + 1] * gr;
                        }
                    }
                }
            }
        });
    }
    return out;
}

// Modulus of an interleaved complex tensor [... x 2] -> [...]; gradient is
// z/|z| with the zero-modulus subgradient taken as 0.
inline Tensor complex_abs(const Tensor& z) {
    if (z.rank() < 1 || z.dim(z.rank() - 1) != 2)
        throw shape_error("complex_abs: trailing dim must be 2");
    Shape oshape(z.shape().begin(), z.shape().end() - 1);
    const int64_t n = shape_numel(oshape);
    Tensor out(oshape);
    for (int64_t i = 0; i < n; ++i)
        out[i] = std::hypot(z[2 * i], z[2 * i + 1]);
    if (Tape* tp = Tape::current()) {
        auto zs = z.storage(), os = out.storage();
        Tensor zc = z, oc = out;
        tp->record(os.get(), [=](Tape& t) {
            const double* go = t.grad_of(os.get());
            double* gz = t.grad_acc(zs.get(), n * 2);
            for (int64_t i = 0; i < n; ++i) {
                if (oc[i] == 0.0) continue;
                gz[2 * i] += go[i] * zc[2 * i] / oc[i];
                gz[2 * i + 1] += go[i] * zc[2 * i + 1] / oc[i];
            }
        });
    }
    return out;
}

} // namespace waveop
