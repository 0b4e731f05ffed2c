// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// 2D acoustic forward modeling and synthetic velocity-model families.
//
// The solver integrates  u_tt = v^2 lap(u) + s(t) delta(x - x_s)  with a
// second-order scheme in time and space on a regular grid: free surface
// (pressure zero) along the top edge, exponential sponge damping on the two
// sides and the bottom. Sources and receivers sit one cell below the free
// surface. Recording decimates the internal step to T samples.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "waveop/fft.hpp"
#include "waveop/tensor.hpp"

namespace waveop {

// ---------------------------------------------------------------------------
// acquisition & source wavelet

struct Acquisition {
    double f0 = 15.0;         // Ricker peak frequency, Hz
    double record_time = 1.0; // seconds
    int T = 1000;             // recorded samples per trace
    int Ns = 5;               // shots
    int R = 70;               // receivers (grid columns)
    int sponge = 20;          // absorbing cells on sides/bottom
    double cfl = 0.5;         // safety factor in the stability bound
    double dt = 0.0;          // internal step; 0 picks the largest stable divisor
    double amplitude = 1.0;   // source scale
    int src_depth = 1;        // row below the free surface
    int rec_depth = 1;
    std::vector<int> source_cols;   // empty: evenly spread, floor(R*(i+.5)/Ns)
    std::vector<int> receiver_cols; // empty: every column 0..R-1
};

inline double ricker(double f0, double t, double t0) {
    if (f0 <= 0) throw numeric_error("ricker: f0 must be positive");
    const double tau = t - t0;
    const double a = M_PI * M_PI * f0 * f0 * tau * tau;
    return (1.0 - 2.0 * a) * std::exp(-a);
}

inline std::vector<int> default_source_cols(int R, int Ns) {
    std::vector<int> cols(static_cast<size_t>(Ns));
    for (int i = 0; i < Ns; ++i) cols[size_t(i)] = int(R * (i + 0.5) / Ns);
    return cols;
}

// ---------------------------------------------------------------------------
// forward solver

namespace detail {

struct StepPlan {
    double dt;    // actual internal step
    int substeps; // internal steps per recorded sample
};

inline StepPlan plan_steps(const Tensor& v, double dx, const Acquisition& acq) {
    double vmax = 0.0;
    for (int64_t i = 0; i < v.numel(); ++i) {
        if (!(v[i] > 0.0)) throw numeric_error("simulate_shots: velocity must be positive");
        vmax = std::max(vmax, v[i]);
    }
    const double dt_stable = acq.cfl * dx / (std::sqrt(2.0) * vmax);
    const double dt_rec = acq.record_time / acq.T;
    if (acq.dt > 0.0) {
        if (acq.dt > dt_stable * (1.0 + 1e-12))
            throw numeric_error("simulate_shots: requested dt " + std::to_string(acq.dt) +
                                " violates the stability bound " + std::to_string(dt_stable));
        const int m = std::max(1, int(std::ceil(dt_rec / acq.dt - 1e-12)));
        return {dt_rec / m, m};
    }
    const int m = std::max(1, int(std::ceil(dt_rec / dt_stable - 1e-12)));
    return {dt_rec / m, m};
}

} // namespace detail

// Single-shot solve; trace_out must hold T*[receivers] doubles (time-major).
// When energy_out is non-null it receives sum(u^2) after every internal step.
inline void simulate_one_shot(const Tensor& v, double dx, const Acquisition& acq, int src_col,
                              double* trace_out, std::vector<double>* energy_out = nullptr) {
    if (v.rank() != 2) throw shape_error("simulate_shots: velocity must be [H,W]");
    const int H = int(v.dim(0)), W = int(v.dim(1));
    if (src_col < 0 || src_col >= W) throw shape_error("simulate_shots: source column out of range");
    std::vector<int> recs = acq.receiver_cols;
    if (recs.empty()) {
        recs.resize(size_t(acq.R));
        for (int r = 0; r < acq.R; ++r) recs[size_t(r)] = r;
    }
    for (int r : recs)
        if (r < 0 || r >= W) throw shape_error("simulate_shots: receiver column out of range");

    const auto plan = detail::plan_steps(v, dx, acq);
    const double dt = plan.dt;
    const int total_steps = acq.T * plan.substeps;

    // (v*dt/dx)^2 per cell
    std::vector<double> coef(size_t(H) * W);
    for (int64_t i = 0; i < v.numel(); ++i) {
        const double c = v[i] * dt / dx;
        coef[size_t(i)] = c * c;
    }

    // Exponential sponge ramp on left/right/bottom; top stays a free surface.
    std::vector<double> damp(size_t(H) * W, 1.0);
    for (int z = 0; z < H; ++z)
        for (int x = 0; x < W; ++x) {
            int k = 0;
            if (x < acq.sponge) k = std::max(k, acq.sponge - x);
            if (x >= W - acq.sponge) k = std::max(k, x - (W - 1 - acq.sponge));
            if (z >= H - acq.sponge) k = std::max(k, z - (H - 1 - acq.sponge));
            if (k > 0) {
                const double a = 0.015 * k;
                damp[size_t(z) * W + x] = std::exp(-a * a);
            }
        }

    std::vector<double> u_prev(size_t(H) * W, 0.0), u(size_t(H) * W, 0.0), u_next(size_t(H) * W, 0.0);
    const double t0 = 1.0 / acq.f0;
    const int64_t src_idx = int64_t(acq.src_depth) * W + src_col;
    if (energy_out) energy_out->clear();

    for (int n = 0; n < total_steps; ++n) {
        const double t = n * dt;
        for (int z = 1; z < H - 1; ++z) {
            const double* um = u.data() + size_t(z - 1) * W;
            const double* uc = u.data() + size_t(z) * W;
            const double* up = u.data() + size_t(z + 1) * W;
            const double* upr = u_prev.data() + size_t(z) * W;
            const double* cf = coef.data() + size_t(z) * W;
            double* un = u_next.data() + size_t(z) * W;
            for (int x = 1; x < W - 1; ++x) {
                const double lap = um[x] + up[x] + uc[x - 1] + uc[x + 1] - 4.0 * uc[x];
                un[x] = 2.0 * uc[x] - upr[x] + cf[x] * lap;
            }
        }
        u_next[size_t(src_idx)] += dt * dt * acq.amplitude * ricker(acq.f0, t, t0);
        // boundary rows/cols stay pinned at zero (free surface on top, the
        // sponge soaks up energy before the hard edges reflect)
        for (int x = 0; x < W; ++x) u_next[size_t(x)] = 0.0;
        for (int64_t i = 0; i < int64_t(H) * W; ++i) {
            u_next[size_t(i)] *= damp[size_t(i)];
            u[size_t(i)] *= damp[size_t(i)];
        }
        std::swap(u_prev, u);
        std::swap(u, u_next);
        if (energy_out) {
            double e = 0;
            for (double val : u) e += val * val;
            energy_out->push_back(e);
        }
        if ((n + 1) % plan.substeps == 0) {
            const int k = (n + 1) / plan.substeps - 1;
            for (size_t r = 0; r < recs.size(); ++r)
                trace_out[size_t(k) * recs.size() + r] = u[size_t(acq.rec_depth) * W + recs[r]];
        }
    }
    for (int64_t i = 0; i < int64_t(acq.T) * int64_t(recs.size()); ++i)
        if (!std::isfinite(trace_out[i])) throw numeric_error("simulate_shots: non-finite amplitude");
}

// Full gather [Ns x T x R].
inline Tensor simulate_shots(const Tensor& v, double dx, const Acquisition& acq) {
    std::vector<int> srcs = acq.source_cols;
    if (srcs.empty()) srcs = default_source_cols(acq.R, acq.Ns);
    const int R = acq.receiver_cols.empty() ? acq.R : int(acq.receiver_cols.size());
    Tensor out({int64_t(srcs.size()), acq.T, R});
    for (size_t s = 0; s < srcs.size(); ++s)
        simulate_one_shot(v, dx, acq, srcs[s], out.data() + int64_t(s) * acq.T * R);
    return out;
}

// First sample whose magnitude exceeds frac * max|trace|, as a time in
// seconds; -1 when the trace is all zero.
inline double first_arrival_time(const double* trace, int T, double dt_record, double frac = 0.01) {
    double peak = 0.0;
    for (int i = 0; i < T; ++i) peak = std::max(peak, std::abs(trace[i]));
    if (peak == 0.0) return -1.0;
    for (int i = 0; i < T; ++i)
        if (std::abs(trace[i]) > frac * peak) return (i + 1) * dt_record;
    return -1.0;
}

// ---------------------------------------------------------------------------
// velocity model families

struct FamilyParams {
    int layers_min = 3, layers_max = 5;
    bool monotone = true;      // depth-increasing layer velocities
    double curve_amp = 0.0;    // interface displacement amplitude, cells
    double curve_periods = 1.0;// max sine periods across the width
    double fault_throw = 0.0;  // vertical offset across the fault, cells
    double fault_dip = 0.35;   // horizontal drift of the fault per row
    double style_cutoff = 0.0; // >0: band-limited random field with this radius
    double v_min = 1500.0, v_max = 4500.0;
};

inline FamilyParams family_params(const std::string& family) {
    FamilyParams p;
    auto base = family;
    bool variant_b = false;
    if (base.size() > 2 && base.compare(base.size() - 2, 2, "-b") == 0) {
        variant_b = true;
        base = base.substr(0, base.size() - 2);
    } else if (base.size() > 2 && base.compare(base.size() - 2, 2, "-a") == 0) {
        base = base.substr(0, base.size() - 2);
    }
    if (base == "flat") {
        p.monotone = !variant_b;
        p.layers_min = variant_b ? 5 : 3;
        p.layers_max = variant_b ? 8 : 5;
    } else if (base == "curve") {
        p.monotone = !variant_b;
        p.layers_min = variant_b ? 5 : 3;
        p.layers_max = variant_b ? 8 : 5;
        p.curve_amp = variant_b ? 9.0 : 4.0;
        p.curve_periods = variant_b ? 2.0 : 1.0;
    } else if (base == "flat-fault") {
        p.monotone = !variant_b;
        p.layers_min = variant_b ? 5 : 3;
        p.layers_max = variant_b ? 8 : 5;
        p.fault_throw = variant_b ? 10.0 : 5.0;
        p.fault_dip = variant_b ? 0.6 : 0.35;
    } else if (base == "curve-fault") {
        p.monotone = !variant_b;
        p.layers_min = variant_b ? 5 : 3;
        p.layers_max = variant_b ? 8 : 5;
        p.curve_amp = variant_b ? 7.0 : 3.0;
        p.curve_periods = variant_b ? 2.0 : 1.0;
        p.fault_throw = variant_b ? 10.0 : 5.0;
        p.fault_dip = variant_b ? 0.6 : 0.35;
    } else if (base == "style") {
        p.style_cutoff = variant_b ? 10.0 : 5.0;
    } else {
        throw error("unknown velocity family: " + family);
    }
    return p;
}

inline Tensor generate_velocity(const std::string& family, uint64_t seed, const FamilyParams& p,
                                int H = 70, int W = 70) {
    if (p.layers_min < 1 || p.layers_max < p.layers_min || p.v_min <= 0 || p.v_max < p.v_min)
        throw error("generate_velocity: invalid params");
    std::mt19937_64 rng(fnv1a_str(family) ^ (0x9e3779b97f4a7c15ull * (seed + 1)));
    Tensor v({H, W});

    if (p.style_cutoff > 0.0) {
        // band-limited smoothed noise
        std::normal_distribution<double> nd(0.0, 1.0);
        std::vector<fft::cplx> f(size_t(H) * W);
        for (auto& c : f) c = {nd(rng), 0.0};
        fft::fft2_forward(f.data(), H, W);
        for (int ky = 0; ky < H; ++ky)
            for (int kx = 0; kx < W; ++kx) {
                const double fy = std::min(ky, H - ky), fx = std::min(kx, W - kx);
                const double r = std::sqrt(fy * fy + fx * fx) / p.style_cutoff;
                f[size_t(ky) * W + kx] *= std::exp(-r * r);
            }
        fft::fft2_inverse(f.data(), H, W);
        double lo = 1e300, hi = -1e300;
        for (auto& c : f) {
            lo = std::min(lo, c.real());
            hi = std::max(hi, c.real());
        }
        const double span = hi > lo ? hi - lo : 1.0;
        for (int64_t i = 0; i < v.numel(); ++i)
            v[i] = p.v_min + (p.v_max - p.v_min) * (f[size_t(i)].real() - lo) / span;
        return v;
    }

    std::uniform_int_distribution<int> nl(p.layers_min, p.layers_max);
    const int n = nl(rng);
    std::uniform_real_distribution<double> vd(p.v_min + 50.0, p.v_max - 50.0);
    std::vector<double> vels(static_cast<size_t>(n));
    for (auto& x : vels) x = vd(rng);
    if (p.monotone) std::sort(vels.begin(), vels.end());

    // interface depths with a minimum thickness, deterministic retry loop
    std::vector<double> cuts(size_t(std::max(0, n - 1)));
    if (n > 1) {
        std::uniform_real_distribution<double> cd(5.0, H - 6.0);
        for (int attempt = 0; attempt < 200; ++attempt) {
            for (auto& c : cuts) c = cd(rng);
            std::sort(cuts.begin(), cuts.end());
            bool ok = true;
            for (size_t i = 1; i < cuts.size(); ++i)
                if (cuts[i] - cuts[i - 1] < 4.0) ok = false;
            if (ok) break;
            if (attempt == 199)
                for (size_t i = 0; i < cuts.size(); ++i)
                    cuts[i] = (i + 1.0) * H / double(n);
        }
    }

    // per-interface sine displacement
    std::vector<double> amp(cuts.size(), 0.0), phase(cuts.size(), 0.0), per(cuts.size(), 1.0);
    if (p.curve_amp > 0.0) {
        std::uniform_real_distribution<double> ad(0.5, 1.0), phd(0.0, 2.0 * M_PI),
            pd(0.5, std::max(0.51, p.curve_periods));
        for (size_t i = 0; i < cuts.size(); ++i) {
            amp[i] = p.curve_amp * ad(rng);
            phase[i] = phd(rng);
            per[i] = pd(rng);
        }
    }

    // optional dipping fault: offset the layer stack vertically on one side
    double fault_x0 = -1.0, fault_dip = 0.0, throw_cells = 0.0;
    if (p.fault_throw > 0.0) {
        std::uniform_real_distribution<double> fx(W * 0.25, W * 0.75);
        std::uniform_int_distribution<int> sgn(0, 1);
        fault_x0 = fx(rng);
        fault_dip = (sgn(rng) ? 1.0 : -1.0) * p.fault_dip;
        throw_cells = (sgn(rng) ? 1.0 : -1.0) * p.fault_throw;
    }

    std::vector<double> depth(cuts.size());
    for (int x = 0; x < W; ++x) {
        for (size_t i = 0; i < cuts.size(); ++i)
            depth[i] = cuts[i] + amp[i] * std::sin(2.0 * M_PI * per[i] * x / (W - 1) + phase[i]);
        std::sort(depth.begin(), depth.end()); // keep interfaces non-crossing
        for (int z = 0; z < H; ++z) {
            double zz = double(z);
            if (fault_x0 >= 0.0 && x > fault_x0 + fault_dip * z) zz += throw_cells;
            int layer = 0;
            for (size_t i = 0; i < depth.size(); ++i)
                if (zz >= depth[i]) layer = int(i) + 1;
            v[int64_t(z) * W + x] = vels[size_t(layer)];
        }
    }
    for (int64_t i = 0; i < v.numel(); ++i) v[i] = std::clamp(v[i], p.v_min, p.v_max);
    return v;
}

inline Tensor generate_velocity(const std::string& family, uint64_t seed, int H = 70, int W = 70) {
    return generate_velocity(family, seed, family_params(family), H, W);
}

// ---------------------------------------------------------------------------
// per-subset standardization

struct NormStats {
    double mean_S = 0, std_S = 1, mean_V = 0, std_V = 1;
};

namespace detail {
inline void mean_std(const std::vector<const Tensor*>& ts, double& mean, double& stdd) {
    int64_t n = 0;
    double acc = 0;
    for (const Tensor* t : ts) {
        for (int64_t i = 0; i < t->numel(); ++i) acc += (*t)[i];
        n += t->numel();
    }
    if (n == 0) throw numeric_error("compute_norm_stats: empty dataset");
    mean = acc / double(n);
    double var = 0;
    for (const Tensor* t : ts)
        for (int64_t i = 0; i < t->numel(); ++i) {
            const double d = (*t)[i] - mean;
            var += d * d;
        }
    var /= double(n); // population statistics
    if (var <= 0) throw numeric_error("compute_norm_stats: zero variance");
    stdd = std::sqrt(var);
}
} // namespace detail

inline NormStats compute_norm_stats(const std::vector<const Tensor*>& gathers,
                                    const std::vector<const Tensor*>& models) {
    NormStats st;
    detail::mean_std(gathers, st.mean_S, st.std_S);
    detail::mean_std(models, st.mean_V, st.std_V);
    return st;
}

inline Tensor standardize(const Tensor& x, double mean, double stdd) {
    if (stdd <= 0) throw numeric_error("standardize: std must be positive");
    Tensor out(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) out[i] = (x[i] - mean) / stdd;
    return out;
}

inline Tensor destandardize(const Tensor& x, double mean, double stdd) {
    if (stdd <= 0) throw numeric_error("destandardize: std must be positive");
    Tensor out(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] * stdd + mean;
    return out;
}

} // namespace waveop
