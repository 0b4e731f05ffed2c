// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic dataset generation and loading.
//
// Directory layout:
//   <root>/manifest.json        ids, families, generation settings, norm stats
//   <root>/norm.wfwi            per-family standardization stats (f64 authority)
//   <root>/<family>/<id>.wfwi   per sample: "seis" [Ns,T,R] (f32), "vel" [1,H,W] (f64)
//
// Standardization statistics are computed per family over every sample of that
// family, from the f32-rounded amplitudes actually stored on disk, so reloaded
// data standardizes to exactly mean 0 / std 1. Generation is deterministic:
// rerunning with the same settings produces byte-identical directories.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveop/tensorfile.hpp"
#include "waveop/wavesim.hpp"

namespace waveop {

struct GenerateConfig {
    std::string out_dir;
    std::vector<std::string> families; // e.g. {"flat", "curve"}
    std::vector<int> counts;           // one count per family
    uint64_t seed = 1;
    int H = 70, W = 70;
    double dx = 10.0; // meters
    Acquisition acq;
};

struct SampleRef {
    std::string id;
    std::string family;
    std::string file; // relative to the dataset root
};

struct DatasetManifest {
    int version = 1;
    uint64_t seed = 1;
    int H = 70, W = 70;
    double dx = 10.0;
    Acquisition acq;
    std::vector<std::string> families;
    std::vector<int> counts;
    std::map<std::string, NormStats> norm; // per family
    std::vector<SampleRef> samples;
};

namespace detail {

inline nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["grid"] = {{"h", m.H}, {"w", m.W}, {"dx", m.dx}};
    j["acquisition"] = {{"f0", m.acq.f0},         {"record_time", m.acq.record_time},
                        {"t", m.acq.T},           {"ns", m.acq.Ns},
                        {"r", m.acq.R},           {"sponge", m.acq.sponge},
                        {"cfl", m.acq.cfl},       {"amplitude", m.acq.amplitude},
                        {"src_depth", m.acq.src_depth}, {"rec_depth", m.acq.rec_depth}};
    j["families"] = m.families;
    j["counts"] = m.counts;
    nlohmann::ordered_json norm;
    for (const auto& f : m.families) {
        const NormStats& st = m.norm.at(f);
        norm[f] = {{"mean_s", st.mean_S}, {"std_s", st.std_S}, {"mean_v", st.mean_V},
                   {"std_v", st.std_V}};
    }
    j["norm"] = norm;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& s : m.samples)
        samples.push_back({{"id", s.id}, {"family", s.family}, {"file", s.file}});
    j["samples"] = samples;
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    if (m.version != 1)
        throw error("manifest: unsupported version " + std::to_string(m.version));
    m.seed = j.at("seed").get<uint64_t>();
    m.H = j.at("grid").at("h").get<int>();
    m.W = j.at("grid").at("w").get<int>();
    m.dx = j.at("grid").at("dx").get<double>();
    const auto& a = j.at("acquisition");
    m.acq.f0 = a.at("f0").get<double>();
    m.acq.record_time = a.at("record_time").get<double>();
    m.acq.T = a.at("t").get<int>();
    m.acq.Ns = a.at("ns").get<int>();
    m.acq.R = a.at("r").get<int>();
    m.acq.sponge = a.at("sponge").get<int>();
    m.acq.cfl = a.at("cfl").get<double>();
    m.acq.amplitude = a.at("amplitude").get<double>();
    m.acq.src_depth = a.at("src_depth").get<int>();
    m.acq.rec_depth = a.at("rec_depth").get<int>();
    m.families = j.at("families").get<std::vector<std::string>>();
    m.counts = j.at("counts").get<std::vector<int>>();
    for (const auto& f : m.families) {
        const auto& n = j.at("norm").at(f);
        NormStats st;
        st.mean_S = n.at("mean_s").get<double>();
        st.std_S = n.at("std_s").get<double>();
        st.mean_V = n.at("mean_v").get<double>();
        st.std_V = n.at("std_v").get<double>();
        m.norm[f] = st;
    }
    for (const auto& s : j.at("samples"))
        m.samples.push_back({s.at("id").get<std::string>(), s.at("family").get<std::string>(),
                             s.at("file").get<std::string>()});
    return m;
}

// Settings portion only (no norm stats, no sample list): used to decide whether
// an existing directory already holds the requested dataset.
inline bool same_settings(const DatasetManifest& m, const GenerateConfig& cfg) {
    return m.seed == cfg.seed && m.H == cfg.H && m.W == cfg.W && m.dx == cfg.dx &&
           m.acq.f0 == cfg.acq.f0 && m.acq.record_time == cfg.acq.record_time &&
           m.acq.T == cfg.acq.T && m.acq.Ns == cfg.acq.Ns && m.acq.R == cfg.acq.R &&
           m.acq.sponge == cfg.acq.sponge && m.acq.cfl == cfg.acq.cfl &&
           m.acq.amplitude == cfg.acq.amplitude && m.acq.src_depth == cfg.acq.src_depth &&
           m.acq.rec_depth == cfg.acq.rec_depth && m.families == cfg.families &&
           m.counts == cfg.counts;
}

inline double round_f32(double x) { return double(float(x)); }

inline std::string sample_id(const std::string& family, int idx) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", idx);
    return family + "_" + buf;
}

} // namespace detail

inline std::string manifest_path(const std::string& dir) { return dir + "/manifest.json"; }

inline DatasetManifest load_manifest(const std::string& dir) {
    std::ifstream f(manifest_path(dir));
    if (!f) throw error("dataset not found: " + manifest_path(dir));
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error("manifest: parse failure: " + std::string(e.what()));
    }
    try {
        return detail::manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw error("manifest: malformed: " + std::string(e.what()));
    }
}

struct Sample {
    Tensor seis; // [Ns, T, R]
    Tensor vel;  // [1, H, W]
};

inline Sample load_sample(const std::string& dir, const SampleRef& ref) {
    NamedParams t = load_tensorfile(dir + "/" + ref.file);
    Tensor* seis = t.find("seis");
    Tensor* vel = t.find("vel");
    if (!seis || !vel) throw error("sample file missing tensors: " + ref.file);
    return {*seis, *vel};
}

inline DatasetManifest cmd_generate(const GenerateConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.families.empty()) throw error("generate: families list is empty");
    if (cfg.counts.size() != cfg.families.size())
        throw error("generate: need one sample count per family");
    for (int n : cfg.counts)
        if (n <= 0) throw error("generate: sample count must be positive");
    for (const auto& f : cfg.families) family_params(f); // validates the name

    // Fast path: the directory already holds exactly this dataset.
    if (fs::exists(manifest_path(cfg.out_dir))) {
        DatasetManifest existing = load_manifest(cfg.out_dir);
        if (!detail::same_settings(existing, cfg))
            throw error("generate: " + cfg.out_dir + " already holds a different dataset");
        bool complete = fs::exists(cfg.out_dir + "/norm.wfwi");
        for (const auto& s : existing.samples)
            if (!fs::exists(cfg.out_dir + "/" + s.file)) complete = false;
        if (complete) return existing;
    }

    fs::create_directories(cfg.out_dir);
    DatasetManifest m;
    m.seed = cfg.seed;
    m.H = cfg.H;
    m.W = cfg.W;
    m.dx = cfg.dx;
    m.acq = cfg.acq;
    m.families = cfg.families;
    m.counts = cfg.counts;

    NamedParams norm_tensors;
    for (size_t fi = 0; fi < cfg.families.size(); ++fi) {
        const std::string& family = cfg.families[fi];
        fs::create_directories(fs::path(cfg.out_dir) / family);
        // Running sums for per-family population statistics over stored values.
        double s_sum = 0, s_sq = 0, v_sum = 0, v_sq = 0;
        int64_t s_n = 0, v_n = 0;
        for (int i = 0; i < cfg.counts[fi]; ++i) {
            const std::string id = detail::sample_id(family, i);
            const std::string rel = family + "/" + id + ".wfwi";
            Tensor vel2d = generate_velocity(family, cfg.seed + uint64_t(i), cfg.H, cfg.W);
            Tensor seis = simulate_shots(vel2d, cfg.dx, cfg.acq);
            for (int64_t k = 0; k < seis.numel(); ++k) {
                seis[k] = detail::round_f32(seis[k]); // match the on-disk dtype
                s_sum += seis[k];
                s_sq += seis[k] * seis[k];
            }
            s_n += seis.numel();
            for (int64_t k = 0; k < vel2d.numel(); ++k) {
                v_sum += vel2d[k];
                v_sq += vel2d[k] * vel2d[k];
            }
            v_n += vel2d.numel();
            // Mixed dtypes in one file: "seis" stored f32, "vel" f64. Each is
            // serialized alone and the records spliced under a count-2 header
            // (header = magic 4 + version 2 + count 4 bytes).
            NamedParams seis_only, vel_only;
            seis_only.add("seis", seis);
            vel_only.add("vel", vel2d.view({1, cfg.H, cfg.W}));
            std::vector<uint8_t> b1 = serialize_tensors(seis_only, Dtype::f32);
            std::vector<uint8_t> b2 = serialize_tensors(vel_only, Dtype::f64);
            std::vector<uint8_t> out;
            out.insert(out.end(), b1.begin(), b1.begin() + 6);
            detail::put_u32(out, 2);
            out.insert(out.end(), b1.begin() + 10, b1.end());
            out.insert(out.end(), b2.begin() + 10, b2.end());
            write_file_bytes(cfg.out_dir + "/" + rel, out);
            m.samples.push_back({id, family, rel});
        }
        NormStats st;
        st.mean_S = s_sum / double(s_n);
        st.std_S = std::sqrt(std::max(0.0, s_sq / double(s_n) - st.mean_S * st.mean_S));
        st.mean_V = v_sum / double(v_n);
        st.std_V = std::sqrt(std::max(0.0, v_sq / double(v_n) - st.mean_V * st.mean_V));
        if (st.std_S <= 0 || st.std_V <= 0)
            throw numeric_error("generate: degenerate statistics for family " + family);
        m.norm[family] = st;
        Tensor stats({4});
        stats[0] = st.mean_S;
        stats[1] = st.std_S;
        stats[2] = st.mean_V;
        stats[3] = st.std_V;
        norm_tensors.add(family + ".stats", stats);
    }
    save_tensorfile(cfg.out_dir + "/norm.wfwi", norm_tensors, Dtype::f64);

    std::ofstream mf(manifest_path(cfg.out_dir), std::ios::trunc);
    if (!mf) throw error("cannot write " + manifest_path(cfg.out_dir));
    mf << detail::manifest_to_json(m).dump(2) << "\n";
    if (!mf) throw error("write failed: " + manifest_path(cfg.out_dir));
    return m;
}

// ---------------------------------------------------------------------------
// train/validation split

struct SplitIndices {
    std::vector<size_t> train; // indices into manifest.samples
    std::vector<size_t> val;
};

// 80/20 per family with a fixed shuffle seed, so the membership depends only on
// the dataset, not on the training run's seed.
constexpr uint64_t kSplitSeed = 20260823ull;

inline SplitIndices split_dataset(const DatasetManifest& m,
                                  const std::vector<std::string>& families) {
    SplitIndices out;
    for (const auto& family : families) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < m.samples.size(); ++i)
            if (m.samples[i].family == family) idx.push_back(i);
        if (idx.empty()) throw error("split: family not in dataset: " + family);
        std::mt19937_64 rng(kSplitSeed ^ fnv1a_str(family));
        std::shuffle(idx.begin(), idx.end(), rng);
        const size_t n_train = idx.size() * 8 / 10;
        if (n_train == 0 || n_train == idx.size())
            throw error("split: family " + family + " too small to split");
        for (size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? out.train : out.val).push_back(idx[i]);
    }
    return out;
}

} // namespace waveop
