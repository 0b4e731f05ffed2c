// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Orchestration: run configuration, the two training stages (per-family
// expert pretraining, then frozen-expert mixture fine-tuning), the expert
// registry, evaluation reports, and spectrum diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveop/dataset.hpp"
#include "waveop/encoder.hpp"
#include "waveop/losses.hpp"
#include "waveop/metrics.hpp"
#include "waveop/operators.hpp"
#include "waveop/optimizer.hpp"
#include "waveop/routing.hpp"
#include "waveop/tensorfile.hpp"

namespace waveop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
    std::string dataset;
    std::string out = "runs";
    std::vector<std::string> families;

    // encoder (set use_encoder=false for the resize-only ablation baseline)
    bool use_encoder = true;
    int patch_t = 20, patch_x = 10;
    int embed = 64, blocks = 4, heads = 4, mlp_ratio = 4;
    int channels = 16; // latent channels handed to the operator experts
    int out_h = 70, out_w = 70;

    OperatorConfig op; // .channels is overwritten when models are built

    AdamWConfig adamw;     // lr 2.6e-4, weight decay 0.089, betas 0.9/0.999
    SchedulerConfig sched; // warmup, cosine restart period, decay 0.29

    int batch = 32;    // paper-scale default; desk profile uses 8
    int epochs = 180;  // paper-scale default; desk profile uses 30
    uint64_t seed = 1;

    std::string routing = "strong-weak"; // type-sum | group-sum | strong-weak
    double lambda = 0.3;
    int topk = 2;

    LossWeights loss;
    double type_loss = 0.0; // weight of the optional family-classification term
    int type_count = 0;     // 0: type head size = number of families (min 2)

    void validate() const {
        if (adamw.lr <= 0.0) throw error("config: learning rate must be positive");
        if (epochs < 1) throw error("config: epochs must be at least 1");
        if (batch < 1) throw error("config: batch must be at least 1");
        if (routing != "type-sum" && routing != "group-sum" && routing != "strong-weak")
            throw error("config: unknown routing variant: " + routing);
        if (topk < 1 || topk > kNumGroups) throw error("config: topk out of range");
        if (lambda < 0.0) throw error("config: lambda must be non-negative");
        if (type_count != 0 && type_count < 2) throw error("config: type_count must be >= 2");
    }

    int type_classes_for(size_t n_families) const {
        const int t = type_count > 0 ? type_count : int(n_families);
        return std::max(2, t);
    }

    // Smaller loop settings that finish on a desktop CPU; architecture and
    // optimizer settings are unchanged.
    static RunConfig desk_defaults() {
        RunConfig c;
        c.batch = 8;
        c.epochs = 30;
        c.sched.warmup = 30;
        c.sched.period = 300;
        return c;
    }
};

inline nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset;
    j["out"] = c.out;
    j["families"] = c.families;
    j["encoder"] = {{"use", c.use_encoder}, {"patch_t", c.patch_t}, {"patch_x", c.patch_x},
                    {"embed", c.embed},     {"blocks", c.blocks},   {"heads", c.heads},
                    {"mlp_ratio", c.mlp_ratio}, {"channels", c.channels},
                    {"out_h", c.out_h},     {"out_w", c.out_w}};
    j["operator"] = {{"hidden", c.op.hidden},       {"layers", c.op.layers},
                     {"modes_x", c.op.modes_x},     {"modes_y", c.op.modes_y},
                     {"fno_bypass", c.op.fno_bypass}, {"wno_depth", c.op.wno_depth},
                     {"mno_scales", c.op.mno_scales}, {"lno_radius", c.op.lno_radius}};
    j["optimizer"] = {{"lr", c.adamw.lr},
                      {"weight_decay", c.adamw.weight_decay},
                      {"beta1", c.adamw.beta1},
                      {"beta2", c.adamw.beta2},
                      {"clip_norm", c.adamw.clip_norm}};
    j["scheduler"] = {{"warmup", c.sched.warmup}, {"period", c.sched.period},
                      {"decay", c.sched.decay}};
    j["batch"] = c.batch;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["routing"] = c.routing;
    j["lambda"] = c.lambda;
    j["topk"] = c.topk;
    j["loss"] = {{"l1", c.loss.l1}, {"l2", c.loss.l2}, {"grad", c.loss.grad},
                 {"fourier", c.loss.fourier}};
    j["type_loss"] = c.type_loss;
    j["type_count"] = c.type_count;
    return j;
}

// Overlays the keys present in j onto base; unknown keys are rejected so typos
// in config files fail loudly.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {}) {
    static const std::vector<std::string> known = {
        "dataset", "out",   "families", "encoder", "operator", "optimizer", "scheduler",
        "batch",   "epochs", "seed",    "routing", "lambda",   "topk",      "loss",
        "type_loss", "type_count"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw error("config: unknown key: " + it.key());
    RunConfig c = std::move(base);
    if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("families")) c.families = j["families"].get<std::vector<std::string>>();
    if (j.contains("encoder")) {
        const auto& e = j["encoder"];
        if (e.contains("use")) c.use_encoder = e["use"].get<bool>();
        if (e.contains("patch_t")) c.patch_t = e["patch_t"].get<int>();
        if (e.contains("patch_x")) c.patch_x = e["patch_x"].get<int>();
        if (e.contains("embed")) c.embed = e["embed"].get<int>();
        if (e.contains("blocks")) c.blocks = e["blocks"].get<int>();
        if (e.contains("heads")) c.heads = e["heads"].get<int>();
        if (e.contains("mlp_ratio")) c.mlp_ratio = e["mlp_ratio"].get<int>();
        if (e.contains("channels")) c.channels = e["channels"].get<int>();
        if (e.contains("out_h")) c.out_h = e["out_h"].get<int>();
        if (e.contains("out_w")) c.out_w = e["out_w"].get<int>();
    }
    if (j.contains("operator")) {
        const auto& o = j["operator"];
        if (o.contains("hidden")) c.op.hidden = o["hidden"].get<int>();
        if (o.contains("layers")) c.op.layers = o["layers"].get<int>();
        if (o.contains("modes_x")) c.op.modes_x = o["modes_x"].get<int>();
        if (o.contains("modes_y")) c.op.modes_y = o["modes_y"].get<int>();
        if (o.contains("fno_bypass")) c.op.fno_bypass = o["fno_bypass"].get<bool>();
        if (o.contains("wno_depth")) c.op.wno_depth = o["wno_depth"].get<int>();
        if (o.contains("mno_scales")) c.op.mno_scales = o["mno_scales"].get<int>();
        if (o.contains("lno_radius")) c.op.lno_radius = o["lno_radius"].get<int>();
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        if (o.contains("lr")) c.adamw.lr = o["lr"].get<double>();
        if (o.contains("weight_decay")) c.adamw.weight_decay = o["weight_decay"].get<double>();
        if (o.contains("beta1")) c.adamw.beta1 = o["beta1"].get<double>();
        if (o.contains("beta2")) c.adamw.beta2 = o["beta2"].get<double>();
        if (o.contains("clip_norm")) c.adamw.clip_norm = o["clip_norm"].get<double>();
    }
    if (j.contains("scheduler")) {
        const auto& s = j["scheduler"];
        if (s.contains("warmup")) c.sched.warmup = s["warmup"].get<int>();
        if (s.contains("period")) c.sched.period = s["period"].get<int>();
        if (s.contains("decay")) c.sched.decay = s["decay"].get<double>();
    }
    if (j.contains("batch")) c.batch = j["batch"].get<int>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("routing")) c.routing = j["routing"].get<std::string>();
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("topk")) c.topk = j["topk"].get<int>();
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        if (l.contains("l1")) c.loss.l1 = l["l1"].get<double>();
        if (l.contains("l2")) c.loss.l2 = l["l2"].get<double>();
        if (l.contains("grad")) c.loss.grad = l["grad"].get<double>();
        if (l.contains("fourier")) c.loss.fourier = l["fourier"].get<double>();
    }
    if (j.contains("type_loss")) c.type_loss = j["type_loss"].get<double>();
    if (j.contains("type_count")) c.type_count = j["type_count"].get<int>();
    return c;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base = {}) {
    std::ifstream f(path);
    if (!f) throw error("config file not found: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error("config: parse failure: " + std::string(e.what()));
    }
    return run_config_from_json(j, std::move(base));
}

// Identifies the experiment, not its storage location: filesystem paths are
// excluded so the same run in a different directory hashes identically.
inline nlohmann::ordered_json run_config_to_portable_json(const RunConfig& c) {
    nlohmann::ordered_json j = run_config_to_json(c);
    j["dataset"] = "";
    j["out"] = "";
    return j;
}

inline uint64_t config_hash(const RunConfig& c) {
    return fnv1a_str(run_config_to_portable_json(c).dump());
}

// ---------------------------------------------------------------------------
// in-memory dataset preparation

struct PreparedSample {
    std::string id, family;
    int type_idx = -1;   // index into the run's family list, -1 if foreign
    Tensor img;          // standardized flattened gather [1, T, Ns*R]
    Tensor target;       // standardized velocity [1, H, W]
};

// Loads and standardizes every sample belonging to `families` (empty: all
// manifest samples). Each sample uses its own family's statistics.
inline std::vector<PreparedSample> prepare_samples(const std::string& dir,
                                                   const DatasetManifest& m,
                                                   const std::vector<std::string>& families) {
    NoTapeScope guard;
    std::vector<PreparedSample> out;
    for (const auto& ref : m.samples) {
        int type_idx = -1;
        if (!families.empty()) {
            auto it = std::find(families.begin(), families.end(), ref.family);
            if (it == families.end()) continue;
            type_idx = int(it - families.begin());
        }
        const NormStats& st = m.norm.at(ref.family);
        Sample s = load_sample(dir, ref);
        for (const Tensor* t : {&s.seis, &s.vel})
            for (int64_t i = 0; i < t->numel(); ++i)
                if (!std::isfinite((*t)[i]))
                    throw numeric_error("dataset: sample " + ref.id +
                                        " contains non-finite values");
        PreparedSample p;
        p.id = ref.id;
        p.family = ref.family;
        p.type_idx = type_idx;
        p.img = reshape_input(standardize(s.seis, st.mean_S, st.std_S));
        p.target = standardize(s.vel, st.mean_V, st.std_V);
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// model assembly

inline EncoderConfig encoder_config_for(const RunConfig& c, const DatasetManifest& m) {
    EncoderConfig e;
    e.shots = m.acq.Ns;
    e.time_steps = m.acq.T;
    e.receivers = m.acq.receiver_cols.empty() ? m.acq.R : int(m.acq.receiver_cols.size());
    e.patch_t = c.patch_t;
    e.patch_x = c.patch_x;
    e.embed = c.embed;
    e.blocks = c.blocks;
    e.heads = c.heads;
    e.mlp_ratio = c.mlp_ratio;
    e.latent_channels = c.channels;
    e.out_h = c.out_h;
    e.out_w = c.out_w;
    e.type_classes = c.type_classes_for(c.families.size());
    return e;
}

inline NamedParams clone_params(const NamedParams& p) {
    NamedParams out;
    for (const auto& [n, t] : p.items) {
        Tensor c(t.shape());
        std::copy(t.data(), t.data() + t.numel(), c.data());
        out.add(n, c);
    }
    return out;
}

inline void add_prefixed(NamedParams& dst, const std::string& prefix, const NamedParams& src) {
    for (const auto& [n, t] : src.items) dst.add(prefix + n, t);
}

// Copies stored weights into the model where names and sizes match; returns
// how many tensors were copied. Used for warm starts where a partial match is
// expected (e.g. a differently sized type head).
inline int load_weights_lenient(NamedParams& model, const NamedParams& stored) {
    int copied = 0;
    for (auto& [name, t] : model.items)
        for (const auto& [sn, st] : stored.items)
            if (sn == name && st.numel() == t.numel()) {
                std::copy(st.data(), st.data() + st.numel(), t.data());
                ++copied;
                break;
            }
    return copied;
}

struct PretrainModel {
    bool use_encoder = true;
    int out_h = 70, out_w = 70;
    std::unique_ptr<Encoder> enc;  // null for the resize baseline
    std::unique_ptr<Operator> op;

    Tensor forward(const Tensor& img) const {
        Tensor z = use_encoder ? enc->encode(img) : resize_baseline(img, out_h, out_w);
        return op->apply(z);
    }

    NamedParams params() const {
        NamedParams p;
        if (enc) add_prefixed(p, "enc/", enc->params());
        add_prefixed(p, "op/", op->params());
        return p;
    }
};

inline PretrainModel build_pretrain_model(const RunConfig& c, const DatasetManifest& m,
                                          ExpertKind kind) {
    PretrainModel model;
    model.use_encoder = c.use_encoder;
    model.out_h = c.out_h;
    model.out_w = c.out_w;
    OperatorConfig oc = c.op;
    oc.channels = c.use_encoder ? c.channels : 1;
    if (c.use_encoder)
        model.enc = std::make_unique<Encoder>(encoder_config_for(c, m), c.seed);
    model.op = make_operator(kind, oc, c.seed + 1000 + uint64_t(kind));
    return model;
}

// ---------------------------------------------------------------------------
// checkpoint plumbing (string payloads inside the tensor container)

namespace detail {

inline void add_string_tensor(NamedParams& p, const std::string& name, const std::string& s) {
    Tensor t({std::max<int64_t>(1, int64_t(s.size()))});
    for (size_t i = 0; i < s.size(); ++i) t[int64_t(i)] = double(uint8_t(s[i]));
    p.add(name + "_len", u64_tensor(uint64_t(s.size())));
    p.add(name, t);
}

inline std::string get_string_tensor(NamedParams& p, const std::string& name) {
    Tensor* len_t = p.find(name + "_len");
    Tensor* chars = p.find(name);
    if (!len_t || !chars) throw error("checkpoint: missing field " + name);
    const uint64_t len = u64_from_tensor(*len_t);
    if (int64_t(len) > chars->numel()) throw error("checkpoint: malformed field " + name);
    std::string s;
    for (uint64_t i = 0; i < len; ++i) s.push_back(char(uint8_t((*chars)[int64_t(i)])));
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// training loops

struct EpochRow {
    int epoch = 0;
    double lr = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_mae = 0;
};

namespace detail {

inline void write_epoch_csv(const std::string& path, const std::vector<EpochRow>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw error("cannot write " + path);
    f << "epoch,lr,train_loss,val_loss,val_mae\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.lr,
                      r.train_loss, r.val_loss, r.val_mae);
        f << buf;
    }
}

inline std::vector<size_t> shuffled(size_t n, uint64_t seed) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

} // namespace detail

struct PretrainResult {
    std::vector<EpochRow> history;
    // Training-set loss of the freshly initialized model and of the model after
    // the last update, so loss-reduction factors compare like with like (the
    // per-epoch history rows are running averages taken while weights move).
    double initial_train_loss = 0;
    double final_train_loss = 0;
    double best_val_mae = 0;
    int best_epoch = -1;
    std::string checkpoint_path, log_path, sidecar_path;
};

// Stage one: one encoder (or the resize baseline) plus one operator expert,
// trained end to end on a single family. Artifacts land in cfg.out.
inline PretrainResult cmd_pretrain_expert(RunConfig cfg, ExpertKind kind,
                                          const std::string& family) {
    cfg.families = {family};
    cfg.validate();
    const DatasetManifest m = load_manifest(cfg.dataset);
    std::vector<PreparedSample> samples = prepare_samples(cfg.dataset, m, cfg.families);
    if (samples.empty()) throw error("pretrain: dataset has no samples of family " + family);
    const SplitIndices split = split_dataset(m, cfg.families);
    // split indices refer to manifest order; prepared samples kept that order
    std::vector<const PreparedSample*> train, val;
    {
        std::vector<const PreparedSample*> by_manifest(m.samples.size(), nullptr);
        size_t k = 0;
        for (size_t i = 0; i < m.samples.size(); ++i)
            if (k < samples.size() && m.samples[i].id == samples[k].id)
                by_manifest[i] = &samples[k++];
        for (size_t i : split.train)
            if (by_manifest[i]) train.push_back(by_manifest[i]);
        for (size_t i : split.val)
            if (by_manifest[i]) val.push_back(by_manifest[i]);
    }
    if (train.empty() || val.empty()) throw error("pretrain: empty split");

    PretrainModel model = build_pretrain_model(cfg, m, kind);
    AdamW opt(model.params(), cfg.adamw);

    auto eval_val = [&](double& vloss, double& vmae) {
        NoTapeScope guard;
        double ls = 0, ms = 0;
        for (const PreparedSample* s : val) {
            Tensor pred = model.forward(s->img);
            ls += total_loss(pred, s->target, cfg.loss).item();
            ms += mae(pred, s->target);
        }
        vloss = ls / double(val.size());
        vmae = ms / double(val.size());
    };
    auto eval_train = [&]() {
        NoTapeScope guard;
        double ls = 0;
        for (const PreparedSample* s : train)
            ls += total_loss(model.forward(s->img), s->target, cfg.loss).item();
        return ls / double(train.size());
    };

    PretrainResult res;
    res.initial_train_loss = eval_train();
    NamedParams best;
    int64_t best_step = 0;
    int64_t gstep = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double epoch_lr = cfg.adamw.lr * lr_multiplier(cfg.sched, gstep);
        std::vector<size_t> order =
            detail::shuffled(train.size(), cfg.seed * 0x9e3779b97f4a7c15ull + uint64_t(epoch));
        double train_acc = 0;
        for (size_t b = 0; b < order.size(); b += size_t(cfg.batch)) {
            const size_t bs = std::min(size_t(cfg.batch), order.size() - b);
            TapeScope scope;
            Tensor batch_loss;
            for (size_t i = 0; i < bs; ++i) {
                const PreparedSample* s = train[order[b + i]];
                Tensor li = total_loss(model.forward(s->img), s->target, cfg.loss);
                batch_loss = batch_loss.defined() ? add(batch_loss, li) : li;
            }
            batch_loss = scale(batch_loss, 1.0 / double(bs));
            const double lv = batch_loss.item();
            if (!std::isfinite(lv))
                throw numeric_error("pretrain: non-finite loss at step " + std::to_string(gstep) +
                                    " (family " + family + ", expert " +
                                    expert_kind_name(kind) + ")");
            scope.tape.backward(batch_loss);
            opt.step(scope.tape, lr_multiplier(cfg.sched, gstep));
            ++gstep;
            train_acc += lv * double(bs);
        }
        EpochRow row;
        row.epoch = epoch;
        row.lr = epoch_lr;
        row.train_loss = train_acc / double(train.size());
        eval_val(row.val_loss, row.val_mae);
        res.history.push_back(row);
        if (res.best_epoch < 0 || row.val_mae < res.best_val_mae) {
            res.best_val_mae = row.val_mae;
            res.best_epoch = epoch;
            best = clone_params(model.params());
            best_step = gstep;
        }
    }
    res.final_train_loss = eval_train();

    std::filesystem::create_directories(cfg.out);
    const std::string base = std::string(cfg.use_encoder ? "pretrain_" : "pretrain_resize_") +
                             family + "_" + expert_kind_name(kind);
    res.checkpoint_path = cfg.out + "/" + base + ".wfwi";
    res.log_path = cfg.out + "/" + base + "_log.csv";
    res.sidecar_path = cfg.out + "/" + base + "_val.json";

    Checkpoint ck;
    ck.kind = std::string("pretrain:") + expert_kind_name(kind) + ":" + family;
    ck.config_hash = config_hash(cfg);
    ck.step = best_step;
    ck.rng_seed = cfg.seed;
    ck.tensors = std::move(best);
    nlohmann::ordered_json meta;
    meta["variant"] = "pretrain";
    meta["expert"] = expert_kind_name(kind);
    meta["family"] = family;
    meta["run"] = run_config_to_portable_json(cfg);
    meta["input"] = {{"ns", m.acq.Ns}, {"t", m.acq.T},
                     {"r", m.acq.receiver_cols.empty() ? m.acq.R : int(m.acq.receiver_cols.size())},
                     {"h", m.H}, {"w", m.W}};
    detail::add_string_tensor(ck.tensors, "__meta__/json", meta.dump());
    save_checkpoint(res.checkpoint_path, ck);
    detail::write_epoch_csv(res.log_path, res.history);

    nlohmann::ordered_json side;
    side["family"] = family;
    side["kind"] = expert_kind_name(kind);
    side["encoder"] = cfg.use_encoder;
    side["best_val_mae"] = res.best_val_mae;
    side["best_epoch"] = res.best_epoch;
    side["initial_train_loss"] = res.initial_train_loss;
    side["final_train_loss"] = res.final_train_loss;
    side["checkpoint"] = res.checkpoint_path;
    side["epochs"] = cfg.epochs;
    side["seed"] = cfg.seed;
    std::ofstream sf(res.sidecar_path, std::ios::trunc);
    if (!sf) throw error("cannot write " + res.sidecar_path);
    sf << side.dump(2) << "\n";
    return res;
}

// ---------------------------------------------------------------------------
// expert registry

inline nlohmann::ordered_json registry_to_json(const ExpertRegistry& r) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["families"] = r.families;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (size_t t = 0; t < r.families.size(); ++t) {
        nlohmann::ordered_json e;
        e["family"] = r.families[t];
        e["best_kind"] = expert_kind_name(r.best_kind[t]);
        e["best_path"] = r.best_path[t];
        nlohmann::ordered_json maes = nlohmann::ordered_json::object();
        nlohmann::ordered_json paths = nlohmann::ordered_json::object();
        for (int g = 0; g < kNumGroups; ++g) {
            const char* name = expert_kind_name(group_kind(g));
            if (!r.group_paths[size_t(g)][t].empty()) {
                maes[name] = r.val_mae[t][size_t(g)];
                paths[name] = r.group_paths[size_t(g)][t];
            }
        }
        e["val_mae"] = maes;
        e["paths"] = paths;
        entries.push_back(e);
    }
    j["entries"] = entries;
    return j;
}

inline ExpertRegistry registry_from_json(const nlohmann::json& j) {
    ExpertRegistry r;
    r.families = j.at("families").get<std::vector<std::string>>();
    const size_t T = r.families.size();
    r.best_kind.resize(T, ExpertKind::FNO);
    r.best_path.resize(T);
    r.val_mae.assign(T, {kInf, kInf, kInf, kInf});
    for (auto& g : r.group_paths) g.assign(T, "");
    for (const auto& e : j.at("entries")) {
        const std::string fam = e.at("family").get<std::string>();
        auto it = std::find(r.families.begin(), r.families.end(), fam);
        if (it == r.families.end()) throw error("registry: entry for unlisted family " + fam);
        const size_t t = size_t(it - r.families.begin());
        r.best_kind[t] = expert_kind_from_name(e.at("best_kind").get<std::string>());
        r.best_path[t] = e.at("best_path").get<std::string>();
        for (int g = 0; g < kNumGroups; ++g) {
            const char* name = expert_kind_name(group_kind(g));
            if (e.at("paths").contains(name)) {
                r.group_paths[size_t(g)][t] = e.at("paths").at(name).get<std::string>();
                r.val_mae[t][size_t(g)] = e.at("val_mae").at(name).get<double>();
            }
        }
    }
    r.validate();
    return r;
}

inline void save_registry(const std::string& path, const ExpertRegistry& r) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw error("cannot write " + path);
    f << registry_to_json(r).dump(2) << "\n";
}

inline ExpertRegistry load_registry(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error("registry not found: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error("registry: parse failure: " + std::string(e.what()));
    }
    try {
        return registry_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw error("registry: malformed: " + std::string(e.what()));
    }
}

// Scans a directory for pretraining result sidecars and picks, per family, the
// expert kind with the lowest validation MAE; exact ties fall back to the
// fixed kind precedence (fno, wno, mno, lno). Resize-baseline runs are
// excluded. Writes <dir>/registry.json.
inline ExpertRegistry cmd_build_registry(const std::string& dir) {
    namespace fs = std::filesystem;
    struct Entry {
        double mae[4];
        std::string path[4];
        bool present[4] = {false, false, false, false};
    };
    std::map<std::string, Entry> by_family; // sorted → deterministic order
    if (!fs::is_directory(dir)) throw error("build-registry: no such directory: " + dir);
    std::vector<std::string> files;
    for (const auto& de : fs::directory_iterator(dir)) {
        const std::string name = de.path().filename().string();
        if (name.rfind("pretrain_", 0) == 0 &&
            name.size() > 9 + 9 && name.substr(name.size() - 9) == "_val.json")
            files.push_back(de.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const std::string& path : files) {
        std::ifstream f(path);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw error("build-registry: bad sidecar " + path + ": " + e.what());
        }
        if (!j.value("encoder", true)) continue; // baseline runs are not experts
        const std::string fam = j.at("family").get<std::string>();
        const ExpertKind kind = expert_kind_from_name(j.at("kind").get<std::string>());
        const int g = int(kind);
        Entry& e = by_family[fam];
        const double score = j.at("best_val_mae").get<double>();
        // same family+kind appearing twice: keep the better score
        if (!e.present[g] || score < e.mae[g]) {
            e.present[g] = true;
            e.mae[g] = score;
            e.path[g] = j.at("checkpoint").get<std::string>();
        }
    }
    if (by_family.empty()) throw error("build-registry: no pretraining results in " + dir);

    ExpertRegistry r;
    for (const auto& [fam, e] : by_family) {
        const size_t t = r.families.size();
        r.families.push_back(fam);
        r.best_kind.push_back(ExpertKind::FNO);
        r.best_path.emplace_back();
        r.val_mae.push_back({kInf, kInf, kInf, kInf});
        bool any = false;
        double best = kInf;
        for (int g = 0; g < kNumGroups; ++g) {
            for (auto& gp : r.group_paths)
                if (gp.size() < t + 1) gp.resize(t + 1);
            if (!e.present[g]) continue;
            r.group_paths[size_t(g)][t] = e.path[g];
            r.val_mae[t][size_t(g)] = e.mae[g];
            if (e.mae[g] < best) { // strict: ties keep the earlier kind
                best = e.mae[g];
                r.best_kind[t] = group_kind(g);
                r.best_path[t] = e.path[g];
                any = true;
            }
        }
        if (!any) throw error("build-registry: family " + fam + " has no experts");
    }
    r.validate();
    save_registry(dir + "/registry.json", r);
    return r;
}

// ---------------------------------------------------------------------------
// mixture model

struct MoEModel {
    EncoderConfig enc_cfg;
    std::unique_ptr<Encoder> enc;
    std::unique_ptr<LinearRouter> group_router;
    std::vector<std::string> families;  // type order
    std::vector<ExpertKind> best_kind;  // per type
    std::array<std::vector<std::unique_ptr<Operator>>, 4> experts; // [group][type]
    std::string routing = "strong-weak";
    int topk = 2;
    double lambda = 0.3;

    struct Out {
        Tensor pred;        // [1, out_h, out_w]
        Tensor type_logits; // [1, type_classes]
        int strong_size = 0;
    };

    Out forward(const Tensor& img) const {
        const int T = int(families.size());
        Out o;
        Tensor tokens = enc->encode_tokens(img);
        Tensor z = enc->latent_from_tokens(tokens);
        o.type_logits =
            enc->type_logits_from_tokens(tokens).view({1, enc_cfg.type_classes});
        // routing weights over the known types (softmax over the first T
        // logits; the head may be wider when type_count decouples K from T)
        Tensor troute = softmax_rows(narrow(o.type_logits, 1, 0, T)).view({T});
        if (routing == "type-sum") {
            std::vector<Tensor> preds;
            for (int t = 0; t < T; ++t)
                preds.push_back(experts[size_t(best_kind[size_t(t)])][size_t(t)]->apply(z));
            o.pred = fuse_weighted(troute, preds);
            return o;
        }
        std::vector<Tensor> group_pred;
        for (int g = 0; g < kNumGroups; ++g) {
            std::vector<Tensor> pg;
            for (int t = 0; t < T; ++t) pg.push_back(experts[size_t(g)][size_t(t)]->apply(z));
            group_pred.push_back(fuse_weighted(troute, pg));
        }
        Tensor beta = group_router->probs(z);
        if (routing == "group-sum") {
            o.pred = fuse_weighted(beta, group_pred);
        } else {
            o.pred = strong_weak_fuse(beta, group_pred, topk, lambda);
            o.strong_size = int(top_k_split(beta, topk).strong.size());
        }
        return o;
    }

    NamedParams trainable_params() const {
        NamedParams p;
        add_prefixed(p, "enc/", enc->params());
        add_prefixed(p, "router/", group_router->params());
        return p;
    }

    NamedParams expert_params() const {
        NamedParams p;
        for (int g = 0; g < kNumGroups; ++g)
            for (size_t t = 0; t < families.size(); ++t)
                add_prefixed(p,
                             "expert/" + std::to_string(t) + "/" + std::to_string(g) + "/",
                             experts[size_t(g)][t]->params());
        return p;
    }
};

// Loads the "op/"-prefixed tensors of a pretraining checkpoint into an
// operator instance.
inline void load_expert_weights(Operator& op, const std::string& ckpt_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    NamedParams stripped;
    for (auto& [n, t] : ck.tensors.items)
        if (n.rfind("op/", 0) == 0) stripped.add(n.substr(3), t);
    NamedParams target = op.params();
    load_weights_into(target, stripped);
}

inline void check_registry_complete(const ExpertRegistry& r, const RunConfig& cfg) {
    for (const auto& fam : cfg.families) {
        auto it = std::find(r.families.begin(), r.families.end(), fam);
        if (it == r.families.end())
            throw error("registry incomplete: no entry for family " + fam);
        const size_t t = size_t(it - r.families.begin());
        if (cfg.routing == "type-sum") {
            if (r.best_path[t].empty())
                throw error("registry incomplete: no best expert for family " + fam);
        } else {
            for (int g = 0; g < kNumGroups; ++g)
                if (r.group_paths[size_t(g)][t].empty())
                    throw error(std::string("registry incomplete: family ") + fam +
                                " lacks a " + expert_kind_name(group_kind(g)) + " expert");
        }
    }
}

// Builds the mixture: fresh encoder warm-started from the first family's best
// pretrained encoder, frozen experts loaded from the registry checkpoints
// (all four kinds per family), and a fresh group router.
inline MoEModel build_moe_model(const RunConfig& cfg, const DatasetManifest& m,
                                const ExpertRegistry& reg) {
    if (cfg.families.size() < 2) throw error("train-moe: need at least 2 families");
    MoEModel model;
    model.families = cfg.families;
    model.routing = cfg.routing;
    model.topk = cfg.topk;
    model.lambda = cfg.lambda;
    model.enc_cfg = encoder_config_for(cfg, m);
    if (model.enc_cfg.type_classes < int(cfg.families.size()))
        throw error("train-moe: type head has fewer classes than families");
    model.enc = std::make_unique<Encoder>(model.enc_cfg, cfg.seed);
    model.group_router =
        std::make_unique<LinearRouter>(cfg.channels, kNumGroups, cfg.seed + 2000);
    OperatorConfig oc = cfg.op;
    oc.channels = cfg.channels;
    for (size_t t = 0; t < cfg.families.size(); ++t) {
        const auto it = std::find(reg.families.begin(), reg.families.end(), cfg.families[t]);
        const size_t rt = size_t(it - reg.families.begin());
        model.best_kind.push_back(reg.best_kind[rt]);
        for (int g = 0; g < kNumGroups; ++g) {
            auto op = make_operator(group_kind(g), oc, /*seed=*/cfg.seed + uint64_t(g));
            const std::string& path = reg.group_paths[size_t(g)][rt];
            if (!path.empty()) load_expert_weights(*op, path);
            model.experts[size_t(g)].push_back(std::move(op));
        }
    }
    // Warm-start the encoder from the first family's best pretrained encoder.
    const size_t rt0 = size_t(std::find(reg.families.begin(), reg.families.end(),
                                        cfg.families[0]) -
                              reg.families.begin());
    if (!reg.best_path[rt0].empty()) {
        Checkpoint ck = load_checkpoint(reg.best_path[rt0]);
        NamedParams stripped;
        for (auto& [n, t] : ck.tensors.items)
            if (n.rfind("enc/", 0) == 0) stripped.add(n.substr(4), t);
        if (stripped.size() > 0) {
            NamedParams target = model.enc->params();
            load_weights_lenient(target, stripped);
        }
    }
    return model;
}

struct MoEResult {
    std::vector<EpochRow> history;
    double best_val_mae = 0;
    int best_epoch = -1;
    uint64_t expert_checksum_before = 0;
    uint64_t expert_checksum_after = 0;
    std::string checkpoint_path, log_path, steps_path;
};

// Stage two: freeze the experts, fine-tune encoder + router on the family
// union under the configured routing variant.
inline MoEResult cmd_train_moe(const RunConfig& cfg, const ExpertRegistry& reg) {
    cfg.validate();
    if (cfg.families.size() < 2) throw error("train-moe: need at least 2 families");
    reg.validate();
    check_registry_complete(reg, cfg);
    const DatasetManifest m = load_manifest(cfg.dataset);
    std::vector<PreparedSample> samples = prepare_samples(cfg.dataset, m, cfg.families);
    if (samples.empty()) throw error("train-moe: dataset has no samples of the families");
    const SplitIndices split = split_dataset(m, cfg.families);
    std::vector<const PreparedSample*> train, val;
    {
        std::vector<const PreparedSample*> by_manifest(m.samples.size(), nullptr);
        size_t k = 0;
        for (size_t i = 0; i < m.samples.size(); ++i)
            if (k < samples.size() && m.samples[i].id == samples[k].id)
                by_manifest[i] = &samples[k++];
        for (size_t i : split.train)
            if (by_manifest[i]) train.push_back(by_manifest[i]);
        for (size_t i : split.val)
            if (by_manifest[i]) val.push_back(by_manifest[i]);
    }
    if (train.empty() || val.empty()) throw error("train-moe: empty split");

    MoEModel model = build_moe_model(cfg, m, reg);
    const NamedParams frozen = model.expert_params();
    MoEResult res;
    res.expert_checksum_before = params_checksum(frozen);

    AdamW opt(model.trainable_params(), cfg.adamw);

    std::filesystem::create_directories(cfg.out);
    const std::string base = "moe_" + cfg.routing;
    res.checkpoint_path = cfg.out + "/" + base + ".wfwi";
    res.log_path = cfg.out + "/" + base + "_log.csv";
    res.steps_path = cfg.out + "/" + base + "_steps.csv";
    std::ofstream steps(res.steps_path, std::ios::trunc);
    if (!steps) throw error("cannot write " + res.steps_path);
    steps << "step,lr,loss,strong_size\n";

    auto eval_val = [&](double& vloss, double& vmae) {
        NoTapeScope guard;
        double ls = 0, ms = 0;
        for (const PreparedSample* s : val) {
            MoEModel::Out o = model.forward(s->img);
            Tensor l = total_loss(o.pred, s->target, cfg.loss);
            ls += l.item();
            ms += mae(o.pred, s->target);
        }
        vloss = ls / double(val.size());
        vmae = ms / double(val.size());
    };

    NamedParams best;
    int64_t best_step = 0;
    int64_t gstep = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double epoch_lr = cfg.adamw.lr * lr_multiplier(cfg.sched, gstep);
        std::vector<size_t> order =
            detail::shuffled(train.size(), cfg.seed * 0x9e3779b97f4a7c15ull + uint64_t(epoch));
        double train_acc = 0;
        for (size_t b = 0; b < order.size(); b += size_t(cfg.batch)) {
            const size_t bs = std::min(size_t(cfg.batch), order.size() - b);
            TapeScope scope;
            Tensor batch_loss;
            int strong_size = 0;
            for (size_t i = 0; i < bs; ++i) {
                const PreparedSample* s = train[order[b + i]];
                MoEModel::Out o = model.forward(s->img);
                Tensor li = total_loss(o.pred, s->target, cfg.loss);
                if (cfg.type_loss > 0.0 && s->type_idx >= 0)
                    li = add(li, scale(cross_entropy_logits(o.type_logits,
                                                            {int64_t(s->type_idx)}),
                                       cfg.type_loss));
                batch_loss = batch_loss.defined() ? add(batch_loss, li) : li;
                strong_size = o.strong_size;
            }
            batch_loss = scale(batch_loss, 1.0 / double(bs));
            const double lv = batch_loss.item();
            if (!std::isfinite(lv))
                throw numeric_error("train-moe: non-finite loss at step " +
                                    std::to_string(gstep));
            scope.tape.backward(batch_loss);
            const double mult = lr_multiplier(cfg.sched, gstep);
            opt.step(scope.tape, mult);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%d\n",
                          static_cast<long long>(gstep), cfg.adamw.lr * mult, lv, strong_size);
            steps << buf;
            ++gstep;
            train_acc += lv * double(bs);
        }
        EpochRow row;
        row.epoch = epoch;
        row.lr = epoch_lr;
        row.train_loss = train_acc / double(train.size());
        eval_val(row.val_loss, row.val_mae);
        res.history.push_back(row);
        if (res.best_epoch < 0 || row.val_mae < res.best_val_mae) {
            res.best_val_mae = row.val_mae;
            res.best_epoch = epoch;
            best = clone_params(model.trainable_params());
            best_step = gstep;
        }
    }
    steps.close();

    res.expert_checksum_after = params_checksum(model.expert_params());
    if (res.expert_checksum_after != res.expert_checksum_before)
        throw error("train-moe: frozen expert parameters changed during training");

    Checkpoint ck;
    ck.kind = "moe:" + cfg.routing;
    ck.config_hash = config_hash(cfg);
    ck.step = best_step;
    ck.rng_seed = cfg.seed;
    ck.tensors = std::move(best);
    add_prefixed(ck.tensors, "", model.expert_params()); // frozen weights, verbatim
    nlohmann::ordered_json meta;
    meta["variant"] = "moe";
    meta["run"] = run_config_to_portable_json(cfg);
    nlohmann::ordered_json bests = nlohmann::ordered_json::array();
    for (ExpertKind k : model.best_kind) bests.push_back(expert_kind_name(k));
    meta["best"] = bests;
    meta["input"] = {{"ns", m.acq.Ns}, {"t", m.acq.T},
                     {"r", m.acq.receiver_cols.empty() ? m.acq.R : int(m.acq.receiver_cols.size())},
                     {"h", m.H}, {"w", m.W}};
    detail::add_string_tensor(ck.tensors, "__meta__/json", meta.dump());
    save_checkpoint(res.checkpoint_path, ck);
    detail::write_epoch_csv(res.log_path, res.history);
    return res;
}

// ---------------------------------------------------------------------------
// checkpoint reload for inference

// Either stage's model, reconstructed from a checkpoint plus the dataset it is
// being applied to (the dataset provides input dimensions and norm stats).
struct LoadedModel {
    std::string variant; // "pretrain" | "moe"
    RunConfig run;
    PretrainModel pre;
    MoEModel moe;

    Tensor predict(const Tensor& img) const {
        NoTapeScope guard;
        if (variant == "pretrain") return pre.forward(img);
        return moe.forward(img).pred;
    }
};

inline LoadedModel load_model(const std::string& ckpt_path, const DatasetManifest& m,
                              const std::string& routing_override = "") {
    Checkpoint ck = load_checkpoint(ckpt_path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(detail::get_string_tensor(ck.tensors, "__meta__/json"));
    } catch (const nlohmann::json::exception& e) {
        throw error("checkpoint: bad metadata: " + std::string(e.what()));
    }
    LoadedModel lm;
    lm.variant = meta.at("variant").get<std::string>();
    lm.run = run_config_from_json(meta.at("run"));
    const auto& in = meta.at("input");
    const int ns = in.at("ns").get<int>(), t = in.at("t").get<int>(), r = in.at("r").get<int>();
    const int mr = m.acq.receiver_cols.empty() ? m.acq.R : int(m.acq.receiver_cols.size());
    if (ns != m.acq.Ns || t != m.acq.T || r != mr)
        throw error("evaluate: checkpoint expects gather [" + std::to_string(ns) + "," +
                    std::to_string(t) + "," + std::to_string(r) + "], dataset provides [" +
                    std::to_string(m.acq.Ns) + "," + std::to_string(m.acq.T) + "," +
                    std::to_string(mr) + "]");
    if (lm.variant == "pretrain") {
        const ExpertKind kind = expert_kind_from_name(meta.at("expert").get<std::string>());
        lm.pre = build_pretrain_model(lm.run, m, kind);
        NamedParams target = lm.pre.params();
        load_weights_into(target, ck.tensors);
        return lm;
    }
    if (lm.variant != "moe") throw error("checkpoint: unknown variant " + lm.variant);
    if (!routing_override.empty()) lm.run.routing = routing_override;
    MoEModel& mm = lm.moe;
    mm.families = lm.run.families;
    mm.routing = lm.run.routing;
    mm.topk = lm.run.topk;
    mm.lambda = lm.run.lambda;
    mm.enc_cfg = encoder_config_for(lm.run, m);
    mm.enc = std::make_unique<Encoder>(mm.enc_cfg, lm.run.seed);
    mm.group_router = std::make_unique<LinearRouter>(lm.run.channels, kNumGroups, lm.run.seed);
    for (const auto& name : meta.at("best"))
        mm.best_kind.push_back(expert_kind_from_name(name.get<std::string>()));
    OperatorConfig oc = lm.run.op;
    oc.channels = lm.run.channels;
    for (size_t t2 = 0; t2 < mm.families.size(); ++t2)
        for (int g = 0; g < kNumGroups; ++g)
            mm.experts[size_t(g)].push_back(make_operator(group_kind(g), oc, lm.run.seed));
    NamedParams target;
    add_prefixed(target, "", mm.trainable_params());
    add_prefixed(target, "", mm.expert_params());
    load_weights_into(target, ck.tensors);
    return lm;
}

// ---------------------------------------------------------------------------
// evaluation reports

struct EvalReport {
    std::vector<SampleMetrics> samples;
    std::vector<SampleMetrics> aggregates; // one per family, sample_id "agg:<family>"
    std::string csv_path, json_path;
};

namespace detail {

inline nlohmann::ordered_json metrics_to_json(const SampleMetrics& s) {
    return {{"sample_id", s.sample_id}, {"family", s.family},     {"mae", s.mae},
            {"rmse", s.rmse},           {"ssim", s.ssim},         {"f_dom", s.f_dom},
            {"r_star", s.r_star},       {"hf_lf", s.hf_lf},       {"spec_corr", s.spec_corr},
            {"energy_ratio", s.energy_ratio}};
}

} // namespace detail

// Runs a checkpoint over every sample of a dataset and writes per-sample plus
// per-family aggregate metrics as CSV and JSON.
inline EvalReport cmd_evaluate(const std::string& ckpt_path, const std::string& dataset_dir,
                               const std::string& routing_override = "",
                               std::string out_dir = "") {
    const DatasetManifest m = load_manifest(dataset_dir);
    if (m.samples.empty()) throw error("evaluate: empty dataset");
    LoadedModel model = load_model(ckpt_path, m, routing_override);
    std::vector<PreparedSample> samples = prepare_samples(dataset_dir, m, {});
    if (samples.empty()) throw error("evaluate: empty dataset");

    // SSIM data range per family, from the standardized ground truth.
    std::map<std::string, double> range;
    for (const auto& fam : m.families) {
        double lo = kInf, hi = -kInf;
        for (const auto& s : samples)
            if (s.family == fam)
                for (int64_t i = 0; i < s.target.numel(); ++i) {
                    lo = std::min(lo, s.target[i]);
                    hi = std::max(hi, s.target[i]);
                }
        if (!(hi > lo))
            throw numeric_error("evaluate: family " + fam + " has a degenerate value range");
        range[fam] = hi - lo;
    }

    EvalReport rep;
    std::map<std::string, std::vector<size_t>> by_family;
    for (const auto& s : samples) {
        Tensor pred = model.predict(s.img);
        rep.samples.push_back(
            compute_sample_metrics(s.id, s.family, pred, s.target, range.at(s.family)));
        by_family[s.family].push_back(rep.samples.size() - 1);
    }
    for (const auto& [fam, idx] : by_family) {
        SampleMetrics agg;
        agg.sample_id = "agg:" + fam;
        agg.family = fam;
        for (size_t i : idx) {
            const SampleMetrics& s = rep.samples[i];
            agg.mae += s.mae;
            agg.rmse += s.rmse;
            agg.ssim += s.ssim;
            agg.f_dom += s.f_dom;
            agg.r_star += s.r_star;
            agg.hf_lf += s.hf_lf;
            agg.spec_corr += s.spec_corr;
            agg.energy_ratio += s.energy_ratio;
        }
        const double n = double(idx.size());
        agg.mae /= n;
        agg.rmse /= n;
        agg.ssim /= n;
        agg.f_dom /= n;
        agg.r_star /= n;
        agg.hf_lf /= n;
        agg.spec_corr /= n;
        agg.energy_ratio /= n;
        rep.aggregates.push_back(agg);
    }

    if (out_dir.empty()) out_dir = ".";
    std::filesystem::create_directories(out_dir);
    rep.csv_path = out_dir + "/eval.csv";
    rep.json_path = out_dir + "/eval.json";
    std::ofstream csv(rep.csv_path, std::ios::trunc);
    if (!csv) throw error("cannot write " + rep.csv_path);
    csv << metrics_csv_header() << "\n";
    for (const auto& s : rep.samples) csv << metrics_csv_row(s) << "\n";
    for (const auto& s : rep.aggregates) csv << metrics_csv_row(s) << "\n";
    csv.close();
    nlohmann::ordered_json j;
    j["checkpoint"] = ckpt_path;
    j["dataset"] = dataset_dir;
    nlohmann::ordered_json samp = nlohmann::ordered_json::array();
    for (const auto& s : rep.samples) samp.push_back(detail::metrics_to_json(s));
    j["samples"] = samp;
    nlohmann::ordered_json aggs;
    for (const auto& s : rep.aggregates) aggs[s.family] = detail::metrics_to_json(s);
    j["aggregates"] = aggs;
    std::ofstream jf(rep.json_path, std::ios::trunc);
    if (!jf) throw error("cannot write " + rep.json_path);
    jf << j.dump(2) << "\n";
    return rep;
}

// ---------------------------------------------------------------------------
// spectrum diagnostics over a dataset

struct SpectrumRow {
    std::string id, family;
    double f_dom = 0, r_star = 0, hf_lf = 0;
};

// Spectrum diagnostics of the standardized ground-truth velocities, or of
// model predictions when a checkpoint is given. Writes a CSV when out_csv is
// non-empty.
inline std::vector<SpectrumRow> cmd_diagnose_spectrum(const std::string& dataset_dir,
                                                      const std::string& ckpt_path = "",
                                                      const std::string& out_csv = "") {
    const DatasetManifest m = load_manifest(dataset_dir);
    if (m.samples.empty()) throw error("diagnose-spectrum: empty dataset");
    std::vector<PreparedSample> samples = prepare_samples(dataset_dir, m, {});
    std::unique_ptr<LoadedModel> model;
    if (!ckpt_path.empty())
        model = std::make_unique<LoadedModel>(load_model(ckpt_path, m));
    std::vector<SpectrumRow> rows;
    for (const auto& s : samples) {
        Tensor field = model ? model->predict(s.img) : s.target;
        const SpectrumDiagnostics d = spectrum_diagnostics(field);
        rows.push_back({s.id, s.family, d.f_dom, d.r_star, d.hf_lf});
    }
    if (!out_csv.empty()) {
        std::ofstream f(out_csv, std::ios::trunc);
        if (!f) throw error("cannot write " + out_csv);
        f << "sample_id,family,f_dom,r_star,hf_lf\n";
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%.9g,%.9g\n", r.id.c_str(),
                          r.family.c_str(), r.f_dom, r.r_star, r.hf_lf);
            f << buf;
        }
    }
    return rows;
}

} // namespace waveop
