// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "waveop/training.hpp"

using namespace waveop;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& leaf) {
    const fs::path root = fs::temp_directory_path() / "waveop_pipeline_test";
    fs::create_directories(root);
    return (root / leaf).string();
}

// Small acquisition so wave simulation and training stay quick.
GenerateConfig tiny_gen(const std::string& out, std::vector<std::string> families,
                        std::vector<int> counts) {
    GenerateConfig g;
    g.out_dir = out;
    g.families = std::move(families);
    g.counts = std::move(counts);
    g.H = 40;
    g.W = 40;
    g.acq.Ns = 2;
    g.acq.R = 20;
    g.acq.T = 200;
    return g;
}

RunConfig tiny_run(const std::string& dataset, const std::string& out) {
    RunConfig c = RunConfig::desk_defaults();
    c.dataset = dataset;
    c.out = out;
    c.patch_t = 50;
    c.patch_x = 20;
    c.embed = 16;
    c.blocks = 1;
    c.heads = 2;
    c.channels = 4;
    c.out_h = 40;
    c.out_w = 40;
    c.op.hidden = 4;
    c.op.layers = 1;
    c.op.modes_x = 4;
    c.op.modes_y = 4;
    c.sched.warmup = 5;
    c.sched.period = 100;
    c.batch = 4;
    c.epochs = 2;
    return c;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

size_t count_lines(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// Shared fixtures, built once per test binary run. cmd_generate's settings
// check makes repeated calls cheap no-ops.
const std::string& mixed_dataset() {
    static const std::string dir = [] {
        std::string d = scratch("ds_mixed");
        cmd_generate(tiny_gen(d, {"flat", "curve"}, {8, 8}));
        return d;
    }();
    return dir;
}

const std::string& flat50_dataset() {
    static const std::string dir = [] {
        std::string d = scratch("ds_flat50");
        cmd_generate(tiny_gen(d, {"flat"}, {50}));
        return d;
    }();
    return dir;
}

// Pretrained experts for both families and all four kinds, plus the registry;
// built once and reused by the mixture and evaluation tests.
const ExpertRegistry& mixed_registry() {
    static const ExpertRegistry reg = [] {
        const std::string runs = scratch("runs_mixed");
        for (const char* fam : {"flat", "curve"})
            for (ExpertKind k : kAllExpertKinds) {
                RunConfig c = tiny_run(mixed_dataset(), runs);
                c.seed = 11;
                cmd_pretrain_expert(c, k, fam);
            }
        return cmd_build_registry(runs);
    }();
    return reg;
}

} // namespace

// ---------------------------------------------------------------------------
// dataset generation

TEST_CASE("generation is deterministic across directories") {
    const std::string a = scratch("ds_det_a"), b = scratch("ds_det_b");
    fs::remove_all(a);
    fs::remove_all(b);
    cmd_generate(tiny_gen(a, {"flat"}, {3}));
    cmd_generate(tiny_gen(b, {"flat"}, {3}));

    // Identical file sets with identical bytes.
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a).string());
    std::sort(rel.begin(), rel.end());
    REQUIRE(rel.size() >= 5); // manifest, norm file, 3 samples
    for (const auto& r : rel)
        CHECK(read_text(a + "/" + r) == read_text(b + "/" + r));
}

TEST_CASE("regeneration into an existing dataset is a cheap no-op") {
    const std::string d = scratch("ds_rerun");
    fs::remove_all(d);
    DatasetManifest m1 = cmd_generate(tiny_gen(d, {"flat"}, {3}));
    const auto stamp = fs::last_write_time(manifest_path(d));
    DatasetManifest m2 = cmd_generate(tiny_gen(d, {"flat"}, {3}));
    CHECK(fs::last_write_time(manifest_path(d)) == stamp);
    CHECK(m2.samples.size() == m1.samples.size());

    // Same directory, different settings: refuse instead of overwrite.
    GenerateConfig other = tiny_gen(d, {"flat"}, {4});
    CHECK_THROWS_AS(cmd_generate(other), error);
}

TEST_CASE("generation rejects invalid requests") {
    GenerateConfig g = tiny_gen(scratch("ds_bad"), {"flat"}, {0});
    CHECK_THROWS_AS(cmd_generate(g), error); // zero samples
    g = tiny_gen(scratch("ds_bad"), {"flat", "curve"}, {2});
    CHECK_THROWS_AS(cmd_generate(g), error); // counts mismatch
    g = tiny_gen(scratch("ds_bad"), {}, {});
    CHECK_THROWS_AS(cmd_generate(g), error); // no families
    g = tiny_gen(scratch("ds_bad"), {"granite"}, {2});
    CHECK_THROWS_AS(cmd_generate(g), error); // unknown family
}

TEST_CASE("manifest lists every sample with its family and norm stats") {
    const DatasetManifest m = load_manifest(mixed_dataset());
    REQUIRE(m.samples.size() == 16);
    REQUIRE(m.families == std::vector<std::string>{"flat", "curve"});
    int flat = 0, curve = 0;
    for (const auto& s : m.samples) {
        CHECK(!s.id.empty());
        CHECK(!s.file.empty());
        if (s.family == "flat") ++flat;
        if (s.family == "curve") ++curve;
    }
    CHECK(flat == 8);
    CHECK(curve == 8);
    for (const auto& fam : m.families) {
        REQUIRE(m.norm.count(fam) == 1);
        CHECK(m.norm.at(fam).std_S > 0);
        CHECK(m.norm.at(fam).std_V > 0);
    }
    CHECK_THROWS_AS(load_manifest(scratch("no_such_dataset")), error);
}

TEST_CASE("stored samples standardize to zero mean and unit variance") {
    const DatasetManifest m = load_manifest(mixed_dataset());
    for (const auto& fam : m.families) {
        const NormStats& st = m.norm.at(fam);
        double sum = 0, sq = 0;
        int64_t n = 0;
        for (const auto& ref : m.samples) {
            if (ref.family != fam) continue;
            Sample s = load_sample(mixed_dataset(), ref);
            Tensor z = standardize(s.seis, st.mean_S, st.std_S);
            for (int64_t i = 0; i < z.numel(); ++i) {
                sum += z[i];
                sq += z[i] * z[i];
            }
            n += z.numel();
        }
        CHECK(std::abs(sum / double(n)) < 1e-6);
        CHECK(sq / double(n) == Catch::Approx(1.0).margin(1e-6));
    }
}

// ---------------------------------------------------------------------------
// train/validation split

TEST_CASE("split is per family, disjoint, and fixed") {
    const DatasetManifest m = load_manifest(mixed_dataset());
    const SplitIndices s1 = split_dataset(m, {"flat", "curve"});
    const SplitIndices s2 = split_dataset(m, {"flat", "curve"});
    CHECK(s1.train == s2.train);
    CHECK(s1.val == s2.val);

    // 8 per family at an 80/20 ratio: 6 train + 2 val each.
    CHECK(s1.train.size() == 12);
    CHECK(s1.val.size() == 4);
    std::vector<size_t> all = s1.train;
    all.insert(all.end(), s1.val.begin(), s1.val.end());
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i); // exact cover

    // Both families appear in both halves.
    int train_flat = 0, val_flat = 0;
    for (size_t i : s1.train) train_flat += m.samples[i].family == "flat";
    for (size_t i : s1.val) val_flat += m.samples[i].family == "flat";
    CHECK(train_flat == 6);
    CHECK(val_flat == 2);

    CHECK_THROWS_AS(split_dataset(m, {"granite"}), error);
}

// ---------------------------------------------------------------------------
// expert pretraining

TEST_CASE("pretraining fifty flat samples halves the loss many times over") {
    RunConfig c = tiny_run(flat50_dataset(), scratch("runs_flat50"));
    c.seed = 7;
    c.epochs = 50;
    c.batch = 8;
    const PretrainResult r = cmd_pretrain_expert(c, ExpertKind::FNO, "flat");
    REQUIRE(r.history.size() == 50);
    const double initial = r.history.front().train_loss;
    const double final_loss = r.history.back().train_loss;
    INFO("initial " << initial << " final " << final_loss);
    CHECK(final_loss < 0.2 * initial);
    CHECK(std::isfinite(r.best_val_mae));
    CHECK(fs::exists(r.checkpoint_path));
    // Header plus one row per epoch.
    CHECK(count_lines(read_text(r.log_path)) == 51);
}

TEST_CASE("pretraining is deterministic for a fixed seed") {
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_det_a"));
    c.seed = 21;
    const PretrainResult r1 = cmd_pretrain_expert(c, ExpertKind::WNO, "flat");
    c.out = scratch("runs_det_b");
    const PretrainResult r2 = cmd_pretrain_expert(c, ExpertKind::WNO, "flat");
    REQUIRE(r1.history.size() == r2.history.size());
    for (size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
        CHECK(r1.history[i].val_loss == r2.history[i].val_loss);
        CHECK(r1.history[i].val_mae == r2.history[i].val_mae);
    }
    CHECK(read_text(r1.log_path) == read_text(r2.log_path));
    // The saved checkpoints agree bit for bit as well.
    CHECK(read_file_bytes(r1.checkpoint_path) == read_file_bytes(r2.checkpoint_path));
}

TEST_CASE("pretraining rejects bad inputs before any work") {
    RunConfig c = tiny_run(scratch("no_such_dataset"), scratch("runs_err"));
    CHECK_THROWS_AS(cmd_pretrain_expert(c, ExpertKind::FNO, "flat"), error);

    c.dataset = mixed_dataset();
    c.epochs = 0;
    CHECK_THROWS_AS(cmd_pretrain_expert(c, ExpertKind::FNO, "flat"), error);

    c.epochs = 1;
    CHECK_THROWS_AS(cmd_pretrain_expert(c, ExpertKind::FNO, "granite"), error);
}

TEST_CASE("non-finite dataset values abort before training") {
    // Copy the tiny dataset and poison one stored sample.
    const std::string dir = scratch("ds_poison");
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy(mixed_dataset(), dir, fs::copy_options::recursive);
    const DatasetManifest m = load_manifest(dir);
    const std::string victim = dir + "/" + m.samples[0].file;
    NamedParams t = load_tensorfile(victim);
    REQUIRE(t.find("seis") != nullptr);
    (*t.find("seis"))[0] = std::nan("");
    save_tensorfile(victim, t);

    RunConfig c = tiny_run(dir, scratch("runs_poison"));
    CHECK_THROWS_AS(cmd_pretrain_expert(c, ExpertKind::FNO, "flat"), numeric_error);
}

// ---------------------------------------------------------------------------
// registry construction

TEST_CASE("registry picks the lowest validation error per family") {
    const std::string dir = scratch("runs_synth");
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto sidecar = [&](const std::string& fam, const std::string& kind, double mae,
                       bool encoder) {
        nlohmann::ordered_json j;
        j["family"] = fam;
        j["kind"] = kind;
        j["encoder"] = encoder;
        j["best_val_mae"] = mae;
        j["best_epoch"] = 0;
        j["checkpoint"] = dir + "/pretrain_" + fam + "_" + kind + ".wfwi";
        j["epochs"] = 1;
        j["seed"] = 1;
        std::ofstream f(dir + "/pretrain_" + fam + "_" + kind + "_val.json");
        f << j.dump();
    };
    // Family "a": wno clearly best. Family "b": exact tie between fno and
    // mno; the fixed precedence keeps fno.
    sidecar("a", "fno", 0.50, true);
    sidecar("a", "wno", 0.40, true);
    sidecar("a", "lno", 0.45, true);
    sidecar("b", "fno", 0.30, true);
    sidecar("b", "mno", 0.30, true);
    // A resize-baseline run must never become an expert even with the best
    // score.
    sidecar("a", "mno", 0.01, false);

    const ExpertRegistry reg = cmd_build_registry(dir);
    REQUIRE(reg.families == std::vector<std::string>{"a", "b"});
    CHECK(reg.best_kind[0] == ExpertKind::WNO);
    CHECK(reg.best_kind[1] == ExpertKind::FNO);
    CHECK(reg.val_mae[0][int(ExpertKind::WNO)] == 0.40);
    CHECK(reg.group_paths[int(ExpertKind::MNO)][0].empty()); // baseline skipped

    // Round trip through registry.json.
    const ExpertRegistry back = load_registry(dir + "/registry.json");
    CHECK(back.families == reg.families);
    CHECK(back.best_kind == reg.best_kind);
    CHECK(back.best_path == reg.best_path);

    fs::remove_all(scratch("runs_empty"));
    fs::create_directories(scratch("runs_empty"));
    CHECK_THROWS_AS(cmd_build_registry(scratch("runs_empty")), error);
}

// ---------------------------------------------------------------------------
// mixture training

TEST_CASE("mixture training freezes experts and improves validation error") {
    const ExpertRegistry& reg = mixed_registry();
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_moe"));
    c.families = {"flat", "curve"};
    c.routing = "strong-weak";
    c.topk = 2;
    c.lambda = 0.3;
    c.epochs = 30;
    c.seed = 5;
    const MoEResult r = cmd_train_moe(c, reg);

    // Frozen expert weights: checksum unchanged through training.
    CHECK(r.expert_checksum_before == r.expert_checksum_after);

    // Validation MAE at the best epoch beats the untrained epoch-0 value.
    REQUIRE(r.history.size() == 30);
    INFO("epoch0 " << r.history.front().val_mae << " best " << r.best_val_mae);
    CHECK(r.best_val_mae < r.history.front().val_mae);

    // Every logged step carries a strong set of exactly topk groups.
    std::istringstream steps(read_text(r.steps_path));
    std::string line;
    std::getline(steps, line);
    REQUIRE(line == "step,lr,loss,strong_size");
    size_t rows = 0;
    while (std::getline(steps, line)) {
        REQUIRE(line.size() > 2);
        CHECK(line.substr(line.rfind(',') + 1) == "2");
        ++rows;
    }
    CHECK(rows == 30 * 3); // 12 train samples, batch 4

    // The checkpoint stores the frozen expert weights verbatim.
    Checkpoint ck = load_checkpoint(r.checkpoint_path);
    const size_t flat_idx =
        size_t(std::find(reg.families.begin(), reg.families.end(), "flat") -
               reg.families.begin());
    Checkpoint expert_ck =
        load_checkpoint(reg.group_paths[int(ExpertKind::FNO)][flat_idx]);
    int compared = 0;
    for (const auto& [name, t] : expert_ck.tensors.items) {
        if (name.rfind("op/", 0) != 0) continue;
        // flat is type 0 in c.families; fno is group 0.
        const Tensor* frozen = ck.tensors.find("expert/0/0/" + name.substr(3));
        REQUIRE(frozen != nullptr);
        REQUIRE(frozen->numel() == t.numel());
        for (int64_t i = 0; i < t.numel(); ++i) REQUIRE((*frozen)[i] == t[i]);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("mixture training covers every routing variant") {
    const ExpertRegistry& reg = mixed_registry();
    for (const char* variant : {"type-sum", "group-sum"}) {
        RunConfig c = tiny_run(mixed_dataset(), scratch(std::string("runs_moe_") + variant));
        c.families = {"flat", "curve"};
        c.routing = variant;
        c.epochs = 2;
        c.seed = 5;
        const MoEResult r = cmd_train_moe(c, reg);
        CHECK(std::isfinite(r.best_val_mae));
        CHECK(r.expert_checksum_before == r.expert_checksum_after);
    }
}

TEST_CASE("the optional type-classification loss trains with a wider head") {
    const ExpertRegistry& reg = mixed_registry();
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_moe_type"));
    c.families = {"flat", "curve"};
    c.epochs = 2;
    c.seed = 5;
    c.type_loss = 0.2;
    c.type_count = 4; // head wider than the family count
    const MoEResult r = cmd_train_moe(c, reg);
    CHECK(std::isfinite(r.best_val_mae));
}

TEST_CASE("mixture training demands a complete registry") {
    const ExpertRegistry& reg = mixed_registry();
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_moe_err"));
    c.families = {"flat", "curve"};

    // A family missing from the registry entirely.
    ExpertRegistry partial = reg;
    partial.families = {"flat"};
    partial.best_kind.resize(1);
    partial.best_path.resize(1);
    partial.val_mae.resize(1);
    for (auto& g : partial.group_paths) g.resize(1);
    CHECK_THROWS_AS(cmd_train_moe(c, partial), error);

    // A family present but missing one expert kind (group variants need all
    // four).
    ExpertRegistry gap = reg;
    gap.group_paths[int(ExpertKind::WNO)][0].clear();
    CHECK_THROWS_AS(cmd_train_moe(c, gap), error);

    // Fewer than two families is not a mixture problem.
    RunConfig single = c;
    single.families = {"flat"};
    CHECK_THROWS_AS(cmd_train_moe(single, reg), error);
}

// ---------------------------------------------------------------------------
// evaluation

TEST_CASE("ground truth evaluated against itself is perfect") {
    const DatasetManifest m = load_manifest(mixed_dataset());
    std::vector<PreparedSample> samples = prepare_samples(mixed_dataset(), m, {});
    REQUIRE(!samples.empty());
    for (const auto& s : samples) {
        const SampleMetrics sm =
            compute_sample_metrics(s.id, s.family, s.target, s.target, 4.0);
        CHECK(sm.mae == 0.0);
        CHECK(sm.rmse == 0.0);
        CHECK(sm.ssim == Catch::Approx(1.0).margin(1e-12));
        CHECK(sm.spec_corr == Catch::Approx(1.0).margin(1e-12));
        CHECK(sm.energy_ratio == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("evaluation emits one row per sample plus per-family aggregates") {
    const ExpertRegistry& reg = mixed_registry();
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_moe_eval"));
    c.families = {"flat", "curve"};
    c.epochs = 1;
    c.seed = 5;
    const MoEResult tr = cmd_train_moe(c, reg);

    const EvalReport rep =
        cmd_evaluate(tr.checkpoint_path, mixed_dataset(), "", scratch("eval_out"));
    CHECK(rep.samples.size() == 16);
    REQUIRE(rep.aggregates.size() == 2);
    for (const auto& a : rep.aggregates) {
        CHECK(a.sample_id.rfind("agg:", 0) == 0);
        CHECK(std::isfinite(a.mae));
    }
    // CSV: header + 16 sample rows + 2 aggregate rows.
    CHECK(count_lines(read_text(rep.csv_path)) == 19);
    // JSON parses and matches the row count.
    const nlohmann::json j = nlohmann::json::parse(read_text(rep.json_path));
    CHECK(j.at("samples").size() == 16);
    CHECK(j.at("aggregates").size() == 2);

    // Routing override is accepted at evaluation time.
    const EvalReport rep2 = cmd_evaluate(tr.checkpoint_path, mixed_dataset(), "type-sum",
                                         scratch("eval_out2"));
    CHECK(rep2.samples.size() == 16);

    // Re-running the same evaluation reproduces the CSV byte for byte.
    const EvalReport rep3 =
        cmd_evaluate(tr.checkpoint_path, mixed_dataset(), "", scratch("eval_out3"));
    CHECK(read_text(rep.csv_path) == read_text(rep3.csv_path));
}

TEST_CASE("evaluation rejects an empty dataset") {
    const std::string dir = scratch("ds_empty");
    fs::remove_all(dir);
    fs::create_directories(dir);
    nlohmann::json j = nlohmann::json::parse(read_text(manifest_path(mixed_dataset())));
    j["samples"] = nlohmann::json::array();
    std::ofstream f(manifest_path(dir));
    f << j.dump(2);
    f.close();
    CHECK_THROWS_AS(cmd_evaluate("unused.wfwi", dir), error);
}

TEST_CASE("evaluation refuses a dataset with mismatched acquisition") {
    const std::string other = scratch("ds_other_shape");
    GenerateConfig g = tiny_gen(other, {"flat"}, {2});
    g.acq.T = 100;
    cmd_generate(g);

    const ExpertRegistry& reg = mixed_registry();
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_moe_shape"));
    c.families = {"flat", "curve"};
    c.epochs = 1;
    c.seed = 5;
    const MoEResult tr = cmd_train_moe(c, reg);
    CHECK_THROWS_AS(cmd_evaluate(tr.checkpoint_path, other), error);
}

// ---------------------------------------------------------------------------
// spectrum diagnostics and config plumbing

TEST_CASE("spectrum diagnostics cover ground truth and predictions") {
    const auto gt_rows = cmd_diagnose_spectrum(mixed_dataset());
    CHECK(gt_rows.size() == 16);
    for (const auto& r : gt_rows) CHECK(std::isfinite(r.hf_lf));

    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_diag"));
    c.seed = 9;
    const PretrainResult pr = cmd_pretrain_expert(c, ExpertKind::FNO, "flat");
    const std::string csv = scratch("diag.csv");
    const auto pred_rows = cmd_diagnose_spectrum(mixed_dataset(), pr.checkpoint_path, csv);
    CHECK(pred_rows.size() == 16);
    CHECK(count_lines(read_text(csv)) == 17);
}

TEST_CASE("run configs round trip through json and hash distinctly") {
    RunConfig c = RunConfig::desk_defaults();
    c.dataset = "somewhere";
    c.families = {"flat", "curve"};
    const RunConfig back = run_config_from_json(run_config_to_json(c));
    CHECK(config_hash(back) == config_hash(c));

    RunConfig other = c;
    other.lambda = 0.5;
    CHECK(config_hash(other) != config_hash(c));

    nlohmann::json bad = run_config_to_json(c);
    bad["no_such_key"] = 1;
    CHECK_THROWS_AS(run_config_from_json(bad), error);

    CHECK_THROWS_AS(load_run_config(scratch("missing.json")), error);

    RunConfig invalid = c;
    invalid.routing = "vibes";
    CHECK_THROWS_AS(invalid.validate(), error);
    invalid = c;
    invalid.epochs = 0;
    CHECK_THROWS_AS(invalid.validate(), error);
    invalid = c;
    invalid.adamw.lr = -1.0;
    CHECK_THROWS_AS(invalid.validate(), error);
}

TEST_CASE("checkpoints reload into an identical forward pass") {
    RunConfig c = tiny_run(mixed_dataset(), scratch("runs_reload"));
    c.seed = 13;
    const PretrainResult pr = cmd_pretrain_expert(c, ExpertKind::MNO, "curve");

    const DatasetManifest m = load_manifest(mixed_dataset());
    const LoadedModel m1 = load_model(pr.checkpoint_path, m);
    const LoadedModel m2 = load_model(pr.checkpoint_path, m);
    std::vector<PreparedSample> samples = prepare_samples(mixed_dataset(), m, {"curve"});
    REQUIRE(!samples.empty());
    Tensor p1 = m1.predict(samples[0].img);
    Tensor p2 = m2.predict(samples[0].img);
    REQUIRE(p1.numel() == p2.numel());
    for (int64_t i = 0; i < p1.numel(); ++i) REQUIRE(p1[i] == p2[i]);
}
