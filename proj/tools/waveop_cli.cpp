// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end for the inversion pipeline: dataset generation,
// per-family expert pretraining, registry construction, mixture fine-tuning,
// evaluation, and spectrum diagnostics.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "waveop/training.hpp"

namespace {

using nlohmann::ordered_json;

void print_error(const char* type, const std::string& message) {
    ordered_json j;
    j["error"] = {{"type", type}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

// Worker cap from the environment. All compute paths are currently
// single-threaded, so any positive value is honored; a malformed value is
// still rejected loudly.
int thread_cap_from_env() {
    const char* v = std::getenv("WAVEOP_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (!end || *end != '\0' || n < 1)
        throw waveop::error(std::string("WAVEOP_THREADS must be a positive integer, got '") +
                            v + "'");
    return int(n);
}

waveop::RunConfig assemble_run_config(bool desk, const std::string& config_path) {
    waveop::RunConfig base = desk ? waveop::RunConfig::desk_defaults() : waveop::RunConfig{};
    if (!config_path.empty()) base = waveop::load_run_config(config_path, std::move(base));
    return base;
}

int run(int argc, char** argv) {
    CLI::App app{"waveop: structure-aligned neural full-waveform inversion"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "simulate a velocity/seismogram dataset");
    waveop::GenerateConfig gc;
    gc.families = {"flat"};
    gc.counts = {4};
    std::vector<int> gen_counts;
    int gen_T = -1;
    double gen_record = -1.0;
    gen->add_option("--out", gc.out_dir, "output dataset directory")->required();
    gen->add_option("--families", gc.families, "family names (e.g. flat curve flat-fault)")
        ->delimiter(',');
    gen->add_option("--counts", gen_counts,
                    "samples per family; one value applies to all families")
        ->delimiter(',');
    gen->add_option("--seed", gc.seed, "base seed for velocity sampling");
    gen->add_option("--grid-h", gc.H, "velocity grid rows");
    gen->add_option("--grid-w", gc.W, "velocity grid columns");
    gen->add_option("--dx", gc.dx, "grid spacing in meters");
    gen->add_option("--shots", gc.acq.Ns, "number of shots");
    gen->add_option("--receivers", gc.acq.R, "number of receivers");
    gen->add_option("--time-steps", gen_T, "recorded samples per trace");
    gen->add_option("--record-time", gen_record, "recording window in seconds");
    gen->add_option("--f0", gc.acq.f0, "source peak frequency in Hz");

    // ---- pretrain ----------------------------------------------------------
    auto* pre = app.add_subcommand("pretrain", "train one expert on one family end to end");
    std::string pre_dataset, pre_family, pre_expert = "fno", pre_out = "runs";
    std::string pre_config;
    bool pre_desk = false, pre_no_encoder = false;
    uint64_t pre_seed = 0;
    int pre_epochs = -1, pre_batch = -1;
    bool pre_seed_set = false;
    pre->add_option("--dataset", pre_dataset, "dataset directory")->required();
    pre->add_option("--family", pre_family, "velocity family to train on")->required();
    pre->add_option("--expert", pre_expert, "expert kind: fno, wno, mno, lno");
    pre->add_option("--out", pre_out, "run output directory");
    pre->add_option("--config", pre_config, "JSON run-config overlay file");
    pre->add_option("--seed", pre_seed, "run seed")->each([&](const std::string&) {
        pre_seed_set = true;
    });
    pre->add_option("--epochs", pre_epochs, "training epochs");
    pre->add_option("--batch", pre_batch, "batch size");
    pre->add_flag("--desk", pre_desk, "start from desk-scale loop defaults");
    pre->add_flag("--no-encoder", pre_no_encoder,
                  "resize-only ablation baseline instead of the encoder");

    // ---- build-registry ----------------------------------------------------
    auto* reg = app.add_subcommand("build-registry",
                                   "pick the best expert per family from pretraining runs");
    std::string reg_dir = "runs";
    reg->add_option("--runs", reg_dir, "directory holding pretraining results");

    // ---- train-moe ---------------------------------------------------------
    auto* moe = app.add_subcommand("train-moe",
                                   "fine-tune encoder and router over frozen experts");
    std::string moe_dataset, moe_registry, moe_out = "runs", moe_config;
    std::vector<std::string> moe_families;
    std::string moe_routing;
    double moe_lambda = -1.0;
    int moe_topk = -1, moe_epochs = -1, moe_batch = -1;
    uint64_t moe_seed = 0;
    bool moe_seed_set = false, moe_desk = false;
    moe->add_option("--dataset", moe_dataset, "dataset directory")->required();
    moe->add_option("--registry", moe_registry, "registry.json from build-registry")->required();
    moe->add_option("--families", moe_families, "two or more family names")
        ->delimiter(',')
        ->required();
    moe->add_option("--out", moe_out, "run output directory");
    moe->add_option("--config", moe_config, "JSON run-config overlay file");
    moe->add_option("--routing", moe_routing, "type-sum, group-sum, or strong-weak")
        ->check(CLI::IsMember({"type-sum", "group-sum", "strong-weak"}));
    moe->add_option("--lambda", moe_lambda, "strong-weak contrast weight");
    moe->add_option("--topk", moe_topk, "strong-set size for strong-weak routing");
    moe->add_option("--seed", moe_seed, "run seed")->each([&](const std::string&) {
        moe_seed_set = true;
    });
    moe->add_option("--epochs", moe_epochs, "training epochs");
    moe->add_option("--batch", moe_batch, "batch size");
    moe->add_flag("--desk", moe_desk, "start from desk-scale loop defaults");

    // ---- evaluate ----------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "metrics report for a checkpoint on a dataset");
    std::string ev_ckpt, ev_dataset, ev_out = ".", ev_routing;
    ev->add_option("--checkpoint", ev_ckpt, "model checkpoint (.wfwi)")->required();
    ev->add_option("--dataset", ev_dataset, "dataset directory")->required();
    ev->add_option("--out", ev_out, "report output directory");
    ev->add_option("--routing", ev_routing, "override the mixture routing variant")
        ->check(CLI::IsMember({"type-sum", "group-sum", "strong-weak"}));

    // ---- diagnose-spectrum -------------------------------------------------
    auto* diag = app.add_subcommand("diagnose-spectrum",
                                    "radial spectrum diagnostics of targets or predictions");
    std::string diag_dataset, diag_ckpt, diag_out = "spectrum.csv";
    diag->add_option("--dataset", diag_dataset, "dataset directory")->required();
    diag->add_option("--checkpoint", diag_ckpt, "optional checkpoint; diagnose its predictions");
    diag->add_option("--out", diag_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        print_error("usage", e.what());
        return e.get_exit_code();
    }
    (void)thread_cap_from_env();

    if (gen->parsed()) {
        if (!gen_counts.empty()) {
            gc.counts = gen_counts;
            if (gc.counts.size() == 1 && gc.families.size() > 1)
                gc.counts.assign(gc.families.size(), gc.counts[0]);
        } else {
            gc.counts.assign(gc.families.size(), gc.counts.empty() ? 4 : gc.counts[0]);
        }
        if (gen_T > 0) gc.acq.T = gen_T;
        if (gen_record > 0) gc.acq.record_time = gen_record;
        waveop::DatasetManifest m = waveop::cmd_generate(gc);
        ordered_json out;
        out["dataset"] = gc.out_dir;
        out["manifest"] = waveop::manifest_path(gc.out_dir);
        out["samples"] = m.samples.size();
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (pre->parsed()) {
        waveop::RunConfig cfg = assemble_run_config(pre_desk, pre_config);
        cfg.dataset = pre_dataset;
        cfg.out = pre_out;
        if (pre_seed_set) cfg.seed = pre_seed;
        if (pre_epochs > 0) cfg.epochs = pre_epochs;
        if (pre_batch > 0) cfg.batch = pre_batch;
        if (pre_no_encoder) cfg.use_encoder = false;
        const waveop::ExpertKind kind = waveop::expert_kind_from_name(pre_expert);
        waveop::PretrainResult r = waveop::cmd_pretrain_expert(cfg, kind, pre_family);
        ordered_json out;
        out["checkpoint"] = r.checkpoint_path;
        out["log"] = r.log_path;
        out["best_val_mae"] = r.best_val_mae;
        out["best_epoch"] = r.best_epoch;
        out["initial_train_loss"] = r.initial_train_loss;
        out["final_train_loss"] = r.final_train_loss;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (reg->parsed()) {
        waveop::ExpertRegistry r = waveop::cmd_build_registry(reg_dir);
        ordered_json out;
        out["registry"] = reg_dir + "/registry.json";
        out["families"] = r.families;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (moe->parsed()) {
        waveop::RunConfig cfg = assemble_run_config(moe_desk, moe_config);
        cfg.dataset = moe_dataset;
        cfg.out = moe_out;
        cfg.families = moe_families;
        if (moe_seed_set) cfg.seed = moe_seed;
        if (moe_epochs > 0) cfg.epochs = moe_epochs;
        if (moe_batch > 0) cfg.batch = moe_batch;
        if (!moe_routing.empty()) cfg.routing = moe_routing;
        if (moe_lambda >= 0) cfg.lambda = moe_lambda;
        if (moe_topk > 0) cfg.topk = moe_topk;
        waveop::ExpertRegistry registry = waveop::load_registry(moe_registry);
        waveop::MoEResult r = waveop::cmd_train_moe(cfg, registry);
        ordered_json out;
        out["checkpoint"] = r.checkpoint_path;
        out["log"] = r.log_path;
        out["steps"] = r.steps_path;
        out["best_val_mae"] = r.best_val_mae;
        out["best_epoch"] = r.best_epoch;
        char cs[32];
        std::snprintf(cs, sizeof cs, "%016llx",
                      static_cast<unsigned long long>(r.expert_checksum_after));
        out["expert_checksum"] = cs;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (ev->parsed()) {
        waveop::EvalReport r = waveop::cmd_evaluate(ev_ckpt, ev_dataset, ev_routing, ev_out);
        ordered_json out;
        out["csv"] = r.csv_path;
        out["json"] = r.json_path;
        out["samples"] = r.samples.size();
        ordered_json aggs;
        for (const auto& a : r.aggregates) aggs[a.family] = {{"mae", a.mae}, {"ssim", a.ssim}};
        out["aggregates"] = aggs;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (diag->parsed()) {
        auto rows = waveop::cmd_diagnose_spectrum(diag_dataset, diag_ckpt, diag_out);
        ordered_json out;
        out["csv"] = diag_out;
        out["samples"] = rows.size();
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    return 0; // unreachable: require_subcommand(1)
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const waveop::shape_error& e) {
        print_error("shape", e.what());
    } catch (const waveop::numeric_error& e) {
        print_error("numeric", e.what());
    } catch (const waveop::error& e) {
        print_error("runtime", e.what());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
    }
    return 1;
}
