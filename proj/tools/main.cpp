// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// deskdiff command-line tool. Every command reads one JSON run configuration,
// writes its artifacts plus the resolved configuration and a hashed manifest
// into the output directory, and exits 0 on success, 2 on usage/input errors,
// 3 on numerical failures, and 4 on acceptance-gate failures. Failures print
// a machine-readable error JSON to stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deskdiff/bounds.hpp"
#include "deskdiff/config.hpp"
#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/diffedit.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/eval.hpp"
#include "deskdiff/io.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/schedule.hpp"
#include "deskdiff/stats.hpp"
#include "deskdiff/svg.hpp"

namespace {

using deskdiff::RunConfig;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kInitTag = 0x696e6974;  // model initialization stream
constexpr std::uint64_t kMcTag = 0x6d63;        // bound-curve Monte Carlo stream

struct CliContext {
    RunConfig cfg;
    int jobs = 1;
    deskdiff::Manifest manifest;

    std::string path(const std::string& name) const {
        return (fs::path(cfg.out_dir) / name).string();
    }
};

// Creates the output directory and records the resolved configuration, which
// every artifact directory carries so runs are self-describing.
void open_out_dir(CliContext& ctx) {
    fs::create_directories(ctx.cfg.out_dir);
    deskdiff::write_text_file(ctx.path("config.json"),
                              deskdiff::serialize_run_config(ctx.cfg));
    ctx.manifest.add(ctx.cfg.out_dir, "config.json");
}

void require_path(const std::string& value, const std::string& field) {
    if (value.empty())
        throw deskdiff::ConfigError("config: '" + field + "' is required for this command",
                                    "missing-input");
}

deskdiff::NoiseSchedule make_schedule(const RunConfig& cfg) {
    return deskdiff::NoiseSchedule::linear(cfg.schedule.steps, cfg.schedule.beta_min,
                                           cfg.schedule.beta_max);
}

deskdiff::LoadedDataset load_data(const CliContext& ctx) {
    require_path(ctx.cfg.paths.dataset, "paths.dataset");
    return deskdiff::load_dataset(ctx.cfg.paths.dataset);
}

deskdiff::Denoiser load_model(const CliContext& ctx, const deskdiff::NoiseSchedule& sched) {
    require_path(ctx.cfg.paths.denoiser, "paths.denoiser");
    deskdiff::Denoiser model = deskdiff::load_denoiser(ctx.cfg.paths.denoiser);
    if (model.schedule_fingerprint != sched.fingerprint())
        throw deskdiff::ConfigError(
            "checkpoint was trained under a different noise schedule");
    return model;
}

deskdiff::Classifier load_clf(const CliContext& ctx) {
    require_path(ctx.cfg.paths.classifier, "paths.classifier");
    return deskdiff::load_classifier(ctx.cfg.paths.classifier);
}

void write_sample_pgm(CliContext& ctx, const std::string& name,
                      const deskdiff::Sample& sample) {
    deskdiff::write_pgm(ctx.path(name), sample.data.data(), sample.shape.h,
                        sample.shape.w, -1.0f, 1.0f);
    ctx.manifest.add(ctx.cfg.out_dir, name);
}

void write_mask_pgms(CliContext& ctx, const deskdiff::EditMask& mask) {
    deskdiff::write_pgm(ctx.path("mask_soft.pgm"), mask.soft.data(), mask.h, mask.w,
                        0.0f, 1.0f);
    ctx.manifest.add(ctx.cfg.out_dir, "mask_soft.pgm");
    std::vector<float> binary(mask.binary.begin(), mask.binary.end());
    deskdiff::write_pgm(ctx.path("mask_binary.pgm"), binary.data(), mask.h, mask.w,
                        0.0f, 1.0f);
    ctx.manifest.add(ctx.cfg.out_dir, "mask_binary.pgm");
}

void write_json_artifact(CliContext& ctx, const std::string& name, const ordered_json& j) {
    deskdiff::write_text_file(ctx.path(name), j.dump(2) + "\n");
    ctx.manifest.add(ctx.cfg.out_dir, name);
}

void write_csv_artifact(CliContext& ctx, const std::string& name,
                        const deskdiff::CsvTable& table) {
    deskdiff::write_csv(ctx.path(name), table);
    ctx.manifest.add(ctx.cfg.out_dir, name);
}

void write_svg_artifact(CliContext& ctx, const std::string& name,
                        const deskdiff::SvgPlotSpec& plot) {
    deskdiff::write_svg_plot(ctx.path(name), plot);
    ctx.manifest.add(ctx.cfg.out_dir, name);
}

double distance_to_input(const deskdiff::Sample& a, const deskdiff::Sample& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(a.data.size()));
}

// ---------------------------------------------------------------- commands

void cmd_dataset(CliContext& ctx) {
    if (ctx.cfg.dataset.size <= 0)
        throw deskdiff::ConfigError("config: 'dataset.size' must be positive");
    open_out_dir(ctx);
    const std::vector<deskdiff::Sample> samples = deskdiff::generate(ctx.cfg.dataset);
    deskdiff::save_dataset(ctx.path("dataset"), ctx.cfg.dataset, samples);
    ctx.manifest.add(ctx.cfg.out_dir, "dataset.json");
    ctx.manifest.add(ctx.cfg.out_dir, "dataset.bin");

    if (ctx.cfg.dataset.family == deskdiff::DatasetFamily::kShapes) {
        const int n_previews = std::min<int>(8, static_cast<int>(samples.size()));
        for (int i = 0; i < n_previews; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "sample_%02d.pgm", i);
            write_sample_pgm(ctx, name, samples[i]);
        }
    } else {
        deskdiff::SvgPlotSpec plot;
        plot.title = "2-D dataset";
        plot.x_label = "x0";
        plot.y_label = "x1";
        plot.series.resize(static_cast<std::size_t>(ctx.cfg.dataset.classes));
        for (int c = 0; c < ctx.cfg.dataset.classes; ++c) {
            plot.series[c].label = "class " + std::to_string(c);
            plot.series[c].draw_line = false;
        }
        for (const deskdiff::Sample& s : samples) {
            plot.series[s.label].x.push_back(s.data[0]);
            plot.series[s.label].y.push_back(s.data[1]);
        }
        write_svg_artifact(ctx, "points.svg", plot);
    }
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "dataset: wrote " << samples.size() << " "
              << deskdiff::to_string(ctx.cfg.dataset.family) << " samples to "
              << ctx.cfg.out_dir << "\n";
}

void cmd_train(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::DataShape shape = data.spec.shape();

    deskdiff::Rng init_rng(deskdiff::derive_seed(ctx.cfg.denoiser.train.seed, kInitTag));
    deskdiff::Denoiser model = deskdiff::make_denoiser<float>(
        shape.size(), data.spec.classes, ctx.cfg.denoiser.width, ctx.cfg.denoiser.depth,
        init_rng);
    const deskdiff::TrainReport report =
        deskdiff::train_denoiser(model, sched, data.samples, ctx.cfg.denoiser.train);

    deskdiff::save_denoiser(ctx.path("denoiser.ckpt"), model);
    ctx.manifest.add(ctx.cfg.out_dir, "denoiser.ckpt");
    deskdiff::CsvTable loss;
    loss.header = {"step", "loss"};
    for (const auto& [step, value] : report.loss_log)
        loss.add_row({std::to_string(step), deskdiff::format_double(value)});
    write_csv_artifact(ctx, "train_loss.csv", loss);
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "train: " << report.steps_run << " steps, loss "
              << deskdiff::format_double(report.initial_loss) << " -> "
              << deskdiff::format_double(report.final_loss) << "\n";
}

void cmd_train_classifier(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    deskdiff::ClassifierTrainConfig ccfg;
    ccfg.steps = ctx.cfg.classifier.steps;
    ccfg.batch = ctx.cfg.classifier.batch;
    ccfg.lr = ctx.cfg.classifier.lr;
    ccfg.holdout_fraction = ctx.cfg.classifier.holdout_fraction;
    ccfg.width = ctx.cfg.classifier.width;
    ccfg.depth = ctx.cfg.classifier.depth;
    ccfg.seed = ctx.cfg.seed;

    const deskdiff::Classifier clf = deskdiff::train_classifier(data.samples, ccfg);
    deskdiff::save_classifier(ctx.path("classifier.ckpt"), clf);
    ctx.manifest.add(ctx.cfg.out_dir, "classifier.ckpt");
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "train-classifier: held-out accuracy "
              << deskdiff::format_double(clf.held_out_accuracy) << "\n";
    if (clf.held_out_accuracy < 0.95)
        throw deskdiff::GateError("classifier held-out accuracy " +
                                      deskdiff::format_double(clf.held_out_accuracy) +
                                      " below the 0.95 gate",
                                  "accuracy-gate");
}

deskdiff::EditRequest build_edit_request(const CliContext& ctx,
                                         const deskdiff::LoadedDataset& data) {
    const int idx = ctx.cfg.edit.input_index;
    if (idx < 0 || idx >= static_cast<int>(data.samples.size()))
        throw deskdiff::ConfigError("config: 'edit.input_index' out of range");
    if (ctx.cfg.edit.query < 0 || ctx.cfg.edit.query >= data.spec.classes)
        throw deskdiff::ConfigError("config: 'edit.query' out of range");
    deskdiff::EditRequest req;
    req.input = data.samples[idx];
    req.query = deskdiff::Condition::of(ctx.cfg.edit.query);
    req.encoding_ratio = ctx.cfg.edit.r;
    req.guidance = ctx.cfg.edit.guidance;
    req.n_steps = ctx.cfg.edit.n_steps;
    req.mask = ctx.cfg.mask;
    req.method = deskdiff::edit_method_from_string(ctx.cfg.edit.method);
    req.mask_operator = deskdiff::mask_operator_from_string(ctx.cfg.edit.mask_operator);
    req.seed = ctx.cfg.seed;
    return req;
}

void cmd_edit(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);
    const deskdiff::EditRequest req = build_edit_request(ctx, data);
    const deskdiff::EditResult res = deskdiff::edit(model, sched, req);

    write_sample_pgm(ctx, "input.pgm", req.input);
    write_sample_pgm(ctx, "output.pgm", res.output);
    if (res.mask) write_mask_pgms(ctx, *res.mask);

    ordered_json sidecar;
    sidecar["method"] = deskdiff::to_string(req.method);
    sidecar["mask_operator"] = deskdiff::to_string(req.mask_operator);
    sidecar["r"] = req.encoding_ratio;
    sidecar["guidance"] = req.guidance;
    sidecar["n_steps"] = req.n_steps;
    sidecar["seed"] = req.seed;
    sidecar["input_index"] = ctx.cfg.edit.input_index;
    sidecar["source_class"] = req.input.label;
    sidecar["query"] = ctx.cfg.edit.query;
    sidecar["distance"] = distance_to_input(res.output, req.input);
    sidecar["encode_fingerprint"] = res.encode_fingerprint;
    if (res.mask) {
        sidecar["mask"] = {{"area_fraction", res.mask->area_fraction()},
                           {"degenerate", res.mask->degenerate},
                           {"degenerate_reason", res.mask->degenerate_reason}};
    }
    if (!ctx.cfg.paths.classifier.empty()) {
        const deskdiff::Classifier clf = load_clf(ctx);
        const std::vector<double> probs =
            deskdiff::classifier_probs(clf, res.output.data.data());
        const int argmax = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        sidecar["classifier"] = {{"query_prob", probs[ctx.cfg.edit.query]},
                                 {"argmax", argmax}};
    }
    write_json_artifact(ctx, "edit.json", sidecar);
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "edit: " << deskdiff::to_string(req.method) << " r="
              << deskdiff::format_double(req.encoding_ratio) << " distance="
              << deskdiff::format_double(sidecar["distance"].get<double>()) << " ("
              << deskdiff::format_double(res.timing_ms) << " ms)\n";
}

void cmd_mask(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);
    const int idx = ctx.cfg.edit.input_index;
    if (idx < 0 || idx >= static_cast<int>(data.samples.size()))
        throw deskdiff::ConfigError("config: 'edit.input_index' out of range");

    const deskdiff::EditMask mask = deskdiff::compute_mask(
        model, sched, data.samples[idx], deskdiff::Condition::of(ctx.cfg.edit.query),
        ctx.cfg.mask, ctx.cfg.seed);
    write_sample_pgm(ctx, "input.pgm", data.samples[idx]);
    write_mask_pgms(ctx, mask);

    ordered_json sidecar;
    sidecar["input_index"] = idx;
    sidecar["source_class"] = data.samples[idx].label;
    sidecar["query"] = ctx.cfg.edit.query;
    sidecar["seed"] = ctx.cfg.seed;
    sidecar["area_fraction"] = mask.area_fraction();
    sidecar["degenerate"] = mask.degenerate;
    sidecar["degenerate_reason"] = mask.degenerate_reason;
    write_json_artifact(ctx, "mask.json", sidecar);
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "mask: area=" << deskdiff::format_double(mask.area_fraction())
              << (mask.degenerate ? " (degenerate)" : "") << "\n";
}

deskdiff::SweepConfig build_sweep_config(const CliContext& ctx, int n_pairs) {
    deskdiff::SweepConfig scfg;
    scfg.n_pairs = n_pairs;
    scfg.guidance = ctx.cfg.edit.guidance;
    scfg.n_steps = ctx.cfg.edit.n_steps;
    scfg.mask = ctx.cfg.mask;
    scfg.mask_operator = deskdiff::mask_operator_from_string(ctx.cfg.edit.mask_operator);
    scfg.seed = ctx.cfg.seed;
    scfg.jobs = ctx.jobs;
    return scfg;
}

deskdiff::CsvTable sweep_csv_header(bool with_ablation) {
    deskdiff::CsvTable table;
    if (with_ablation) table.header = {"kind", "value"};
    table.header.insert(table.header.end(),
                        {"method", "r", "n", "distance", "distance_se", "match",
                         "match_se", "mask_area"});
    return table;
}

void append_sweep_rows(deskdiff::CsvTable& table, const deskdiff::SweepResult& result,
                       const std::vector<std::string>& prefix) {
    for (const deskdiff::TradeoffPoint& p : result.points) {
        std::vector<std::string> row = prefix;
        row.insert(row.end(),
                   {deskdiff::to_string(result.method), deskdiff::format_double(p.r),
                    std::to_string(p.n), deskdiff::format_double(p.distance),
                    deskdiff::format_double(p.distance_se), deskdiff::format_double(p.match),
                    deskdiff::format_double(p.match_se),
                    deskdiff::format_double(p.mask_area)});
        table.add_row(std::move(row));
    }
}

deskdiff::SvgSeries curve_series(const std::string& label,
                                 const std::vector<deskdiff::TradeoffPoint>& points,
                                 double deskdiff::TradeoffPoint::*y,
                                 double deskdiff::TradeoffPoint::*se) {
    deskdiff::SvgSeries s;
    s.label = label;
    for (const deskdiff::TradeoffPoint& p : points) {
        s.x.push_back(p.r);
        s.y.push_back(p.*y);
        if (se != nullptr) s.y_err.push_back(p.*se);
    }
    return s;
}

void cmd_sweep(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);
    const deskdiff::Classifier clf = load_clf(ctx);
    if (ctx.cfg.sweep.methods.empty())
        throw deskdiff::ConfigError("config: 'sweep.methods' must not be empty");
    const deskdiff::SweepConfig scfg = build_sweep_config(ctx, ctx.cfg.sweep.n_pairs);

    deskdiff::CsvTable table = sweep_csv_header(false);
    deskdiff::SvgPlotSpec dist_plot, match_plot, tradeoff_plot;
    dist_plot.title = "distance to input vs encoding ratio";
    dist_plot.x_label = "r";
    dist_plot.y_label = "distance";
    match_plot.title = "query match vs encoding ratio";
    match_plot.x_label = "r";
    match_plot.y_label = "match";
    tradeoff_plot.title = "edit trade-off";
    tradeoff_plot.x_label = "match";
    tradeoff_plot.y_label = "distance";

    for (const std::string& name : ctx.cfg.sweep.methods) {
        const deskdiff::EditMethod method = deskdiff::edit_method_from_string(name);
        const deskdiff::SweepResult result = deskdiff::sweep(
            model, sched, clf, data.samples, method, ctx.cfg.sweep.r_grid, scfg);
        append_sweep_rows(table, result, {});
        dist_plot.series.push_back(curve_series(name, result.points,
                                                &deskdiff::TradeoffPoint::distance,
                                                &deskdiff::TradeoffPoint::distance_se));
        match_plot.series.push_back(curve_series(name, result.points,
                                                 &deskdiff::TradeoffPoint::match,
                                                 &deskdiff::TradeoffPoint::match_se));
        deskdiff::SvgSeries t;
        t.label = name;
        for (const deskdiff::TradeoffPoint& p : result.points) {
            t.x.push_back(p.match);
            t.y.push_back(p.distance);
        }
        tradeoff_plot.series.push_back(std::move(t));
        std::cout << "sweep: " << name << " done (" << result.points.size()
                  << " ratios)\n";
    }
    write_csv_artifact(ctx, "sweep.csv", table);
    write_svg_artifact(ctx, "sweep_distance.svg", dist_plot);
    write_svg_artifact(ctx, "sweep_match.svg", match_plot);
    write_svg_artifact(ctx, "sweep_tradeoff.svg", tradeoff_plot);
    ctx.manifest.write(ctx.cfg.out_dir);
}

void cmd_ablation(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);
    const deskdiff::Classifier clf = load_clf(ctx);
    const deskdiff::AblationKind kind =
        deskdiff::ablation_kind_from_string(ctx.cfg.ablation.kind);
    const deskdiff::SweepConfig scfg = build_sweep_config(ctx, ctx.cfg.ablation.n_pairs);

    const std::vector<deskdiff::AblationCurve> curves = deskdiff::ablation_grid(
        model, sched, clf, data.samples, kind, ctx.cfg.ablation.values,
        ctx.cfg.ablation.r_grid, scfg);

    deskdiff::CsvTable table = sweep_csv_header(true);
    deskdiff::SvgPlotSpec match_plot, tradeoff_plot;
    match_plot.title = "query match vs encoding ratio (" + ctx.cfg.ablation.kind + ")";
    match_plot.x_label = "r";
    match_plot.y_label = "match";
    tradeoff_plot.title = "edit trade-off (" + ctx.cfg.ablation.kind + ")";
    tradeoff_plot.x_label = "match";
    tradeoff_plot.y_label = "distance";
    for (const deskdiff::AblationCurve& curve : curves) {
        const std::string label =
            ctx.cfg.ablation.kind + "=" + deskdiff::format_double(curve.value);
        append_sweep_rows(table, curve.result,
                          {ctx.cfg.ablation.kind, deskdiff::format_double(curve.value)});
        match_plot.series.push_back(curve_series(label, curve.result.points,
                                                 &deskdiff::TradeoffPoint::match,
                                                 &deskdiff::TradeoffPoint::match_se));
        deskdiff::SvgSeries t;
        t.label = label;
        for (const deskdiff::TradeoffPoint& p : curve.result.points) {
            t.x.push_back(p.match);
            t.y.push_back(p.distance);
        }
        tradeoff_plot.series.push_back(std::move(t));
    }
    write_csv_artifact(ctx, "ablation.csv", table);
    write_svg_artifact(ctx, "ablation_match.svg", match_plot);
    write_svg_artifact(ctx, "ablation_tradeoff.svg", tradeoff_plot);
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "ablation: " << ctx.cfg.ablation.kind << " over "
              << curves.size() << " values\n";
}

void cmd_bounds(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::LoadedDataset data = load_data(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);

    const deskdiff::BoundConstants constants = deskdiff::estimate_constants(
        model, sched, data.samples, ctx.cfg.bounds.n_samples, ctx.cfg.bounds.t_grid,
        ctx.cfg.seed);
    const std::optional<double> crossover =
        deskdiff::bounds_crossover_tau(constants.C, constants.K1, constants.K2);
    const deskdiff::BoundCurve curve = deskdiff::empirical_curve(
        model, sched, data.samples, constants, ctx.cfg.bounds.r_grid, ctx.cfg.bounds.n_mc,
        ctx.cfg.bounds.n_steps, deskdiff::derive_seed(ctx.cfg.seed, kMcTag), ctx.jobs);

    ordered_json cj;
    cj["C"] = constants.C;
    cj["K1"] = constants.K1;
    cj["K2"] = constants.K2;
    cj["n_samples"] = constants.n_samples;
    cj["t_grid"] = constants.t_grid;
    cj["k1_pairs"] = constants.k1_pairs;
    cj["k1_power_points"] = constants.k1_power_points;
    cj["note"] = constants.note;
    cj["crossover_tau"] = crossover ? ordered_json(*crossover) : ordered_json(nullptr);
    write_json_artifact(ctx, "constants.json", cj);

    deskdiff::CsvTable table;
    table.header = {"r",           "tau",          "bound_sdedit", "bound_diffedit",
                    "emp_sdedit",  "emp_encdec",   "se_sdedit",    "se_encdec"};
    for (const deskdiff::BoundCurvePoint& p : curve.points)
        table.add_row({deskdiff::format_double(p.r), deskdiff::format_double(p.tau),
                       deskdiff::format_double(p.bound_sdedit),
                       deskdiff::format_double(p.bound_diffedit),
                       deskdiff::format_double(p.emp_sdedit),
                       deskdiff::format_double(p.emp_encdec),
                       deskdiff::format_double(p.se_sdedit),
                       deskdiff::format_double(p.se_encdec)});
    write_csv_artifact(ctx, "bounds.csv", table);

    deskdiff::SvgPlotSpec plot;
    plot.title = "edit-distance bounds vs tau";
    plot.x_label = "tau";
    plot.y_label = "distance";
    plot.log_y = true;
    deskdiff::SvgSeries b1{"stochastic bound"}, b2{"deterministic bound"},
        e1{"stochastic empirical"}, e2{"deterministic empirical"};
    e1.draw_line = false;
    e2.draw_line = false;
    for (const deskdiff::BoundCurvePoint& p : curve.points) {
        b1.x.push_back(p.tau);
        b1.y.push_back(p.bound_sdedit);
        b2.x.push_back(p.tau);
        b2.y.push_back(p.bound_diffedit);
        e1.x.push_back(p.tau);
        e1.y.push_back(p.emp_sdedit);
        e1.y_err.push_back(p.se_sdedit);
        e2.x.push_back(p.tau);
        e2.y.push_back(p.emp_encdec);
        e2.y_err.push_back(p.se_encdec);
    }
    plot.series = {b1, b2, e1, e2};
    if (crossover && !curve.points.empty() && *crossover <= curve.points.back().tau)
        plot.ref_lines.push_back({true, *crossover, "crossover"});
    write_svg_artifact(ctx, "bounds.svg", plot);
    ctx.manifest.write(ctx.cfg.out_dir);
    std::cout << "bounds: C=" << deskdiff::format_double(constants.C)
              << " K1=" << deskdiff::format_double(constants.K1)
              << " K2=" << deskdiff::format_double(constants.K2) << " crossover="
              << (crossover ? deskdiff::format_double(*crossover) : std::string("none"))
              << "\n";
}

void cmd_ot(CliContext& ctx) {
    open_out_dir(ctx);
    const deskdiff::NoiseSchedule sched = make_schedule(ctx.cfg);
    const deskdiff::Denoiser model = load_model(ctx, sched);
    if (ctx.cfg.ot.replicates <= 0)
        throw deskdiff::ConfigError("config: 'ot.replicates' must be positive");

    deskdiff::CsvTable table;
    table.header = {"r", "replicate", "n_points", "encoder_cost", "encoder_se",
                    "ot_cost", "ratio"};
    deskdiff::SvgPlotSpec plot;
    plot.title = "encoder transport defect";
    plot.x_label = "r";
    plot.y_label = "encoder cost / OT cost";
    deskdiff::SvgSeries ratio_series{"mean ratio"};
    for (std::size_t ri = 0; ri < ctx.cfg.ot.r_values.size(); ++ri) {
        const double r = ctx.cfg.ot.r_values[ri];
        std::vector<double> ratios;
        for (int rep = 0; rep < ctx.cfg.ot.replicates; ++rep) {
            const deskdiff::OtReport report = deskdiff::ot_defect(
                model, sched, ctx.cfg.dataset, r, ctx.cfg.ot.n_points,
                ctx.cfg.ot.n_steps,
                deskdiff::derive_seed(ctx.cfg.seed, static_cast<std::uint64_t>(ri),
                                      static_cast<std::uint64_t>(rep)));
            table.add_row({deskdiff::format_double(r), std::to_string(rep),
                           std::to_string(report.n_points),
                           deskdiff::format_double(report.encoder_cost),
                           deskdiff::format_double(report.encoder_se),
                           deskdiff::format_double(report.ot_cost),
                           deskdiff::format_double(report.ratio)});
            ratios.push_back(report.ratio);
        }
        ratio_series.x.push_back(r);
        ratio_series.y.push_back(deskdiff::mean(ratios));
        ratio_series.y_err.push_back(
            ratios.size() > 1 ? deskdiff::standard_error(ratios) : 0.0);
        std::cout << "ot: r=" << deskdiff::format_double(r) << " mean ratio "
                  << deskdiff::format_double(ratio_series.y.back()) << "\n";
    }
    plot.series.push_back(std::move(ratio_series));
    plot.ref_lines.push_back({false, 1.0, "OT parity"});
    write_csv_artifact(ctx, "ot.csv", table);
    write_svg_artifact(ctx, "ot.svg", plot);
    ctx.manifest.write(ctx.cfg.out_dir);
}

void cmd_verify(CliContext& ctx) {
    const deskdiff::VerifyReport report = deskdiff::verify_manifest(ctx.cfg.out_dir);
    ordered_json j;
    j["checked"] = report.checked;
    j["mismatched"] = report.mismatched;
    j["missing"] = report.missing;
    std::cout << j.dump(2) << "\n";
    if (!report.ok())
        throw deskdiff::GateError("artifact verification failed in " + ctx.cfg.out_dir,
                                  "verify");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale diffusion editing toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_value = 0;
    int jobs = 1;
    app.add_option("--config", config_path, "JSON run configuration");
    CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the top-level seed");
    app.add_option("--out", out_override, "override the output directory");
    app.add_option("--jobs", jobs, "worker thread cap")->check(CLI::PositiveNumber);

    struct Command {
        std::string name;
        std::string help;
        void (*fn)(CliContext&);
    };
    const std::vector<Command> commands = {
        {"dataset", "generate and persist a synthetic dataset", cmd_dataset},
        {"train", "train the noise-prediction model", cmd_train},
        {"train-classifier", "train the evaluation classifier", cmd_train_classifier},
        {"edit", "run one edit and write images plus a JSON sidecar", cmd_edit},
        {"mask", "infer an edit mask for one input", cmd_mask},
        {"sweep", "distance/match trade-off curves over the encoding ratio", cmd_sweep},
        {"ablation", "sweep grids over threshold, mask noise, or guidance", cmd_ablation},
        {"bounds", "estimate constants and check the edit-distance bounds", cmd_bounds},
        {"ot", "measure the encoder's optimal-transport defect on 2-D data", cmd_ot},
        {"verify", "re-hash the artifacts listed in a manifest", cmd_verify},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help);

    const auto emit_error = [](const std::string& kind, const std::string& message) {
        ordered_json j;
        j["error"] = {{"kind", kind}, {"message", message}};
        std::cerr << j.dump() << "\n";
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return deskdiff::kExitUsage;
    }

    try {
        CliContext ctx;
        std::optional<std::uint64_t> seed_override;
        if (seed_opt->count() > 0) seed_override = seed_value;
        ctx.cfg = config_path.empty()
                      ? deskdiff::parse_run_config("{}", seed_override)
                      : deskdiff::load_run_config(config_path, seed_override);
        if (!out_override.empty()) ctx.cfg.out_dir = out_override;
        ctx.jobs = jobs;

        for (const auto& c : commands)
            if (app.get_subcommand(c.name)->parsed()) {
                c.fn(ctx);
                return deskdiff::kExitOk;
            }
        emit_error("usage", "no command selected");
        return deskdiff::kExitUsage;
    } catch (const deskdiff::Error& e) {
        emit_error(e.kind(), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return deskdiff::kExitNumeric;
    }
}
