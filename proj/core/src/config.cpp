// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/config.hpp"

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "deskdiff/errors.hpp"
#include "deskdiff/io.hpp"

namespace deskdiff {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("config: unknown key '" + path + key + "'");
    }
}

const ordered_json* object_at(const ordered_json& j, const char* key,
                              const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) return nullptr;
    if (!it->is_object())
        throw ConfigError("config: '" + path + key + "' must be an object");
    return &*it;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, const std::string& path, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const ordered_json::exception&) {
        throw ConfigError("config: bad value for '" + path + key + "'");
    }
}

void parse_schedule(const ordered_json& j, ScheduleSection& out) {
    reject_unknown_keys(j, "schedule.", {"steps", "beta_min", "beta_max"});
    read_field(j, "steps", "schedule.", out.steps);
    read_field(j, "beta_min", "schedule.", out.beta_min);
    read_field(j, "beta_max", "schedule.", out.beta_max);
}

void parse_dataset(const ordered_json& j, DatasetSpec& out, bool& seed_given) {
    reject_unknown_keys(j, "dataset.",
                        {"family", "classes", "size", "seed", "background"});
    std::string family = to_string(out.family);
    read_field(j, "family", "dataset.", family);
    out.family = dataset_family_from_string(family);
    read_field(j, "classes", "dataset.", out.classes);
    read_field(j, "size", "dataset.", out.size);
    if (j.contains("seed")) {
        seed_given = true;
        read_field(j, "seed", "dataset.", out.seed);
    }
    if (const ordered_json* bg = object_at(j, "background", "dataset.")) {
        reject_unknown_keys(*bg, "dataset.background.",
                            {"base_min", "base_max", "gradient_max", "noise_amp"});
        read_field(*bg, "base_min", "dataset.background.", out.background.base_min);
        read_field(*bg, "base_max", "dataset.background.", out.background.base_max);
        read_field(*bg, "gradient_max", "dataset.background.", out.background.gradient_max);
        read_field(*bg, "noise_amp", "dataset.background.", out.background.noise_amp);
    }
}

void parse_denoiser(const ordered_json& j, DenoiserSection& out, bool& seed_given) {
    reject_unknown_keys(j, "denoiser.", {"width", "depth", "train"});
    read_field(j, "width", "denoiser.", out.width);
    read_field(j, "depth", "denoiser.", out.depth);
    if (const ordered_json* t = object_at(j, "train", "denoiser.")) {
        reject_unknown_keys(*t, "denoiser.train.",
                            {"steps", "batch", "lr", "cond_dropout", "seed", "log_every"});
        read_field(*t, "steps", "denoiser.train.", out.train.steps);
        read_field(*t, "batch", "denoiser.train.", out.train.batch);
        read_field(*t, "lr", "denoiser.train.", out.train.lr);
        read_field(*t, "cond_dropout", "denoiser.train.", out.train.cond_dropout);
        read_field(*t, "log_every", "denoiser.train.", out.train.log_every);
        if (t->contains("seed")) {
            seed_given = true;
            read_field(*t, "seed", "denoiser.train.", out.train.seed);
        }
    }
}

void parse_classifier(const ordered_json& j, ClassifierSection& out) {
    reject_unknown_keys(j, "classifier.",
                        {"width", "depth", "steps", "batch", "lr", "holdout_fraction"});
    read_field(j, "width", "classifier.", out.width);
    read_field(j, "depth", "classifier.", out.depth);
    read_field(j, "steps", "classifier.", out.steps);
    read_field(j, "batch", "classifier.", out.batch);
    read_field(j, "lr", "classifier.", out.lr);
    read_field(j, "holdout_fraction", "classifier.", out.holdout_fraction);
}

void parse_mask(const ordered_json& j, MaskConfig& out) {
    reject_unknown_keys(j, "mask.",
                        {"n_noises", "noise_strength", "clip_percentile", "threshold",
                         "reference", "smoothing"});
    read_field(j, "n_noises", "mask.", out.n_noises);
    read_field(j, "noise_strength", "mask.", out.noise_strength);
    read_field(j, "clip_percentile", "mask.", out.clip_percentile);
    read_field(j, "threshold", "mask.", out.threshold);
    read_field(j, "smoothing", "mask.", out.smoothing);
    const auto it = j.find("reference");
    if (it != j.end()) {
        if (it->is_null()) {
            out.reference = Condition::none();
        } else if (it->is_number_integer()) {
            out.reference = Condition::of(it->get<int>());
        } else {
            throw ConfigError("config: 'mask.reference' must be null or a class index");
        }
    }
}

void parse_edit(const ordered_json& j, EditSection& out) {
    reject_unknown_keys(j, "edit.",
                        {"guidance", "n_steps", "r", "method", "mask_operator",
                         "input_index", "query"});
    read_field(j, "guidance", "edit.", out.guidance);
    read_field(j, "n_steps", "edit.", out.n_steps);
    read_field(j, "r", "edit.", out.r);
    read_field(j, "method", "edit.", out.method);
    read_field(j, "mask_operator", "edit.", out.mask_operator);
    read_field(j, "input_index", "edit.", out.input_index);
    read_field(j, "query", "edit.", out.query);
}

void parse_sweep(const ordered_json& j, SweepSection& out) {
    reject_unknown_keys(j, "sweep.", {"r_grid", "n_pairs", "methods"});
    read_field(j, "r_grid", "sweep.", out.r_grid);
    read_field(j, "n_pairs", "sweep.", out.n_pairs);
    read_field(j, "methods", "sweep.", out.methods);
}

void parse_ablation(const ordered_json& j, AblationSection& out) {
    reject_unknown_keys(j, "ablation.", {"kind", "values", "r_grid", "n_pairs"});
    read_field(j, "kind", "ablation.", out.kind);
    read_field(j, "values", "ablation.", out.values);
    read_field(j, "r_grid", "ablation.", out.r_grid);
    read_field(j, "n_pairs", "ablation.", out.n_pairs);
}

void parse_bounds(const ordered_json& j, BoundsSection& out) {
    reject_unknown_keys(j, "bounds.",
                        {"t_grid", "r_grid", "n_samples", "n_mc", "n_steps"});
    read_field(j, "t_grid", "bounds.", out.t_grid);
    read_field(j, "r_grid", "bounds.", out.r_grid);
    read_field(j, "n_samples", "bounds.", out.n_samples);
    read_field(j, "n_mc", "bounds.", out.n_mc);
    read_field(j, "n_steps", "bounds.", out.n_steps);
}

void parse_ot(const ordered_json& j, OtSection& out) {
    reject_unknown_keys(j, "ot.", {"r_values", "n_points", "replicates", "n_steps"});
    read_field(j, "r_values", "ot.", out.r_values);
    read_field(j, "n_points", "ot.", out.n_points);
    read_field(j, "replicates", "ot.", out.replicates);
    read_field(j, "n_steps", "ot.", out.n_steps);
}

void parse_paths(const ordered_json& j, PathsSection& out) {
    reject_unknown_keys(j, "paths.", {"dataset", "denoiser", "classifier"});
    read_field(j, "dataset", "paths.", out.dataset);
    read_field(j, "denoiser", "paths.", out.denoiser);
    read_field(j, "classifier", "paths.", out.classifier);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           std::optional<std::uint64_t> seed_override) {
    ordered_json j = ordered_json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: invalid JSON");
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j, "",
                        {"seed", "out_dir", "schedule", "dataset", "denoiser",
                         "classifier", "mask", "edit", "sweep", "ablation", "bounds",
                         "ot", "paths"});

    RunConfig cfg;
    read_field(j, "seed", "", cfg.seed);
    if (seed_override) cfg.seed = *seed_override;
    read_field(j, "out_dir", "", cfg.out_dir);

    bool dataset_seed_given = false;
    bool train_seed_given = false;
    if (const ordered_json* s = object_at(j, "schedule", "")) parse_schedule(*s, cfg.schedule);
    if (const ordered_json* s = object_at(j, "dataset", ""))
        parse_dataset(*s, cfg.dataset, dataset_seed_given);
    if (const ordered_json* s = object_at(j, "denoiser", ""))
        parse_denoiser(*s, cfg.denoiser, train_seed_given);
    if (const ordered_json* s = object_at(j, "classifier", ""))
        parse_classifier(*s, cfg.classifier);
    if (const ordered_json* s = object_at(j, "mask", "")) parse_mask(*s, cfg.mask);
    if (const ordered_json* s = object_at(j, "edit", "")) parse_edit(*s, cfg.edit);
    if (const ordered_json* s = object_at(j, "sweep", "")) parse_sweep(*s, cfg.sweep);
    if (const ordered_json* s = object_at(j, "ablation", "")) parse_ablation(*s, cfg.ablation);
    if (const ordered_json* s = object_at(j, "bounds", "")) parse_bounds(*s, cfg.bounds);
    if (const ordered_json* s = object_at(j, "ot", "")) parse_ot(*s, cfg.ot);
    if (const ordered_json* s = object_at(j, "paths", "")) parse_paths(*s, cfg.paths);

    if (!dataset_seed_given) cfg.dataset.seed = cfg.seed;
    if (!train_seed_given) cfg.denoiser.train.seed = cfg.seed;
    if (cfg.denoiser.width <= 0)
        cfg.denoiser.width = cfg.dataset.family == DatasetFamily::kShapes ? 256 : 128;
    return cfg;
}

RunConfig load_run_config(const std::string& path,
                          std::optional<std::uint64_t> seed_override) {
    return parse_run_config(read_text_file(path), seed_override);
}

std::string serialize_run_config(const RunConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["schedule"] = {{"steps", cfg.schedule.steps},
                     {"beta_min", cfg.schedule.beta_min},
                     {"beta_max", cfg.schedule.beta_max}};
    j["dataset"] = {{"family", to_string(cfg.dataset.family)},
                    {"classes", cfg.dataset.classes},
                    {"size", cfg.dataset.size},
                    {"seed", cfg.dataset.seed},
                    {"background",
                     {{"base_min", cfg.dataset.background.base_min},
                      {"base_max", cfg.dataset.background.base_max},
                      {"gradient_max", cfg.dataset.background.gradient_max},
                      {"noise_amp", cfg.dataset.background.noise_amp}}}};
    j["denoiser"] = {{"width", cfg.denoiser.width},
                     {"depth", cfg.denoiser.depth},
                     {"train",
                      {{"steps", cfg.denoiser.train.steps},
                       {"batch", cfg.denoiser.train.batch},
                       {"lr", cfg.denoiser.train.lr},
                       {"cond_dropout", cfg.denoiser.train.cond_dropout},
                       {"seed", cfg.denoiser.train.seed},
                       {"log_every", cfg.denoiser.train.log_every}}}};
    j["classifier"] = {{"width", cfg.classifier.width},
                       {"depth", cfg.classifier.depth},
                       {"steps", cfg.classifier.steps},
                       {"batch", cfg.classifier.batch},
                       {"lr", cfg.classifier.lr},
                       {"holdout_fraction", cfg.classifier.holdout_fraction}};
    j["mask"] = {{"n_noises", cfg.mask.n_noises},
                 {"noise_strength", cfg.mask.noise_strength},
                 {"clip_percentile", cfg.mask.clip_percentile},
                 {"threshold", cfg.mask.threshold},
                 {"reference", cfg.mask.reference.is_null()
                                   ? ordered_json(nullptr)
                                   : ordered_json(cfg.mask.reference.cls)},
                 {"smoothing", cfg.mask.smoothing}};
    j["edit"] = {{"guidance", cfg.edit.guidance},
                 {"n_steps", cfg.edit.n_steps},
                 {"r", cfg.edit.r},
                 {"method", cfg.edit.method},
                 {"mask_operator", cfg.edit.mask_operator},
                 {"input_index", cfg.edit.input_index},
                 {"query", cfg.edit.query}};
    j["sweep"] = {{"r_grid", cfg.sweep.r_grid},
                  {"n_pairs", cfg.sweep.n_pairs},
                  {"methods", cfg.sweep.methods}};
    j["ablation"] = {{"kind", cfg.ablation.kind},
                     {"values", cfg.ablation.values},
                     {"r_grid", cfg.ablation.r_grid},
                     {"n_pairs", cfg.ablation.n_pairs}};
    j["bounds"] = {{"t_grid", cfg.bounds.t_grid},
                   {"r_grid", cfg.bounds.r_grid},
                   {"n_samples", cfg.bounds.n_samples},
                   {"n_mc", cfg.bounds.n_mc},
                   {"n_steps", cfg.bounds.n_steps}};
    j["ot"] = {{"r_values", cfg.ot.r_values},
               {"n_points", cfg.ot.n_points},
               {"replicates", cfg.ot.replicates},
               {"n_steps", cfg.ot.n_steps}};
    j["paths"] = {{"dataset", cfg.paths.dataset},
                  {"denoiser", cfg.paths.denoiser},
                  {"classifier", cfg.paths.classifier}};
    return j.dump(2) + "\n";
}

}  // namespace deskdiff
