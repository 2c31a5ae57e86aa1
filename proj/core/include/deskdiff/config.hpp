// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON file drives every command. Parsing is strict —
// unknown keys anywhere in the document are rejected — and the resolved
// configuration serializes back to deterministic bytes so each artifact
// directory can record exactly what produced it.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/diffedit.hpp"

namespace deskdiff {

struct ScheduleSection {
    int steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;
};

struct DenoiserSection {
    int width = 0;  // 0 = pick by dataset family at parse: 256 shapes, 128 gm2d
    int depth = 3;
    TrainConfig train;  // train.seed is derived from the top-level seed
};

struct ClassifierSection {
    int width = 128;
    int depth = 2;
    int steps = 3000;
    int batch = 128;
    double lr = 1e-3;
    double holdout_fraction = 0.2;
};

struct EditSection {
    double guidance = 5.0;
    int n_steps = 50;
    double r = 0.8;
    std::string method = "diffedit";
    std::string mask_operator = "latent-replace";
    int input_index = 0;
    int query = 0;
};

struct SweepSection {
    std::vector<double> r_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int n_pairs = 100;
    std::vector<std::string> methods = {"diffedit", "encode-decode", "sdedit"};
};

struct AblationSection {
    std::string kind = "guidance";
    std::vector<double> values = {0.0, 1.0, 3.0, 5.0};
    std::vector<double> r_grid = {0.3, 0.5, 0.7, 0.9};
    int n_pairs = 100;
};

struct BoundsSection {
    std::vector<double> t_grid = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> r_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int n_samples = 100;
    int n_mc = 100;
    int n_steps = 100;
};

struct OtSection {
    std::vector<double> r_values = {0.3, 0.5, 0.7};
    int n_points = 500;
    int replicates = 5;
    int n_steps = 100;
};

struct PathsSection {
    std::string dataset;     // stem of a saved dataset (no extension)
    std::string denoiser;    // denoiser checkpoint
    std::string classifier;  // classifier checkpoint
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    ScheduleSection schedule;
    DatasetSpec dataset;
    DenoiserSection denoiser;
    ClassifierSection classifier;
    MaskConfig mask;
    EditSection edit;
    SweepSection sweep;
    AblationSection ablation;
    BoundsSection bounds;
    OtSection ot;
    PathsSection paths;
};

// Strict parse: unknown keys at any nesting level raise ConfigError naming
// the offending path. Absent keys keep their defaults; dataset and training
// seeds default to the top-level seed (after any override is applied).
RunConfig parse_run_config(const std::string& json_text,
                           std::optional<std::uint64_t> seed_override = {});
RunConfig load_run_config(const std::string& path,
                          std::optional<std::uint64_t> seed_override = {});

// Deterministic serialization of the resolved configuration.
std::string serialize_run_config(const RunConfig& config);

}  // namespace deskdiff
