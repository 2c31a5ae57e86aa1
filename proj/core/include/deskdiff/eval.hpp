// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Editing evaluation: a shapes classifier scoring how well outputs match the
// query class, trade-off sweeps of distance vs. match over the encoding
// ratio, matched-level curve comparisons, and ablation grids over mask
// threshold, mask noise strength, and guidance scale.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/diffedit.hpp"
#include "deskdiff/mlp.hpp"
#include "deskdiff/schedule.hpp"

namespace deskdiff {

struct Classifier {
    MlpArch arch;
    std::vector<float> params;
    int n_classes = 0;
    DataShape shape;
    double held_out_accuracy = 0.0;
};

struct ClassifierTrainConfig {
    int steps = 3000;
    int batch = 128;
    double lr = 1e-3;
    double holdout_fraction = 0.2;  // trailing fraction of the dataset
    int width = 128;
    int depth = 2;
    std::uint64_t seed = 0;
};

// Cross-entropy training on the leading split with Gaussian noise
// augmentation (per-sample level drawn uniformly up to 0.4), so probabilities
// remain informative on the slightly off-manifold images editing produces.
// Records clean accuracy on the trailing split. Deterministic given (data,
// config).
Classifier train_classifier(const std::vector<Sample>& data,
                            const ClassifierTrainConfig& cfg);

// Softmax class probabilities for one sample.
std::vector<double> classifier_probs(const Classifier& clf, const float* x);

// Argmax accuracy over a labeled set.
double classifier_accuracy(const Classifier& clf, const std::vector<Sample>& data);

struct TradeoffPoint {
    double r = 0.0;
    int n = 0;
    double distance = 0.0;     // mean per-pixel RMSE to the input
    double distance_se = 0.0;
    double match = 0.0;        // mean classifier probability of the query class
    double match_se = 0.0;
    double mask_area = 0.0;    // mean binary-mask fraction (0 for mask-free methods)
    double accuracy = 0.0;     // argmax == query fraction
    int failures = 0;          // excluded pairs (edit errors), never silent
};

struct SweepConfig {
    int n_pairs = 100;
    double guidance = 5.0;
    int n_steps = 50;
    MaskConfig mask;
    MaskOperator mask_operator = MaskOperator::kLatentReplace;
    std::uint64_t seed = 0;
    int jobs = 1;
};

// Aggregates plus the per-pair raw values needed for paired comparisons:
// pair_distance[ri][k] and pair_match[ri][k] for pair k at r_grid[ri].
struct SweepResult {
    EditMethod method = EditMethod::kDiffedit;
    std::vector<TradeoffPoint> points;
    std::vector<std::vector<double>> pair_distance;
    std::vector<std::vector<double>> pair_match;
};

// Runs edit() for every (pair, r) with per-pair seeds derived from
// config.seed only, so different methods see identical pairs, masks, and
// noise draws. Requires the classifier to clear its accuracy gate.
SweepResult sweep(const Denoiser& model, const NoiseSchedule& sched,
                  const Classifier& clf, const std::vector<Sample>& data,
                  EditMethod method, const std::vector<double>& r_grid,
                  const SweepConfig& cfg);

// Piecewise-linear interpolation of the aggregate curve, parametrized by r:
// returns per-pair distances at the first r where the mean match crosses
// `match_level`, or nullopt if the curve never reaches it.
std::optional<std::vector<double>> pair_distances_at_match(const SweepResult& result,
                                                           double match_level);

// Mean-curve version of the same interpolation.
std::optional<double> distance_at_match(const std::vector<TradeoffPoint>& points,
                                        double match_level);

enum class AblationKind { kThreshold, kMaskNoise, kGuidance };

AblationKind ablation_kind_from_string(const std::string& name);
std::string to_string(AblationKind kind);

struct AblationCurve {
    double value = 0.0;  // the ablated parameter's value
    SweepResult result;
};

// One sweep per ablation value, overriding the corresponding field of the
// base config (mask threshold, mask noise strength, or guidance scale).
std::vector<AblationCurve> ablation_grid(const Denoiser& model, const NoiseSchedule& sched,
                                         const Classifier& clf,
                                         const std::vector<Sample>& data,
                                         AblationKind kind,
                                         const std::vector<double>& values,
                                         const std::vector<double>& r_grid,
                                         const SweepConfig& base_cfg);

}  // namespace deskdiff
