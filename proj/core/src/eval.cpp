// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/eval.hpp"

#include <algorithm>
#include <cmath>

#include "deskdiff/adam.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/parallel.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/stats.hpp"

namespace deskdiff {

namespace {

constexpr double kAccuracyGate = 0.95;
// Upper end of the per-sample noise level drawn during classifier training.
constexpr double kAugmentNoiseMax = 0.4;

void softmax(const float* logits, int n, std::vector<double>& probs) {
    probs.resize(static_cast<std::size_t>(n));
    double max_logit = logits[0];
    for (int i = 1; i < n; ++i) max_logit = std::max(max_logit, static_cast<double>(logits[i]));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        probs[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(logits[i]) - max_logit);
        sum += probs[static_cast<std::size_t>(i)];
    }
    for (double& p : probs) p /= sum;
}

}  // namespace

Classifier train_classifier(const std::vector<Sample>& data,
                            const ClassifierTrainConfig& cfg) {
    if (data.size() < 10) throw ConfigError("classifier: dataset too small");
    if (!(cfg.holdout_fraction > 0.0) || !(cfg.holdout_fraction < 1.0))
        throw ConfigError("classifier: holdout_fraction must lie in (0, 1)");
    const DataShape shape = data.front().shape;
    int n_classes = 0;
    for (const Sample& s : data) {
        if (!(s.shape == shape)) throw ConfigError("classifier: inhomogeneous shapes");
        n_classes = std::max(n_classes, s.label + 1);
    }
    const std::size_t holdout =
        static_cast<std::size_t>(cfg.holdout_fraction * static_cast<double>(data.size()));
    const std::size_t n_train = data.size() - holdout;
    if (n_train == 0 || holdout == 0) throw ConfigError("classifier: degenerate split");

    Classifier clf;
    clf.n_classes = n_classes;
    clf.shape = shape;
    clf.arch = MlpArch{shape.size(), cfg.width, cfg.depth, n_classes};
    {
        Rng init_rng(derive_seed(cfg.seed, 0x696e6974ULL));
        clf.params = mlp_init<float>(clf.arch, init_rng);
    }

    const int d = shape.size();
    MlpWorkspace<float> ws;
    Adam<float> opt;
    opt.lr = cfg.lr;
    std::vector<float> grad(clf.arch.param_count());
    std::vector<float> x(static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(d));
    std::vector<float> logits(static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(n_classes));
    std::vector<float> g_logits(logits.size());
    std::vector<int> labels(static_cast<std::size_t>(cfg.batch));
    std::vector<double> probs;

    for (int step = 0; step < cfg.steps; ++step) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step)));
        for (int b = 0; b < cfg.batch; ++b) {
            const Sample& s = data[rng.uniform_int(n_train)];
            float* row = x.data() + static_cast<std::ptrdiff_t>(b) * d;
            std::copy(s.data.begin(), s.data.end(), row);
            // Gaussian noise augmentation: scores must stay meaningful on
            // denoised edit outputs, which sit off the clean-data manifold.
            const float sigma = static_cast<float>(kAugmentNoiseMax * rng.uniform());
            for (int i = 0; i < d; ++i)
                row[i] += sigma * static_cast<float>(rng.normal());
            labels[static_cast<std::size_t>(b)] = s.label;
        }
        mlp_forward(clf.arch, clf.params.data(), x.data(), cfg.batch, logits.data(), ws);
        // Cross-entropy gradient: softmax minus one-hot, averaged over batch.
        double loss = 0.0;
        for (int b = 0; b < cfg.batch; ++b) {
            const float* row = logits.data() + static_cast<std::size_t>(b) * n_classes;
            softmax(row, n_classes, probs);
            loss -= std::log(std::max(probs[static_cast<std::size_t>(labels[static_cast<std::size_t>(b)])], 1e-30));
            float* grow = g_logits.data() + static_cast<std::size_t>(b) * n_classes;
            for (int c = 0; c < n_classes; ++c) {
                const double target = c == labels[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
                grow[c] = static_cast<float>((probs[static_cast<std::size_t>(c)] - target) /
                                             static_cast<double>(cfg.batch));
            }
        }
        if (!std::isfinite(loss))
            throw NumericError("classifier: non-finite loss at step " + std::to_string(step));
        std::fill(grad.begin(), grad.end(), 0.0f);
        mlp_backward(clf.arch, clf.params.data(), x.data(), cfg.batch, g_logits.data(),
                     grad.data(), static_cast<float*>(nullptr), ws);
        opt.step(clf.params, grad);
    }

    std::vector<Sample> held(data.begin() + static_cast<std::ptrdiff_t>(n_train), data.end());
    clf.held_out_accuracy = classifier_accuracy(clf, held);
    return clf;
}

std::vector<double> classifier_probs(const Classifier& clf, const float* x) {
    MlpWorkspace<float> ws;
    std::vector<float> logits(static_cast<std::size_t>(clf.n_classes));
    mlp_forward(clf.arch, clf.params.data(), x, 1, logits.data(), ws);
    std::vector<double> probs;
    softmax(logits.data(), clf.n_classes, probs);
    return probs;
}

double classifier_accuracy(const Classifier& clf, const std::vector<Sample>& data) {
    if (data.empty()) throw ConfigError("classifier: empty evaluation set");
    std::size_t correct = 0;
    for (const Sample& s : data) {
        const std::vector<double> probs = classifier_probs(clf, s.data.data());
        const int argmax = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (argmax == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

SweepResult sweep(const Denoiser& model, const NoiseSchedule& sched,
                  const Classifier& clf, const std::vector<Sample>& data,
                  EditMethod method, const std::vector<double>& r_grid,
                  const SweepConfig& cfg) {
    if (clf.held_out_accuracy < kAccuracyGate)
        throw GateError("sweep: classifier accuracy below the 95% gate");
    if (cfg.n_pairs < 1) throw ConfigError("sweep: need at least one pair");
    if (r_grid.empty()) throw ConfigError("sweep: empty r grid");
    const std::vector<EditPair> pairs =
        edit_pairs(data, model.n_classes, cfg.n_pairs, derive_seed(cfg.seed, 0x7061697273ULL));
    const int d = model.data_dim;
    const double sqrt_d = std::sqrt(static_cast<double>(d));

    SweepResult result;
    result.method = method;
    result.pair_distance.assign(r_grid.size(), {});
    result.pair_match.assign(r_grid.size(), {});

    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        const double r = r_grid[ri];
        const int n = cfg.n_pairs;
        std::vector<double> dist(static_cast<std::size_t>(n)), match(static_cast<std::size_t>(n)),
            area(static_cast<std::size_t>(n)), correct(static_cast<std::size_t>(n));
        std::vector<char> failed(static_cast<std::size_t>(n), 0);
        parallel_for(n, cfg.jobs, [&](int k) {
            const EditPair& pair = pairs[static_cast<std::size_t>(k)];
            EditRequest req;
            req.input = data[static_cast<std::size_t>(pair.sample_index)];
            req.query = Condition::of(pair.query_class);
            req.encoding_ratio = r;
            req.guidance = cfg.guidance;
            req.n_steps = cfg.n_steps;
            req.mask = cfg.mask;
            req.method = method;
            req.mask_operator = cfg.mask_operator;
            // Seed depends on the pair only: identical masks and noise draws
            // across methods and across r, keeping comparisons paired.
            req.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
            try {
                const EditResult res = edit(model, sched, req);
                double acc = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double diff =
                        static_cast<double>(res.output.data[static_cast<std::size_t>(i)]) -
                        static_cast<double>(req.input.data[static_cast<std::size_t>(i)]);
                    acc += diff * diff;
                }
                dist[static_cast<std::size_t>(k)] = std::sqrt(acc) / sqrt_d;
                const std::vector<double> probs =
                    classifier_probs(clf, res.output.data.data());
                match[static_cast<std::size_t>(k)] = probs[static_cast<std::size_t>(pair.query_class)];
                const int argmax = static_cast<int>(
                    std::max_element(probs.begin(), probs.end()) - probs.begin());
                correct[static_cast<std::size_t>(k)] = argmax == pair.query_class ? 1.0 : 0.0;
                area[static_cast<std::size_t>(k)] =
                    res.mask.has_value() ? res.mask->area_fraction() : 0.0;
            } catch (const Error&) {
                failed[static_cast<std::size_t>(k)] = 1;
            }
        });

        TradeoffPoint p;
        p.r = r;
        std::vector<double> ok_dist, ok_match, ok_area, ok_correct;
        for (int k = 0; k < n; ++k) {
            if (failed[static_cast<std::size_t>(k)]) {
                ++p.failures;
                continue;
            }
            ok_dist.push_back(dist[static_cast<std::size_t>(k)]);
            ok_match.push_back(match[static_cast<std::size_t>(k)]);
            ok_area.push_back(area[static_cast<std::size_t>(k)]);
            ok_correct.push_back(correct[static_cast<std::size_t>(k)]);
        }
        if (ok_dist.empty()) throw NumericError("sweep: every pair failed at one r");
        p.n = static_cast<int>(ok_dist.size());
        p.distance = mean(ok_dist);
        p.distance_se = standard_error(ok_dist);
        p.match = mean(ok_match);
        p.match_se = standard_error(ok_match);
        p.mask_area = mean(ok_area);
        p.accuracy = mean(ok_correct);
        result.points.push_back(p);
        result.pair_distance[ri] = dist;
        result.pair_match[ri] = match;
    }
    return result;
}

namespace {

// First crossing of the aggregate match curve, scanning r upward. Returns
// (segment index, interpolation weight).
std::optional<std::pair<std::size_t, double>> match_crossing(
    const std::vector<TradeoffPoint>& points, double level) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].match >= level) {
            if (i == 0) return std::make_pair(std::size_t{0}, 0.0);
            const double lo = points[i - 1].match;
            const double hi = points[i].match;
            const double w = hi == lo ? 1.0 : (level - lo) / (hi - lo);
            return std::make_pair(i - 1, w);
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::vector<double>> pair_distances_at_match(const SweepResult& result,
                                                           double match_level) {
    const auto cross = match_crossing(result.points, match_level);
    if (!cross.has_value()) return std::nullopt;
    const auto [i, w] = *cross;
    const std::vector<double>& lo = result.pair_distance[i];
    const std::vector<double>& hi =
        result.pair_distance[std::min(i + 1, result.pair_distance.size() - 1)];
    std::vector<double> out(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) out[k] = (1.0 - w) * lo[k] + w * hi[k];
    return out;
}

std::optional<double> distance_at_match(const std::vector<TradeoffPoint>& points,
                                        double match_level) {
    const auto cross = match_crossing(points, match_level);
    if (!cross.has_value()) return std::nullopt;
    const auto [i, w] = *cross;
    const double lo = points[i].distance;
    const double hi = points[std::min(i + 1, points.size() - 1)].distance;
    return (1.0 - w) * lo + w * hi;
}

AblationKind ablation_kind_from_string(const std::string& name) {
    if (name == "threshold") return AblationKind::kThreshold;
    if (name == "mask-noise") return AblationKind::kMaskNoise;
    if (name == "guidance") return AblationKind::kGuidance;
    throw ConfigError("unknown ablation kind: " + name);
}

std::string to_string(AblationKind kind) {
    switch (kind) {
        case AblationKind::kThreshold: return "threshold";
        case AblationKind::kMaskNoise: return "mask-noise";
        case AblationKind::kGuidance: return "guidance";
    }
    throw ConfigError("unknown ablation kind enum");
}

std::vector<AblationCurve> ablation_grid(const Denoiser& model, const NoiseSchedule& sched,
                                         const Classifier& clf,
                                         const std::vector<Sample>& data,
                                         AblationKind kind,
                                         const std::vector<double>& values,
                                         const std::vector<double>& r_grid,
                                         const SweepConfig& base_cfg) {
    if (values.empty()) throw ConfigError("ablation: empty value grid");
    std::vector<AblationCurve> curves;
    for (double v : values) {
        SweepConfig cfg = base_cfg;
        switch (kind) {
            case AblationKind::kThreshold: cfg.mask.threshold = v; break;
            case AblationKind::kMaskNoise: cfg.mask.noise_strength = v; break;
            case AblationKind::kGuidance: cfg.guidance = v; break;
        }
        AblationCurve curve;
        curve.value = v;
        curve.result = sweep(model, sched, clf, data, EditMethod::kDiffedit, r_grid, cfg);
        curves.push_back(std::move(curve));
    }
    return curves;
}

}  // namespace deskdiff
