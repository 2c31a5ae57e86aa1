// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classifier training, the gated trade-off sweep, matched-level curve
// interpolation, and the ablation grid, all on the fast 2-D family.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/eval.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/schedule.hpp"

using namespace deskdiff;

namespace {

struct Bundle {
    NoiseSchedule sched = NoiseSchedule::linear();
    std::vector<Sample> data;
    Denoiser model;
    Classifier clf;
};

const Bundle& bundle() {
    static const Bundle b = [] {
        Bundle out;
        DatasetSpec spec;
        spec.family = DatasetFamily::kGm2d;
        spec.classes = 4;
        spec.size = 1024;
        spec.seed = 15;
        out.data = generate(spec);

        Rng init(derive_seed(33, 0x696e6974ULL));
        out.model = make_denoiser<float>(2, 4, 48, 2, init);
        out.model.schedule_fingerprint = out.sched.fingerprint();
        TrainConfig tc;
        tc.steps = 1500;
        tc.batch = 128;
        tc.lr = 2e-3;
        tc.seed = 33;
        train_denoiser(out.model, out.sched, out.data, tc);

        ClassifierTrainConfig cc;
        cc.steps = 800;
        cc.batch = 128;
        cc.width = 32;
        cc.depth = 1;
        cc.seed = 44;
        out.clf = train_classifier(out.data, cc);
        return out;
    }();
    return b;
}

SweepConfig small_sweep_config() {
    SweepConfig cfg;
    cfg.n_pairs = 8;
    cfg.guidance = 1.0;
    cfg.n_steps = 15;
    cfg.seed = 50;
    cfg.jobs = 1;
    return cfg;
}

}  // namespace

TEST_CASE("classifier separates the 2-D clusters") {
    const Classifier& clf = bundle().clf;
    CHECK(clf.held_out_accuracy >= 0.95);
    CHECK(clf.n_classes == 4);
    CHECK(classifier_accuracy(clf, bundle().data) >= 0.95);
}

TEST_CASE("classifier training is deterministic") {
    ClassifierTrainConfig cc;
    cc.steps = 120;
    cc.batch = 64;
    cc.width = 16;
    cc.depth = 1;
    cc.seed = 9;
    const Classifier a = train_classifier(bundle().data, cc);
    const Classifier b = train_classifier(bundle().data, cc);
    CHECK(a.params == b.params);
    CHECK(a.held_out_accuracy == b.held_out_accuracy);
}

TEST_CASE("classifier probabilities form a distribution") {
    const Classifier& clf = bundle().clf;
    const Sample& s = bundle().data[0];
    const auto probs = classifier_probs(clf, s.data.data());
    REQUIRE(probs.size() == 4);
    double total = 0.0;
    int argmax = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        CHECK(probs[k] > 0.0);
        CHECK(probs[k] < 1.0);
        total += probs[k];
        if (probs[k] > probs[argmax]) argmax = static_cast<int>(k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(argmax == s.label);
}

TEST_CASE("sweep refuses a classifier below its accuracy gate") {
    Classifier weak = bundle().clf;
    weak.held_out_accuracy = 0.5;
    CHECK_THROWS_AS(sweep(bundle().model, bundle().sched, weak, bundle().data,
                          EditMethod::kDiffedit, {0.5}, small_sweep_config()),
                    GateError);
}

TEST_CASE("sweep aggregates per-pair edits") {
    const std::vector<double> r_grid{0.3, 0.8};
    const SweepResult res = sweep(bundle().model, bundle().sched, bundle().clf,
                                  bundle().data, EditMethod::kDiffedit, r_grid,
                                  small_sweep_config());
    CHECK(res.method == EditMethod::kDiffedit);
    REQUIRE(res.points.size() == 2);
    REQUIRE(res.pair_distance.size() == 2);
    REQUIRE(res.pair_match.size() == 2);
    for (std::size_t ri = 0; ri < 2; ++ri) {
        const TradeoffPoint& p = res.points[ri];
        CHECK(p.r == r_grid[ri]);
        CHECK(p.failures == 0);
        CHECK(p.n == 8);
        CHECK(res.pair_distance[ri].size() == 8);
        CHECK(res.pair_match[ri].size() == 8);
        CHECK(p.distance >= 0.0);
        CHECK(p.match >= 0.0);
        CHECK(p.match <= 1.0);
        CHECK(p.accuracy >= 0.0);
        CHECK(p.accuracy <= 1.0);
        CHECK(p.mask_area > 0.0);  // masked method reports its mask burden
        CHECK(p.distance_se >= 0.0);
        CHECK(p.match_se >= 0.0);
    }
}

TEST_CASE("mask-free methods report zero mask area") {
    const SweepResult res = sweep(bundle().model, bundle().sched, bundle().clf,
                                  bundle().data, EditMethod::kSdedit, {0.5},
                                  small_sweep_config());
    CHECK(res.points[0].mask_area == 0.0);
}

TEST_CASE("sweep is deterministic and job-count independent") {
    const std::vector<double> r_grid{0.6};
    const SweepConfig cfg = small_sweep_config();
    const SweepResult a = sweep(bundle().model, bundle().sched, bundle().clf,
                                bundle().data, EditMethod::kDiffedit, r_grid, cfg);
    SweepConfig cfg4 = cfg;
    cfg4.jobs = 4;
    const SweepResult b = sweep(bundle().model, bundle().sched, bundle().clf,
                                bundle().data, EditMethod::kDiffedit, r_grid, cfg4);
    CHECK(a.pair_distance == b.pair_distance);
    CHECK(a.pair_match == b.pair_match);
    CHECK(a.points[0].distance == b.points[0].distance);
}

TEST_CASE("encode-decode distance grows with the encoding ratio") {
    const SweepResult res = sweep(bundle().model, bundle().sched, bundle().clf,
                                  bundle().data, EditMethod::kEncodeDecode,
                                  {0.2, 0.9}, small_sweep_config());
    CHECK(res.points[0].distance < res.points[1].distance);
}

TEST_CASE("matched-level interpolation on a synthetic curve") {
    SweepResult res;
    res.points.resize(3);
    res.points[0].r = 0.1;
    res.points[0].match = 0.2;
    res.points[0].distance = 1.0;
    res.points[1].r = 0.5;
    res.points[1].match = 0.6;
    res.points[1].distance = 3.0;
    res.points[2].r = 0.9;
    res.points[2].match = 0.9;
    res.points[2].distance = 7.0;
    res.pair_distance = {{1.0, 1.2}, {3.0, 3.4}, {7.0, 7.8}};
    res.pair_match = {{0.2, 0.2}, {0.6, 0.6}, {0.9, 0.9}};

    // Level 0.4 sits halfway between the first two points.
    const auto d = distance_at_match(res.points, 0.4);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(2.0).epsilon(1e-12));
    const auto pairs = pair_distances_at_match(res, 0.4);
    REQUIRE(pairs.has_value());
    CHECK((*pairs)[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((*pairs)[1] == doctest::Approx(2.3).epsilon(1e-12));

    // A level met already at the first point clamps there.
    const auto d0 = distance_at_match(res.points, 0.1);
    REQUIRE(d0.has_value());
    CHECK(*d0 == 1.0);

    // Unreachable level.
    CHECK(!distance_at_match(res.points, 0.95).has_value());
    CHECK(!pair_distances_at_match(res, 0.95).has_value());
}

TEST_CASE("ablation kind names round trip") {
    for (const char* name : {"threshold", "mask-noise", "guidance"})
        CHECK(to_string(ablation_kind_from_string(name)) == name);
    CHECK_THROWS(ablation_kind_from_string("width"));
}

TEST_CASE("ablation grid overrides one parameter per curve") {
    SweepConfig cfg = small_sweep_config();
    cfg.n_pairs = 6;
    const std::vector<double> r_grid{0.6};

    const auto thr = ablation_grid(bundle().model, bundle().sched, bundle().clf,
                                   bundle().data, AblationKind::kThreshold,
                                   {0.25, 0.75}, r_grid, cfg);
    REQUIRE(thr.size() == 2);
    CHECK(thr[0].value == 0.25);
    CHECK(thr[1].value == 0.75);
    // Raising the threshold can only shrink the mask.
    CHECK(thr[1].result.points[0].mask_area <= thr[0].result.points[0].mask_area);

    const auto guid = ablation_grid(bundle().model, bundle().sched, bundle().clf,
                                    bundle().data, AblationKind::kGuidance,
                                    {0.0, 5.0}, r_grid, cfg);
    REQUIRE(guid.size() == 2);
    // Guidance changes the decode; the curves must not be byte-identical.
    CHECK(guid[0].result.pair_distance != guid[1].result.pair_distance);

    CHECK_THROWS(ablation_grid(bundle().model, bundle().sched, bundle().clf,
                               bundle().data, AblationKind::kGuidance, {}, r_grid, cfg));
}
