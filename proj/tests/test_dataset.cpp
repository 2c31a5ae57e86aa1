// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generator checks: determinism, class balance, cluster geometry for the
// 2-D family, and object support / contrast invariants for the shapes
// family.

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "deskdiff/dataset.hpp"

using namespace deskdiff;

namespace {

DatasetSpec gm2d_spec(int size, std::uint64_t seed) {
    DatasetSpec spec;
    spec.family = DatasetFamily::kGm2d;
    spec.classes = 4;
    spec.size = size;
    spec.seed = seed;
    return spec;
}

DatasetSpec shapes_spec(int size, std::uint64_t seed) {
    DatasetSpec spec;
    spec.family = DatasetFamily::kShapes;
    spec.classes = 4;
    spec.size = size;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("family name round trip") {
    CHECK(to_string(dataset_family_from_string("gm2d")) == "gm2d");
    CHECK(to_string(dataset_family_from_string("shapes")) == "shapes");
    CHECK_THROWS(dataset_family_from_string("mnist"));
}

TEST_CASE("generation is deterministic and prefix stable") {
    const auto a = generate(gm2d_spec(64, 9));
    const auto b = generate(gm2d_spec(64, 9));
    REQUIRE(a.size() == 64);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].data == b[i].data);
        CHECK(a[i].label == b[i].label);
    }
    // Sample i depends only on (seed, i): a longer run shares its prefix.
    const auto longer = generate(gm2d_spec(128, 9));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(longer[i].data == a[i].data);
        CHECK(longer[i].label == a[i].label);
    }
    // A different seed changes the draws.
    const auto other = generate(gm2d_spec(64, 10));
    CHECK(other[0].data != a[0].data);
}

TEST_CASE("gm2d geometry: radius-2 centers and tight clusters") {
    const int n = 2000;
    const auto data = generate(gm2d_spec(n, 3));
    REQUIRE(data.size() == n);
    std::vector<double> sx(4, 0.0), sy(4, 0.0);
    std::vector<int> count(4, 0);
    for (const auto& s : data) {
        REQUIRE(s.shape.size() == 2);
        REQUIRE(s.data.size() == 2);
        REQUIRE(s.label >= 0);
        REQUIRE(s.label < 4);
        CHECK(s.truth_region.empty());
        sx[s.label] += s.data[0];
        sy[s.label] += s.data[1];
        count[s.label]++;
    }
    for (int k = 0; k < 4; ++k) {
        // Labels are drawn uniformly.
        CHECK(count[k] > n / 4 - 150);
        CHECK(count[k] < n / 4 + 150);
        double center[2];
        gm2d_class_center(k, center);
        CHECK(std::hypot(center[0], center[1]) == doctest::Approx(2.0).epsilon(1e-12));
        const double mx = sx[k] / count[k];
        const double my = sy[k] / count[k];
        // Component std is well under 0.5, so the empirical mean of ~500
        // draws sits within a few hundredths of the center.
        CHECK(std::abs(mx - center[0]) < 0.08);
        CHECK(std::abs(my - center[1]) < 0.08);
    }
    // Centers are pairwise distinct.
    std::set<std::pair<double, double>> centers;
    for (int k = 0; k < 4; ++k) {
        double c[2];
        gm2d_class_center(k, c);
        centers.insert({c[0], c[1]});
    }
    CHECK(centers.size() == 4);
}

TEST_CASE("shapes samples carry bounded pixels and a plausible object region") {
    const int n = 200;
    const auto data = generate(shapes_spec(n, 5));
    REQUIRE(data.size() == n);
    int label_seen[4] = {0, 0, 0, 0};
    for (const auto& s : data) {
        REQUIRE(s.shape.h == 16);
        REQUIRE(s.shape.w == 16);
        REQUIRE(s.shape.c == 1);
        REQUIRE(s.data.size() == 256);
        REQUIRE(s.truth_region.size() == 256);
        label_seen[s.label]++;
        for (float v : s.data) {
            CHECK(v >= -1.0f);
            CHECK(v <= 1.0f);
        }
        int area = 0;
        for (std::uint8_t m : s.truth_region) area += m != 0;
        const double frac = area / 256.0;
        // Objects occupy a few percent up to a fifth of the image.
        CHECK(frac >= 0.02);
        CHECK(frac <= 0.20);
    }
    for (int k = 0; k < 4; ++k) CHECK(label_seen[k] > 0);
}

TEST_CASE("shapes objects contrast against their own background") {
    const auto spec = shapes_spec(50, 21);
    const auto data = generate(spec);
    for (int i = 0; i < 50; ++i) {
        const auto bg = shapes_background_only(spec, i);
        REQUIRE(bg.size() == 256);
        const auto& s = data[i];
        double min_gap = 1e9;
        int off_mismatch = 0;
        for (int p = 0; p < 256; ++p) {
            if (s.truth_region[p] != 0) {
                min_gap = std::min(min_gap, static_cast<double>(s.data[p] - bg[p]));
            } else if (s.data[p] != bg[p]) {
                off_mismatch++;
            }
        }
        // The object brightens every covered pixel by a clear margin and
        // leaves the rest of the image untouched.
        CHECK(min_gap >= 0.45);
        CHECK(off_mismatch == 0);
    }
}

TEST_CASE("edit_pairs cycles samples and avoids the source class") {
    const auto data = generate(gm2d_spec(10, 1));
    const auto pairs = edit_pairs(data, 4, 25, 123);
    REQUIRE(pairs.size() == 25);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        CHECK(pairs[k].sample_index == static_cast<int>(k % 10));
        CHECK(pairs[k].query_class != data[pairs[k].sample_index].label);
        CHECK(pairs[k].query_class >= 0);
        CHECK(pairs[k].query_class < 4);
    }
    // Deterministic in the seed.
    const auto again = edit_pairs(data, 4, 25, 123);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        CHECK(pairs[k].query_class == again[k].query_class);
    const auto other = edit_pairs(data, 4, 25, 124);
    bool any_diff = false;
    for (std::size_t k = 0; k < pairs.size(); ++k)
        any_diff = any_diff || other[k].query_class != pairs[k].query_class;
    CHECK(any_diff);
}
