// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deskdiff {

/// Spatial layout of a data tensor: h*w locations, c values per location.
/// The 2-D point family uses {1, 2, 1} (two locations, one channel), the
/// shapes family {16, 16, 1}.
struct DataShape {
    int h = 1;
    int w = 1;
    int c = 1;

    int locations() const { return h * w; }
    int size() const { return h * w * c; }
    bool operator==(const DataShape&) const = default;
};

struct Sample {
    std::vector<float> data;  // flat, location-major: ((y*w + x)*c + ch)
    DataShape shape;
    int label = 0;
    std::vector<std::uint8_t> truth_region;  // per-location object support; empty if n/a
};

enum class DatasetFamily { kGm2d, kShapes };

struct ShapesBackground {
    double base_min = -0.5;   // constant offset range
    double base_max = 0.0;
    double gradient_max = 0.25;  // |gradient| amplitude across the image
    double noise_amp = 0.1;      // low-frequency cosine texture amplitude
};

struct DatasetSpec {
    DatasetFamily family = DatasetFamily::kGm2d;
    int classes = 4;
    int size = 0;
    std::uint64_t seed = 0;
    ShapesBackground background;  // shapes only

    DataShape shape() const;
};

DatasetFamily dataset_family_from_string(const std::string& name);
std::string to_string(DatasetFamily family);

/// Deterministic generation: sample i depends only on (spec.seed, i).
std::vector<Sample> generate(const DatasetSpec& spec);

/// Renders sample i of the shapes family with the object omitted. Used by
/// the generator's contrast self-check and by tests.
std::vector<float> shapes_background_only(const DatasetSpec& spec, int index);

struct EditPair {
    int sample_index = 0;
    int query_class = 0;  // always != samples[sample_index].label
};

/// Uniformly drawn target classes distinct from each sample's own class;
/// pair k points at sample k modulo the dataset size.
std::vector<EditPair> edit_pairs(const std::vector<Sample>& samples, int n_classes,
                                 int n, std::uint64_t seed);

/// Mixture-component center of the 2-D family (radius-2 symmetric points).
void gm2d_class_center(int cls, double center[2]);

}  // namespace deskdiff
