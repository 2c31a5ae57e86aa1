// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "deskdiff/errors.hpp"
#include "deskdiff/rng.hpp"

namespace deskdiff {

namespace {

constexpr int kShapesSide = 16;
constexpr double kGm2dRadius = 2.0;
constexpr double kGm2dStd = 0.3;
constexpr double kContrastMin = 0.5;
constexpr double kContrastMax = 0.6;

// Per-shape half-size ranges chosen so every rasterized object covers
// between 2% and 20% of the 16x16 pixels, with lower limits high enough
// that the classes stay distinguishable after rasterization (a very small
// square and circle would produce identical pixel blocks).
struct SizeRange {
    double lo, hi;
};
constexpr SizeRange kSizeRange[4] = {
    {2.2, 3.0},  // square
    {2.4, 3.0},  // circle
    {2.0, 3.0},  // cross
    {2.2, 3.0},  // triangle
};

struct ShapeGeom {
    int type = 0;       // == class label
    double cx = 0.0, cy = 0.0;
    double s = 0.0;     // half-size
    double contrast = 0.0;
};

bool inside_shape(const ShapeGeom& g, int x, int y) {
    const double dx = x - g.cx;
    const double dy = y - g.cy;
    switch (g.type) {
        case 0:  // square
            return std::max(std::abs(dx), std::abs(dy)) <= g.s;
        case 1:  // circle
            return dx * dx + dy * dy <= g.s * g.s;
        case 2: {  // cross: two overlapping bars
            const double w = std::max(1.0, g.s / 3.0);
            return (std::abs(dx) <= w && std::abs(dy) <= g.s) ||
                   (std::abs(dy) <= w && std::abs(dx) <= g.s);
        }
        case 3:  // triangle, apex up
            return dy >= -g.s && dy <= g.s && std::abs(dx) <= (dy + g.s) / 2.0;
        default:
            return false;
    }
}

// Background and shape parameters drawn in a fixed order so sample i is a
// pure function of (seed, i).
struct ShapesDraw {
    double base, grad_angle, grad_amp;
    double tex_amp[2], tex_phase[2];
    int tex_freq[2];
    ShapeGeom geom;
};

ShapesDraw draw_shapes_params(const DatasetSpec& spec, Rng& rng, int label) {
    const ShapesBackground& bg = spec.background;
    ShapesDraw d;
    d.base = bg.base_min + rng.uniform() * (bg.base_max - bg.base_min);
    d.grad_angle = rng.uniform() * 2.0 * M_PI;
    d.grad_amp = rng.uniform() * bg.gradient_max;
    for (int k = 0; k < 2; ++k) {
        d.tex_amp[k] = rng.uniform() * bg.noise_amp / 2.0;
        d.tex_phase[k] = rng.uniform() * 2.0 * M_PI;
        d.tex_freq[k] = 1 + static_cast<int>(rng.uniform_int(2));
    }
    d.geom.type = label;
    const SizeRange range = kSizeRange[label];
    d.geom.s = range.lo + rng.uniform() * (range.hi - range.lo);
    const double margin = d.geom.s;
    d.geom.cx = margin + rng.uniform() * (kShapesSide - 1 - 2.0 * margin);
    d.geom.cy = margin + rng.uniform() * (kShapesSide - 1 - 2.0 * margin);
    d.geom.contrast = kContrastMin + rng.uniform() * (kContrastMax - kContrastMin);
    return d;
}

double background_value(const ShapesDraw& d, int x, int y) {
    const double nx = static_cast<double>(x) / (kShapesSide - 1) - 0.5;
    const double ny = static_cast<double>(y) / (kShapesSide - 1) - 0.5;
    double v = d.base + d.grad_amp * 2.0 * (nx * std::cos(d.grad_angle) + ny * std::sin(d.grad_angle));
    for (int k = 0; k < 2; ++k) {
        const double ang = k == 0 ? 0.0 : M_PI / 2.0;
        const double proj = nx * std::cos(ang) + ny * std::sin(ang);
        v += d.tex_amp[k] * std::cos(2.0 * M_PI * d.tex_freq[k] * proj + d.tex_phase[k]);
    }
    return v;
}

Sample make_gm2d_sample(const DatasetSpec& spec, int index) {
    Rng rng(derive_seed(spec.seed, index));
    Sample s;
    s.shape = {1, 2, 1};
    s.label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.classes)));
    double center[2];
    gm2d_class_center(s.label, center);
    s.data = {static_cast<float>(center[0] + kGm2dStd * rng.normal()),
              static_cast<float>(center[1] + kGm2dStd * rng.normal())};
    return s;
}

Sample make_shapes_sample(const DatasetSpec& spec, int index) {
    Rng rng(derive_seed(spec.seed, index));
    Sample s;
    s.shape = {kShapesSide, kShapesSide, 1};
    s.label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.classes)));
    const ShapesDraw d = draw_shapes_params(spec, rng, s.label);

    s.data.resize(static_cast<std::size_t>(s.shape.size()));
    s.truth_region.assign(static_cast<std::size_t>(s.shape.locations()), 0);
    for (int y = 0; y < kShapesSide; ++y) {
        for (int x = 0; x < kShapesSide; ++x) {
            const std::size_t loc = static_cast<std::size_t>(y * kShapesSide + x);
            double v = background_value(d, x, y);
            if (inside_shape(d.geom, x, y)) {
                s.truth_region[loc] = 1;
                v += d.geom.contrast;
            }
            s.data[loc] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }

    // Contrast self-check against the counterfactual background render.
    for (int y = 0; y < kShapesSide; ++y) {
        for (int x = 0; x < kShapesSide; ++x) {
            const std::size_t loc = static_cast<std::size_t>(y * kShapesSide + x);
            if (!s.truth_region[loc]) continue;
            const double bg = std::clamp(background_value(d, x, y), -1.0, 1.0);
            if (s.data[loc] - bg < kContrastMin - 1e-6)
                throw NumericError("shapes generator: contrast violated at sample " +
                                   std::to_string(index));
        }
    }
    return s;
}

}  // namespace

void gm2d_class_center(int cls, double center[2]) {
    const double angle = M_PI / 2.0 * static_cast<double>(cls % 4);
    center[0] = kGm2dRadius * std::cos(angle);
    center[1] = kGm2dRadius * std::sin(angle);
}

DataShape DatasetSpec::shape() const {
    if (family == DatasetFamily::kGm2d) return {1, 2, 1};
    return {kShapesSide, kShapesSide, 1};
}

DatasetFamily dataset_family_from_string(const std::string& name) {
    if (name == "gm2d") return DatasetFamily::kGm2d;
    if (name == "shapes") return DatasetFamily::kShapes;
    throw ConfigError("unknown dataset family: " + name);
}

std::string to_string(DatasetFamily family) {
    return family == DatasetFamily::kGm2d ? "gm2d" : "shapes";
}

std::vector<Sample> generate(const DatasetSpec& spec) {
    if (spec.size < 0) throw ConfigError("dataset: negative size");
    if (spec.classes != 4) throw ConfigError("dataset: class count is fixed at 4");
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(spec.size));
    for (int i = 0; i < spec.size; ++i) {
        out.push_back(spec.family == DatasetFamily::kGm2d ? make_gm2d_sample(spec, i)
                                                          : make_shapes_sample(spec, i));
    }
    return out;
}

std::vector<float> shapes_background_only(const DatasetSpec& spec, int index) {
    if (spec.family != DatasetFamily::kShapes)
        throw ConfigError("background render is shapes-only");
    Rng rng(derive_seed(spec.seed, index));
    const int label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.classes)));
    const ShapesDraw d = draw_shapes_params(spec, rng, label);
    std::vector<float> out(static_cast<std::size_t>(kShapesSide * kShapesSide));
    for (int y = 0; y < kShapesSide; ++y)
        for (int x = 0; x < kShapesSide; ++x)
            out[static_cast<std::size_t>(y * kShapesSide + x)] =
                static_cast<float>(std::clamp(background_value(d, x, y), -1.0, 1.0));
    return out;
}

std::vector<EditPair> edit_pairs(const std::vector<Sample>& samples, int n_classes,
                                 int n, std::uint64_t seed) {
    if (n_classes < 2) throw ConfigError("edit_pairs: need at least two classes");
    if (n > 0 && samples.empty()) throw ConfigError("edit_pairs: empty dataset");
    Rng rng(seed);
    std::vector<EditPair> pairs;
    pairs.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int k = 0; k < n; ++k) {
        EditPair p;
        p.sample_index = k % static_cast<int>(samples.size());
        const int source = samples[static_cast<std::size_t>(p.sample_index)].label;
        int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes - 1)));
        if (q >= source) ++q;
        p.query_class = q;
        pairs.push_back(p);
    }
    return pairs;
}

}  // namespace deskdiff
