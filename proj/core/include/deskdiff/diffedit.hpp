// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Mask-guided editing in three steps: contrast-based mask inference, latent
// encoding, and guided decoding that keeps out-of-mask content pinned to the
// reference trajectory. Also provides the mask-free and stochastic ablation
// variants, and an alternative composite operator working on the predicted
// clean image.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/sampler.hpp"
#include "deskdiff/schedule.hpp"

namespace deskdiff {

struct MaskConfig {
    int n_noises = 10;
    double noise_strength = 0.5;   // noising level used for the contrast probes
    double clip_percentile = 95.0; // extreme values clipped to this percentile
    double threshold = 0.5;        // binarization level on the normalized map
    Condition reference;           // contrast branch; null = unconditional
    bool smoothing = false;        // optional 3x3 box filter on the soft map
};

struct EditMask {
    int h = 0, w = 0;
    std::vector<float> soft;           // per location, in [0, 1]
    std::vector<std::uint8_t> binary;  // soft >= threshold
    bool degenerate = false;
    std::string degenerate_reason;
    MaskConfig provenance;
    std::uint64_t seed = 0;

    std::size_t locations() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
    double area_fraction() const;
};

enum class EditMethod { kDiffedit, kSdedit, kEncodeDecode, kDiffeditNoEncode };
enum class MaskOperator { kLatentReplace, kGlide };

EditMethod edit_method_from_string(const std::string& name);
std::string to_string(EditMethod method);
MaskOperator mask_operator_from_string(const std::string& name);
std::string to_string(MaskOperator op);
bool method_uses_mask(EditMethod method);

struct EditRequest {
    Sample input;
    Condition query;
    double encoding_ratio = 0.8;
    double guidance = 5.0;
    int n_steps = 50;
    MaskConfig mask;  // mask.reference is the contrast branch
    EditMethod method = EditMethod::kDiffedit;
    MaskOperator mask_operator = MaskOperator::kLatentReplace;
    std::uint64_t seed = 0;
};

struct EditResult {
    Sample output;
    std::optional<EditMask> mask;     // absent for mask-free methods
    std::string encode_fingerprint;   // hash of the reference latents
    double timing_ms = 0.0;           // informational; never hashed
};

// Step 1: noise the input n times, contrast query-conditioned noise
// estimates against the reference branch, average the per-location
// magnitudes, clip extremes, max-normalize, binarize.
EditMask compute_mask(const Denoiser& model, const NoiseSchedule& sched,
                      const Sample& input, Condition query, const MaskConfig& cfg,
                      std::uint64_t seed);

// Full edit pipeline; dispatches on request.method and request.mask_operator.
EditResult edit(const Denoiser& model, const NoiseSchedule& sched,
                const EditRequest& request);

// Composite step on the predicted clean image: reconstruct y0 from (y_t,
// eps), replace its out-of-mask part with x0, and renoise to t_next with the
// same eps. `mask` has one entry per spatial location.
void glide_mask_step(const NoiseSchedule& sched, const float* y_t, const float* x0,
                     const std::uint8_t* mask, const float* eps, const DataShape& shape,
                     double t, double t_next, float* out);

}  // namespace deskdiff
