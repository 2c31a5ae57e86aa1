// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/diffedit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "deskdiff/errors.hpp"
#include "deskdiff/hash.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/stats.hpp"

namespace deskdiff {

namespace {

constexpr double kDegenerateFloor = 1e-8;

// Replace out-of-mask locations of `y` with the same locations of `ref`.
// Binary select, so an all-ones mask leaves `y` bit-identical.
void composite(const std::uint8_t* mask, const float* ref, const DataShape& shape,
               float* y) {
    const int c = shape.c;
    for (int loc = 0; loc < shape.locations(); ++loc) {
        if (mask[loc]) continue;
        for (int ch = 0; ch < c; ++ch) y[loc * c + ch] = ref[loc * c + ch];
    }
}

std::vector<float> soft_box_smooth(const std::vector<float>& soft, int h, int w) {
    std::vector<float> out(soft.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    acc += soft[static_cast<std::size_t>(yy * w + xx)];
                    ++n;
                }
            }
            out[static_cast<std::size_t>(y * w + x)] = static_cast<float>(acc / n);
        }
    }
    return out;
}

std::string fingerprint_states(const std::vector<std::vector<float>>& states) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const auto& s : states) hash = fnv1a64(s.data(), s.size() * sizeof(float), hash);
    return hex64(hash);
}

}  // namespace

double EditMask::area_fraction() const {
    if (binary.empty()) return 0.0;
    std::size_t on = 0;
    for (std::uint8_t b : binary) on += b;
    return static_cast<double>(on) / static_cast<double>(binary.size());
}

EditMethod edit_method_from_string(const std::string& name) {
    if (name == "diffedit") return EditMethod::kDiffedit;
    if (name == "sdedit") return EditMethod::kSdedit;
    if (name == "encode-decode") return EditMethod::kEncodeDecode;
    if (name == "diffedit-no-encode") return EditMethod::kDiffeditNoEncode;
    throw ConfigError("unknown edit method: " + name);
}

std::string to_string(EditMethod method) {
    switch (method) {
        case EditMethod::kDiffedit: return "diffedit";
        case EditMethod::kSdedit: return "sdedit";
        case EditMethod::kEncodeDecode: return "encode-decode";
        case EditMethod::kDiffeditNoEncode: return "diffedit-no-encode";
    }
    throw ConfigError("unknown edit method enum");
}

MaskOperator mask_operator_from_string(const std::string& name) {
    if (name == "latent-replace") return MaskOperator::kLatentReplace;
    if (name == "glide") return MaskOperator::kGlide;
    throw ConfigError("unknown mask operator: " + name);
}

std::string to_string(MaskOperator op) {
    return op == MaskOperator::kLatentReplace ? "latent-replace" : "glide";
}

bool method_uses_mask(EditMethod method) {
    return method == EditMethod::kDiffedit || method == EditMethod::kDiffeditNoEncode;
}

EditMask compute_mask(const Denoiser& model, const NoiseSchedule& sched,
                      const Sample& input, Condition query, const MaskConfig& cfg,
                      std::uint64_t seed) {
    if (cfg.n_noises < 1) throw ConfigError("mask: n_noises must be >= 1");
    if (!(cfg.threshold > 0.0) || !(cfg.threshold < 1.0))
        throw ConfigError("mask: threshold must lie strictly inside (0, 1)");
    if (!(cfg.noise_strength > 0.0) || !(cfg.noise_strength < 1.0))
        throw ConfigError("mask: noise_strength must lie in (0, 1)");
    const int d = input.shape.size();
    const int locations = input.shape.locations();
    const int c = input.shape.c;
    if (static_cast<int>(input.data.size()) != d)
        throw ConfigError("mask: sample data does not match its shape");

    EditMask mask;
    mask.h = input.shape.h;
    mask.w = input.shape.w;
    mask.provenance = cfg;
    mask.seed = seed;
    mask.soft.assign(static_cast<std::size_t>(locations), 0.0f);
    mask.binary.assign(static_cast<std::size_t>(locations), 0);

    // One noising per probe; both condition branches share the noised state
    // and run through a single batched evaluation (reference rows first).
    Rng rng(derive_seed(seed, seed_tag::kMask));
    const int n = cfg.n_noises;
    std::vector<float> batch(static_cast<std::size_t>(2 * n) * d);
    std::vector<double> times(static_cast<std::size_t>(2 * n), cfg.noise_strength);
    std::vector<Condition> conds(static_cast<std::size_t>(2 * n));
    std::vector<float> eps(static_cast<std::size_t>(d));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) eps[static_cast<std::size_t>(i)] = rng.normal_f();
        const std::vector<float> xt =
            sdedit_encode(input.data, eps, sched, cfg.noise_strength);
        std::copy(xt.begin(), xt.end(), batch.begin() + static_cast<std::ptrdiff_t>(k) * d);
        std::copy(xt.begin(), xt.end(),
                  batch.begin() + static_cast<std::ptrdiff_t>(n + k) * d);
        conds[static_cast<std::size_t>(k)] = cfg.reference;
        conds[static_cast<std::size_t>(n + k)] = query;
    }
    std::vector<float> pred(batch.size());
    DenoiserWorkspace<float> ws;
    denoiser_forward(model, batch.data(), times.data(), conds.data(), 2 * n,
                     pred.data(), ws);

    // Average per-location channel magnitude of the contrast over probes.
    std::vector<double> avg(static_cast<std::size_t>(locations), 0.0);
    for (int k = 0; k < n; ++k) {
        const float* er = pred.data() + static_cast<std::size_t>(k) * d;
        const float* eq = pred.data() + static_cast<std::size_t>(n + k) * d;
        for (int loc = 0; loc < locations; ++loc) {
            double mag = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double diff = static_cast<double>(eq[loc * c + ch]) -
                                    static_cast<double>(er[loc * c + ch]);
                mag += diff * diff;
            }
            avg[static_cast<std::size_t>(loc)] += std::sqrt(mag);
        }
    }
    for (double& v : avg) v /= n;

    const double raw_max = *std::max_element(avg.begin(), avg.end());
    if (raw_max < kDegenerateFloor) {
        mask.degenerate = true;
        mask.degenerate_reason = "identical estimates";
        return mask;
    }
    const double clip = percentile(avg, cfg.clip_percentile);
    for (double& v : avg) v = std::min(v, clip);
    const double post_max = *std::max_element(avg.begin(), avg.end());
    if (post_max < kDegenerateFloor) {
        mask.degenerate = true;
        mask.degenerate_reason = "clipped to zero";
        return mask;
    }
    for (int loc = 0; loc < locations; ++loc)
        mask.soft[static_cast<std::size_t>(loc)] =
            static_cast<float>(avg[static_cast<std::size_t>(loc)] / post_max);
    if (cfg.smoothing) mask.soft = soft_box_smooth(mask.soft, mask.h, mask.w);
    for (int loc = 0; loc < locations; ++loc)
        mask.binary[static_cast<std::size_t>(loc)] =
            mask.soft[static_cast<std::size_t>(loc)] >= static_cast<float>(cfg.threshold) ? 1 : 0;
    return mask;
}

void glide_mask_step(const NoiseSchedule& sched, const float* y_t, const float* x0,
                     const std::uint8_t* mask, const float* eps, const DataShape& shape,
                     double t, double t_next, float* out) {
    const double a = sched.alpha(t);
    if (a < 1e-6) throw NumericError("composite step: signal fraction too small to invert");
    const double a_next = sched.alpha(t_next);
    const double inv_sa = 1.0 / std::sqrt(a);
    const double sn = std::sqrt(1.0 - a);
    const float sa_next = static_cast<float>(std::sqrt(a_next));
    const float sn_next = static_cast<float>(std::sqrt(1.0 - a_next));
    const int c = shape.c;
    for (int loc = 0; loc < shape.locations(); ++loc) {
        for (int ch = 0; ch < c; ++ch) {
            const int i = loc * c + ch;
            const double y0 = (static_cast<double>(y_t[i]) - sn * eps[i]) * inv_sa;
            const double y0c = mask[loc] ? y0 : static_cast<double>(x0[i]);
            out[i] = sa_next * static_cast<float>(y0c) + sn_next * eps[i];
        }
    }
}

EditResult edit(const Denoiser& model, const NoiseSchedule& sched,
                const EditRequest& request) {
    const auto t_begin = std::chrono::steady_clock::now();
    const Sample& input = request.input;
    const int d = input.shape.size();
    if (static_cast<int>(input.data.size()) != d)
        throw ConfigError("edit: sample data does not match its shape");
    if (!(request.encoding_ratio > 0.0) || request.encoding_ratio > 1.0)
        throw ConfigError("edit: encoding_ratio must lie in (0, 1]");
    if (request.mask_operator == MaskOperator::kGlide && !method_uses_mask(request.method))
        throw ConfigError("edit: the glide operator requires a masked method");

    EditResult result;
    result.output.shape = input.shape;
    result.output.label = request.query.is_null() ? input.label : request.query.cls;

    if (method_uses_mask(request.method))
        result.mask = compute_mask(model, sched, input, request.query, request.mask,
                                   request.seed);

    const StepGrid grid = sched.make_grid(request.encoding_ratio, request.n_steps);
    GuidanceSpec g;
    g.cond = request.query;
    g.lambda = request.guidance;
    DenoiserWorkspace<float> ws;
    Rng noise_rng(derive_seed(request.seed, seed_tag::kNoise));
    auto draw_eps = [&]() {
        std::vector<float> e(static_cast<std::size_t>(d));
        for (auto& v : e) v = noise_rng.normal_f();
        return e;
    };

    std::vector<float> y;
    std::vector<float> eps(static_cast<std::size_t>(d));
    const bool deterministic_start = request.method == EditMethod::kDiffedit ||
                                     request.method == EditMethod::kEncodeDecode;
    Trajectory enc;
    if (deterministic_start) {
        enc = ddim_encode(model, sched, input.data, grid, Condition::none(), ws);
        result.encode_fingerprint = fingerprint_states(enc.states);
        y = enc.states.back();
    } else {
        y = sdedit_encode(input.data, draw_eps(), sched, request.encoding_ratio);
        result.encode_fingerprint =
            fingerprint_states(std::vector<std::vector<float>>{y});
    }

    const std::uint8_t* mask_bits =
        result.mask.has_value() ? result.mask->binary.data() : nullptr;
    std::vector<float> next(static_cast<std::size_t>(d));
    std::vector<float> fresh_ref(static_cast<std::size_t>(d));
    for (std::size_t k = grid.size() - 1; k > 0; --k) {
        const double t_src = grid.times[k];
        const double t_dst = grid.times[k - 1];
        guided_eps(model, y.data(), t_src, g, eps.data(), ws);
        const bool glide = mask_bits != nullptr &&
                           request.mask_operator == MaskOperator::kGlide;
        if (glide) {
            glide_mask_step(sched, y.data(), input.data.data(), mask_bits, eps.data(),
                            input.shape, t_src, t_dst, next.data());
            y = next;
            continue;
        }
        ddim_step(y.data(), eps.data(), sched.alpha(t_src), sched.alpha(t_dst), d,
                  next.data());
        y = next;
        if (mask_bits == nullptr) continue;
        if (request.method == EditMethod::kDiffedit) {
            composite(mask_bits, enc.states[k - 1].data(), input.shape, y.data());
        } else {
            // Fresh stochastic reference at the destination level.
            const std::vector<float> e = draw_eps();
            const double a = sched.alpha(t_dst);
            const float sa = static_cast<float>(std::sqrt(a));
            const float sn = static_cast<float>(std::sqrt(1.0 - a));
            for (int i = 0; i < d; ++i)
                fresh_ref[static_cast<std::size_t>(i)] =
                    sa * input.data[static_cast<std::size_t>(i)] +
                    sn * e[static_cast<std::size_t>(i)];
            composite(mask_bits, fresh_ref.data(), input.shape, y.data());
        }
    }

    result.output.data = y;
    for (float v : result.output.data)
        if (!std::isfinite(v)) throw NumericError("edit: non-finite output");
    result.timing_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t_begin)
                           .count();
    return result;
}

}  // namespace deskdiff
