// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional noise-prediction model. The network sees the concatenation
// [x, time embedding, condition embedding] and returns a noise estimate of
// the same dimension as x. Class conditions use learned embeddings from a
// table with one extra row for the "no condition" token.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/mlp.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/schedule.hpp"

namespace deskdiff {

inline constexpr int kTimeEmbDim = 32;
inline constexpr int kCondEmbDim = 32;

// A class label in [0, n_classes) or the unconditional token.
struct Condition {
    int cls = -1;

    static Condition none() { return {}; }
    static Condition of(int c) { return {c}; }
    bool is_null() const { return cls < 0; }
    bool operator==(const Condition&) const = default;
};

// Model parameters: flat vector holding the trunk network followed by the
// condition embedding table ((n_classes + 1) rows, null token last).
template <typename T>
struct DenoiserModel {
    MlpArch arch;
    int data_dim = 0;
    int n_classes = 0;
    std::vector<T> params;
    std::string schedule_fingerprint;

    std::size_t trunk_param_count() const { return arch.param_count(); }
    std::size_t param_count() const {
        return trunk_param_count() +
               static_cast<std::size_t>(n_classes + 1) * kCondEmbDim;
    }
    const T* cond_table() const { return params.data() + trunk_param_count(); }
    T* cond_table() { return params.data() + trunk_param_count(); }
};

using Denoiser = DenoiserModel<float>;

template <typename T>
DenoiserModel<T> make_denoiser(int data_dim, int n_classes, int width, int depth,
                               Rng& rng);

DenoiserModel<double> widen_to_f64(const DenoiserModel<float>& model);

// Scratch buffers for batched evaluation.
template <typename T>
struct DenoiserWorkspace {
    MlpWorkspace<T> mlp;
    std::vector<T> features;       // batch x in_dim
    std::vector<T> grad_features;  // batch x in_dim
};

// Writes the 32-dim sinusoidal embedding of t in [0, 1]: sin halves then cos
// halves, with geometric frequencies 1000^(i/15).
template <typename T>
void time_embedding(double t, T* out);

// eps_out: batch x data_dim. Each row may carry its own time and condition.
template <typename T>
void denoiser_forward(const DenoiserModel<T>& model, const T* x, const double* t,
                      const Condition* cond, int batch, T* eps_out,
                      DenoiserWorkspace<T>& ws);

// Backward for the most recent forward: accumulates (+=) gradients w.r.t. all
// parameters (trunk and condition table) into `grad`; writes dL/dx when `gx`
// is non-null.
template <typename T>
void denoiser_backward(const DenoiserModel<T>& model, const T* x, const double* t,
                       const Condition* cond, int batch, const T* g_eps,
                       std::vector<T>& grad, T* gx, DenoiserWorkspace<T>& ws);

// Noise-prediction objective on one batch: forms x_t from (x0, t, eps), runs
// the model, and returns the per-coordinate mean squared error. Accumulates
// parameter gradients into `grad`.
template <typename T>
double denoiser_loss_and_grad(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                              const T* x0, const double* t, const T* eps,
                              const Condition* cond, int batch, std::vector<T>& grad,
                              DenoiserWorkspace<T>& ws);

struct TrainConfig {
    int steps = 20000;
    int batch = 128;
    double lr = 1e-3;  // peak rate; cosine-decayed to 5% over the run
    double cond_dropout = 0.10;
    std::uint64_t seed = 0;
    int log_every = 500;
};

struct TrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int steps_run = 0;
    std::vector<std::pair<int, double>> loss_log;  // (step, loss) every log_every
};

// Adam training of the noise objective with condition dropout. Deterministic
// given (model init, data, config). Throws NumericError on divergence or
// non-finite loss.
TrainReport train_denoiser(Denoiser& model, const NoiseSchedule& sched,
                           const std::vector<Sample>& data, const TrainConfig& cfg);

}  // namespace deskdiff
