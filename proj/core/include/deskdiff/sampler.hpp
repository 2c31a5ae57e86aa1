// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic latent transport driven by a trained denoiser: guided noise
// prediction, the shared one-step update, and encode / decode walks over a
// step grid. Decoding moves from noise level r down to 0; encoding runs the
// same update in reverse to embed a clean point at level r.

#pragma once

#include <vector>

#include "deskdiff/denoiser.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/schedule.hpp"

namespace deskdiff {

struct GuidanceSpec {
    Condition cond;        // class to steer toward; null disables guidance
    double lambda = 1.0;   // 0 = unconditional, 1 = conditional, >1 amplified
};

// Latent states along a step grid; states[k] sits at time grid.times[k], so
// states.front() is the clean end and states.back() the noisy end.
template <typename T>
struct TrajectoryT {
    StepGrid grid;
    std::vector<std::vector<T>> states;
};
using Trajectory = TrajectoryT<float>;

// Classifier-free combination eu + lambda * (ec - eu).
template <typename T>
inline T guidance_combine(T eu, T ec, double lambda) {
    return eu + static_cast<T>(lambda) * (ec - eu);
}

// Guided prediction at one state. lambda == 1 (or a null condition /
// lambda == 0) collapses to a single model evaluation, bit-identical to
// calling the model directly.
template <typename T>
void guided_eps(const DenoiserModel<T>& model, const T* x, double t,
                const GuidanceSpec& g, T* eps_out, DenoiserWorkspace<T>& ws);

// One update of the deterministic sampler between noise levels with
// cumulative signal fractions a_src -> a_dst, using the noise estimate taken
// at the source state.
template <typename T>
void ddim_step(const T* x, const T* eps, double a_src, double a_dst, int dim, T* out);

// Walk the grid from its noisy end down to time 0.
template <typename T>
TrajectoryT<T> ddim_decode(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                           const std::vector<T>& x_start, const StepGrid& grid,
                           const GuidanceSpec& g, DenoiserWorkspace<T>& ws);

// Walk the grid from a clean point up to its noisy end, evaluating the model
// with the given condition (null for the default unconditional encoder).
template <typename T>
TrajectoryT<T> ddim_encode(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                           const std::vector<T>& x0, const StepGrid& grid,
                           Condition cond, DenoiserWorkspace<T>& ws);

// Stochastic encoder: blend the clean point with one noise draw at level r.
template <typename T>
std::vector<T> sdedit_encode(const std::vector<T>& x0, const std::vector<T>& eps,
                             const NoiseSchedule& sched, double r);

}  // namespace deskdiff
