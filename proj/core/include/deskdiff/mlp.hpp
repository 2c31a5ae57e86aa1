// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small fully connected network with residual hidden layers and SiLU
// activations. Templated on the scalar type: float for training throughput,
// double for gradient verification against finite differences.
//
// Layout of the flat parameter vector (all matrices row-major, y = x W + b):
//   W_in  (in_dim x width), b_in  (width)
//   for each hidden layer l:   W_l (width x width), b_l (width)
//   W_out (width x out_dim), b_out (out_dim)
// Hidden layers are residual: h <- h + silu(h W_l + b_l).

#pragma once

#include <cstddef>
#include <vector>

#include "deskdiff/rng.hpp"

namespace deskdiff {

struct MlpArch {
    int in_dim = 0;
    int width = 0;
    int depth = 0;  // number of residual hidden layers (input layer excluded)
    int out_dim = 0;

    std::size_t param_count() const;
    bool operator==(const MlpArch&) const = default;
};

// Scratch buffers reused across calls; forward fills the activations that
// backward consumes.
template <typename T>
struct MlpWorkspace {
    int batch = 0;
    std::vector<std::vector<T>> z;  // pre-activations, (depth + 1) x (batch * width)
    std::vector<std::vector<T>> h;  // post-layer activations, same shape
    std::vector<T> gh, gz;
};

// He-normal weights drawn in layout order; biases and the output layer start
// at zero, so a fresh network computes the zero function.
template <typename T>
std::vector<T> mlp_init(const MlpArch& arch, Rng& rng);

// x: batch x in_dim row-major, y: batch x out_dim row-major. `params` points
// at arch.param_count() scalars (possibly a prefix of a larger vector).
template <typename T>
void mlp_forward(const MlpArch& arch, const T* params, const T* x, int batch, T* y,
                 MlpWorkspace<T>& ws);

// Backward pass for the most recent forward through `ws`. Accumulates (+=)
// parameter gradients into `grad` (length arch.param_count()); writes dL/dx
// into `gx` when non-null.
template <typename T>
void mlp_backward(const MlpArch& arch, const T* params, const T* x, int batch,
                  const T* gy, T* grad, T* gx, MlpWorkspace<T>& ws);

}  // namespace deskdiff
