// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deskdiff {

/// Uniform grid of timesteps on [0, r], endpoint-inclusive. The same grid
/// instance drives both the encoder and the decoder so stored latents line
/// up index-for-index.
struct StepGrid {
    int n_steps = 0;            // number of intervals; times has n_steps + 1 entries
    std::vector<double> times;  // strictly increasing, times.front() == 0, times.back() == r

    double ratio() const { return times.back(); }
    std::size_t size() const { return times.size(); }
};

/// Cumulative-product noise schedule over continuous time t in [0, 1].
///
/// The discrete table alpha_bar has train_steps + 1 entries with
/// alpha_bar[0] == 1 and alpha_bar[T] below 1e-3; alpha(t) evaluates the
/// table at fractional index t*T by linear interpolation.
class NoiseSchedule {
  public:
    // Linear-beta schedule: beta ramps from beta_min to beta_max over
    // train_steps steps, alpha_bar is the running product of (1 - beta).
    static NoiseSchedule linear(int train_steps = 1000, double beta_min = 1e-4,
                                double beta_max = 0.02);

    int train_steps() const { return train_steps_; }
    const std::vector<double>& alpha_bar() const { return alpha_bar_; }
    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }

    /// Interpolated cumulative product at continuous t in [0, 1].
    double alpha(double t) const;

    /// sigma(t) = sqrt(1/alpha(t) - 1); the ODE integration variable.
    double sigma(double t) const;

    /// tau(r) = sigma(r); increases from 0 at r = 0.
    double tau(double r) const { return sigma(r); }

    /// Uniform grid with n_steps intervals on [0, r].
    StepGrid make_grid(double r, int n_steps) const;

    /// Identifies the schedule in checkpoints and manifests.
    std::string fingerprint() const;

  private:
    int train_steps_ = 0;
    double beta_min_ = 0.0;
    double beta_max_ = 0.0;
    std::vector<double> alpha_bar_;
};

}  // namespace deskdiff
