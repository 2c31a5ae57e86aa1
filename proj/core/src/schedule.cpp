// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/schedule.hpp"

#include <cmath>

#include "deskdiff/errors.hpp"
#include "deskdiff/hash.hpp"

namespace deskdiff {

NoiseSchedule NoiseSchedule::linear(int train_steps, double beta_min, double beta_max) {
    if (train_steps < 2) throw ConfigError("schedule: train_steps must be >= 2");
    if (!(beta_min > 0.0) || !(beta_max > beta_min) || !(beta_max < 1.0))
        throw ConfigError("schedule: need 0 < beta_min < beta_max < 1");

    NoiseSchedule s;
    s.train_steps_ = train_steps;
    s.beta_min_ = beta_min;
    s.beta_max_ = beta_max;
    s.alpha_bar_.resize(static_cast<std::size_t>(train_steps) + 1);
    s.alpha_bar_[0] = 1.0;
    double prod = 1.0;
    for (int i = 1; i <= train_steps; ++i) {
        const double beta = beta_min + (beta_max - beta_min) * static_cast<double>(i - 1) /
                                           static_cast<double>(train_steps - 1);
        prod *= 1.0 - beta;
        s.alpha_bar_[static_cast<std::size_t>(i)] = prod;
    }
    return s;
}

double NoiseSchedule::alpha(double t) const {
    if (!(t >= 0.0) || !(t <= 1.0)) throw ConfigError("schedule: timestep outside [0, 1]");
    const double x = t * train_steps_;
    const auto lo = static_cast<std::size_t>(x);
    if (lo >= static_cast<std::size_t>(train_steps_)) return alpha_bar_.back();
    const double frac = x - static_cast<double>(lo);
    return alpha_bar_[lo] * (1.0 - frac) + alpha_bar_[lo + 1] * frac;
}

double NoiseSchedule::sigma(double t) const {
    return std::sqrt(1.0 / alpha(t) - 1.0);
}

StepGrid NoiseSchedule::make_grid(double r, int n_steps) const {
    if (n_steps < 1) throw ConfigError("schedule: grid needs at least one step");
    if (!(r > 0.0) || !(r <= 1.0)) throw ConfigError("schedule: encoding ratio outside (0, 1]");
    StepGrid grid;
    grid.n_steps = n_steps;
    grid.times.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int i = 0; i <= n_steps; ++i) {
        // i/n evaluates to exactly 1.0 at the endpoint, so times.back() == r.
        grid.times[static_cast<std::size_t>(i)] =
            r * (static_cast<double>(i) / static_cast<double>(n_steps));
    }
    return grid;
}

std::string NoiseSchedule::fingerprint() const {
    std::uint64_t h = fnv1a64(&train_steps_, sizeof(train_steps_));
    h = fnv1a64(&beta_min_, sizeof(beta_min_), h);
    h = fnv1a64(&beta_max_, sizeof(beta_max_), h);
    h = fnv1a64_span(alpha_bar_.data(), alpha_bar_.size(), h);
    return hex64(h);
}

}  // namespace deskdiff
