// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Numerical verification of the edit-distance bounds: estimating the model
// constants (sup-norm C, Lipschitz constant K1, conditional-gap expectation
// K2), evaluating both closed-form bounds, measuring empirical edit
// distances against them, and quantifying how far the deterministic encoder
// is from an optimal transport map on 2-D data.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/schedule.hpp"

namespace deskdiff {

struct BoundConstants {
    double C = 0.0;   // max ||eps(x_t, Q, t)|| / sqrt(d) along encode trajectories
    double K1 = 0.0;  // Lipschitz estimate of the unconditional estimator (lower bound)
    double K2 = 0.0;  // mean over samples of the max conditional-unconditional gap
    int n_samples = 0;
    std::vector<double> t_grid;
    int k1_pairs = 0;
    int k1_power_points = 0;
    std::string note;  // provenance, e.g. untrained-model flag
};

struct BoundCurvePoint {
    double r = 0.0;
    double tau = 0.0;
    double bound_sdedit = 0.0;
    double bound_diffedit = 0.0;
    double emp_sdedit = 0.0;
    double emp_encdec = 0.0;
    double se_sdedit = 0.0;
    double se_encdec = 0.0;
};

struct BoundCurve {
    std::vector<BoundCurvePoint> points;
    int n_mc = 0;
    int n_steps = 0;
};

// First bound: (C + 1) * tau.
double sdedit_bound(double tau, double C);

// Second bound: K2 * tau / sqrt(tau^2 + 1) * (tau + sqrt(tau^2 + 1))^K1.
double diffedit_bound(double tau, double K1, double K2);

// Smallest tau > 0 where the second bound overtakes the first; nullopt if no
// sign change is found below tau_max.
std::optional<double> bounds_crossover_tau(double C, double K1, double K2,
                                           double tau_max = 100.0);

// Estimates (C, K1, K2) on encode trajectories of `n_samples` data points,
// with per-sample query classes drawn distinct from the source class. All
// model evaluations run in double precision.
BoundConstants estimate_constants(const Denoiser& model, const NoiseSchedule& sched,
                                  const std::vector<Sample>& data, int n_samples,
                                  const std::vector<double>& t_grid, std::uint64_t seed);

// Monte Carlo mean edit distances (guidance-free conditional decode) for the
// stochastic and deterministic encoders at each r, with the bound columns
// filled from `constants`.
BoundCurve empirical_curve(const Denoiser& model, const NoiseSchedule& sched,
                           const std::vector<Sample>& data,
                           const BoundConstants& constants,
                           const std::vector<double>& r_grid, int n_mc, int n_steps,
                           std::uint64_t seed, int jobs);

struct OtReport {
    double r = 0.0;
    int n_points = 0;
    double encoder_cost = 0.0;  // mean squared displacement of the encoder
    double encoder_se = 0.0;    // standard error of the per-point costs
    double ot_cost = 0.0;       // optimal assignment cost per point
    double ratio = 1.0;         // encoder_cost / ot_cost
};

// Compares the deterministic encoder's transport cost against the exact
// assignment cost between independent draws of the data and of its noised
// marginal at level r.
OtReport ot_defect(const Denoiser& model, const NoiseSchedule& sched,
                   const DatasetSpec& spec2d, double r, int n_points, int n_steps,
                   std::uint64_t seed);

// Closed-form squared transport cost between isotropic Gaussians
// N(m1, s1^2 I) and N(m2, s2^2 I) in dimension d.
double gaussian_w2_squared(const std::vector<double>& m1, double s1,
                           const std::vector<double>& m2, double s2);

}  // namespace deskdiff
