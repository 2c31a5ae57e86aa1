// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small statistics helpers shared by the mask, bound, and evaluation code:
// percentiles with linear interpolation, mean / standard error, Student-t
// tail probabilities, and a paired one-sided t-test.

#pragma once

#include <cstddef>
#include <vector>

namespace deskdiff {

// Percentile in [0, 100] with linear interpolation between order statistics
// (the "linear" convention: rank p/100 * (n - 1)). Input need not be sorted.
double percentile(std::vector<double> values, double p);

// Deterministic divide-and-conquer summation in index order.
double pairwise_sum(const double* values, std::size_t n);
double pairwise_sum(const std::vector<double>& values);

double mean(const std::vector<double>& values);
double sample_std(const std::vector<double>& values);   // ddof = 1
double standard_error(const std::vector<double>& values);

// Regularized incomplete beta function I_x(a, b) via the Lentz continued
// fraction; accurate to ~1e-12 for the a, b used here.
double regularized_incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

// Smallest q with P(T <= q) >= p (bisection on student_t_cdf).
double student_t_quantile(double p, double dof);

struct PairedTestResult {
    double mean_diff = 0.0;   // mean(a - b)
    double std_diff = 0.0;    // sample std of the differences
    double t_stat = 0.0;
    double dof = 0.0;
    double p_value = 1.0;     // one-sided: H1 is mean(a - b) < 0
};

// Paired one-sided t-test of H1: E[a - b] < 0. Degenerate inputs (n < 2 or
// all-equal pairs) report p = 1 when mean_diff >= 0 and p = 0 otherwise.
PairedTestResult paired_t_test_less(const std::vector<double>& a,
                                    const std::vector<double>& b);

}  // namespace deskdiff
