// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact solver for the square linear assignment problem, used to evaluate
// empirical optimal-transport costs between point clouds.

#pragma once

#include <cstddef>
#include <vector>

namespace deskdiff {

struct AssignmentResult {
    std::vector<int> col_of_row;  // col_of_row[i] = column matched to row i
    double total_cost = 0.0;
};

// Minimum-cost perfect matching on an n x n cost matrix (row-major), via the
// Hungarian algorithm with potentials; O(n^3) time.
AssignmentResult solve_assignment(const std::vector<double>& cost, std::size_t n);

// Reference solver that enumerates all permutations; for validating the
// Hungarian implementation on small instances (n <= 10).
AssignmentResult solve_assignment_brute_force(const std::vector<double>& cost,
                                              std::size_t n);

}  // namespace deskdiff
