// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "deskdiff/errors.hpp"

namespace deskdiff {

AssignmentResult solve_assignment(const std::vector<double>& cost, std::size_t n) {
    if (cost.size() != n * n) throw ConfigError("assignment: cost matrix must be n x n");
    AssignmentResult result;
    if (n == 0) return result;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Shortest augmenting path with row/column potentials; 1-based indices
    // with a virtual column 0.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    result.col_of_row.assign(n, -1);
    for (std::size_t j = 1; j <= n; ++j)
        result.col_of_row[match[j] - 1] = static_cast<int>(j - 1);
    for (std::size_t i = 0; i < n; ++i)
        result.total_cost += cost[i * n + static_cast<std::size_t>(result.col_of_row[i])];
    return result;
}

AssignmentResult solve_assignment_brute_force(const std::vector<double>& cost,
                                              std::size_t n) {
    if (cost.size() != n * n) throw ConfigError("assignment: cost matrix must be n x n");
    if (n > 10) throw ConfigError("brute-force assignment limited to n <= 10");
    AssignmentResult best;
    if (n == 0) return best;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    best.total_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += cost[i * n + static_cast<std::size_t>(perm[i])];
        if (c < best.total_cost) {
            best.total_cost = c;
            best.col_of_row = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace deskdiff
