// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// The Hungarian solver is validated against exhaustive permutation search
// on random instances, and the closed-form Gaussian transport cost against
// a hand-computed case.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "deskdiff/assignment.hpp"
#include "deskdiff/bounds.hpp"
#include "deskdiff/rng.hpp"

using namespace deskdiff;

namespace {

double cost_of(const std::vector<double>& cost, const std::vector<int>& col_of_row,
               std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + col_of_row[i]];
    return total;
}

bool is_permutation(const std::vector<int>& col_of_row, std::size_t n) {
    std::vector<bool> used(n, false);
    for (int c : col_of_row) {
        if (c < 0 || static_cast<std::size_t>(c) >= n || used[c]) return false;
        used[c] = true;
    }
    return true;
}

}  // namespace

TEST_CASE("known 3x3 instance") {
    // Optimal matching is (0,1), (1,0), (2,2) with cost 1 + 2 + 2 = 5.
    const std::vector<double> cost{4, 1, 3,
                                   2, 0, 5,
                                   3, 2, 2};
    const AssignmentResult res = solve_assignment(cost, 3);
    CHECK(res.total_cost == 5.0);
    CHECK(res.col_of_row == std::vector<int>{1, 0, 2});
}

TEST_CASE("identity matrix prefers the zero diagonal") {
    std::vector<double> cost(16, 1.0);
    for (int i = 0; i < 4; ++i) cost[i * 4 + i] = 0.0;
    const AssignmentResult res = solve_assignment(cost, 4);
    CHECK(res.total_cost == 0.0);
    CHECK(res.col_of_row == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("n = 1") {
    const AssignmentResult res = solve_assignment({7.5}, 1);
    CHECK(res.total_cost == 7.5);
    CHECK(res.col_of_row == std::vector<int>{0});
}

TEST_CASE("matches brute force on random instances") {
    Rng rng(20260823);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + trial % 7;  // sizes 2..8
        std::vector<double> cost(n * n);
        for (auto& c : cost) c = rng.uniform() * 10.0 - 2.0;  // negatives allowed
        const AssignmentResult fast = solve_assignment(cost, n);
        const AssignmentResult exact = solve_assignment_brute_force(cost, n);
        REQUIRE(is_permutation(fast.col_of_row, n));
        CHECK(fast.total_cost == doctest::Approx(exact.total_cost).epsilon(1e-10));
        CHECK(cost_of(cost, fast.col_of_row, n) ==
              doctest::Approx(fast.total_cost).epsilon(1e-10));
    }
}

TEST_CASE("matches brute force on a 10x10 instance") {
    Rng rng(77);
    const std::size_t n = 10;
    std::vector<double> cost(n * n);
    for (auto& c : cost) c = rng.uniform();
    const AssignmentResult fast = solve_assignment(cost, n);
    const AssignmentResult exact = solve_assignment_brute_force(cost, n);
    REQUIRE(is_permutation(fast.col_of_row, n));
    CHECK(fast.total_cost == doctest::Approx(exact.total_cost).epsilon(1e-10));
}

TEST_CASE("ties still produce a valid optimal permutation") {
    const std::size_t n = 5;
    std::vector<double> cost(n * n, 3.0);  // every matching costs 15
    const AssignmentResult res = solve_assignment(cost, n);
    CHECK(is_permutation(res.col_of_row, n));
    CHECK(res.total_cost == 15.0);
}

TEST_CASE("gaussian_w2_squared closed form") {
    // ||m1 - m2||^2 + d * (s1 - s2)^2 = 25 + 2 * 1 = 27.
    CHECK(gaussian_w2_squared({0, 0}, 1.0, {3, 4}, 2.0) ==
          doctest::Approx(27.0).epsilon(1e-14));
    CHECK(gaussian_w2_squared({1, 1, 1}, 0.5, {1, 1, 1}, 0.5) == 0.0);
    // Pure mean shift.
    CHECK(gaussian_w2_squared({0}, 1.0, {2}, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("empirical assignment cost approaches the Gaussian closed form") {
    // Two isotropic Gaussian clouds in 2-D; the empirical matching cost per
    // point should approach W2^2 = ||dm||^2 + d (s1 - s2)^2 = 4 + 2 * 0.25.
    const double expected = 4.0 + 2.0 * 0.25;
    Rng rng(5);
    const std::size_t n = 400;
    std::vector<double> ax(n), ay(n), bx(n), by(n);
    for (std::size_t i = 0; i < n; ++i) {
        ax[i] = rng.normal();
        ay[i] = rng.normal();
        bx[i] = 2.0 + 1.5 * rng.normal();
        by[i] = 1.5 * rng.normal();
    }
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = ax[i] - bx[j];
            const double dy = ay[i] - by[j];
            cost[i * n + j] = dx * dx + dy * dy;
        }
    const AssignmentResult res = solve_assignment(cost, n);
    const double per_point = res.total_cost / static_cast<double>(n);
    // Finite-sample matching overshoots W2^2 slightly; accept 15%.
    CHECK(per_point > 0.85 * expected);
    CHECK(per_point < 1.3 * expected);
}
