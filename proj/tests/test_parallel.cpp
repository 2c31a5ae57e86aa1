// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "deskdiff/parallel.hpp"

using namespace deskdiff;

TEST_CASE("every index runs exactly once") {
    for (int jobs : {1, 2, 4, 16}) {
        std::vector<std::atomic<int>> hits(37);
        for (auto& h : hits) h = 0;
        parallel_for(37, jobs, [&](int i) { hits[i]++; });
        for (int i = 0; i < 37; ++i) CHECK(hits[i].load() == 1);
    }
}

TEST_CASE("slot writes give identical results for any job count") {
    auto run = [](int jobs) {
        std::vector<double> out(100);
        parallel_for(100, jobs, [&](int i) { out[i] = i * 1.5 - 3.0; });
        return out;
    };
    const std::vector<double> serial = run(1);
    CHECK(run(2) == serial);
    CHECK(run(8) == serial);
}

TEST_CASE("handles edge sizes") {
    int count = 0;
    parallel_for(0, 4, [&](int) { count++; });
    CHECK(count == 0);
    parallel_for(1, 4, [&](int) { count++; });
    CHECK(count == 1);
    // More jobs than items.
    std::vector<std::atomic<int>> hits(3);
    for (auto& h : hits) h = 0;
    parallel_for(3, 64, [&](int i) { hits[i]++; });
    for (int i = 0; i < 3; ++i) CHECK(hits[i].load() == 1);
}

TEST_CASE("worker exceptions propagate to the caller") {
    CHECK_THROWS_AS(
        parallel_for(16, 4,
                     [&](int i) {
                         if (i == 7) throw std::runtime_error("boom");
                     }),
        std::runtime_error);
    CHECK_THROWS_AS(
        parallel_for(4, 1,
                     [&](int i) {
                         if (i == 2) throw std::runtime_error("boom");
                     }),
        std::runtime_error);
}
