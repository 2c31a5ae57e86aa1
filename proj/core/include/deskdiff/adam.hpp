// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace deskdiff {

// Adam optimizer state over a flat parameter vector.
template <typename T>
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<T> m, v;
    std::int64_t t = 0;

    void step(std::vector<T>& params, const std::vector<T>& grad) {
        if (m.size() != params.size()) {
            m.assign(params.size(), T(0));
            v.assign(params.size(), T(0));
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        const double alpha = lr / bc1;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
            const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            params[i] -= static_cast<T>(alpha * mi / (std::sqrt(vi / bc2) + eps));
        }
    }
};

}  // namespace deskdiff
