// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Analytic gradients of the residual network are compared against central
// finite differences in double precision, where the truncation error of the
// difference quotient is far below the tolerance.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "deskdiff/mlp.hpp"
#include "deskdiff/rng.hpp"

using namespace deskdiff;

namespace {

// Scalar loss used for gradient checks: L = sum_i w_i * y_i with fixed
// arbitrary weights, so dL/dy is constant and nonuniform.
struct Probe {
    MlpArch arch;
    std::vector<double> params;
    std::vector<double> x;
    std::vector<double> gy;
    int batch;

    double loss(const std::vector<double>& p) const {
        MlpWorkspace<double> ws;
        std::vector<double> y(static_cast<std::size_t>(batch) * arch.out_dim);
        mlp_forward(arch, p.data(), x.data(), batch, y.data(), ws);
        double L = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) L += gy[i] * y[i];
        return L;
    }
};

Probe make_probe(int in_dim, int width, int depth, int out_dim, int batch,
                 std::uint64_t seed) {
    Probe p;
    p.arch = MlpArch{in_dim, width, depth, out_dim};
    Rng rng(seed);
    p.params = mlp_init<double>(p.arch, rng);
    // Perturb every parameter (including zero-initialized biases and output
    // weights) so no gradient path is hidden by a zero.
    for (auto& v : p.params) v += 0.05 * rng.normal();
    p.batch = batch;
    p.x.resize(static_cast<std::size_t>(batch) * in_dim);
    for (auto& v : p.x) v = rng.normal();
    p.gy.resize(static_cast<std::size_t>(batch) * out_dim);
    for (auto& v : p.gy) v = rng.normal();
    return p;
}

double max_param_grad_rel_err(Probe& p, double h) {
    MlpWorkspace<double> ws;
    std::vector<double> y(static_cast<std::size_t>(p.batch) * p.arch.out_dim);
    mlp_forward(p.arch, p.params.data(), p.x.data(), p.batch, y.data(), ws);
    std::vector<double> grad(p.arch.param_count(), 0.0);
    mlp_backward(p.arch, p.params.data(), p.x.data(), p.batch, p.gy.data(),
                 grad.data(), static_cast<double*>(nullptr), ws);

    double worst = 0.0;
    std::vector<double> probe = p.params;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double keep = probe[i];
        probe[i] = keep + h;
        const double up = p.loss(probe);
        probe[i] = keep - h;
        const double dn = p.loss(probe);
        probe[i] = keep;
        const double fd = (up - dn) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - grad[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("param_count matches the flat layout") {
    const MlpArch arch{5, 8, 2, 3};
    const std::size_t expected = (5 * 8 + 8) + 2 * (8 * 8 + 8) + (8 * 3 + 3);
    CHECK(arch.param_count() == expected);
    Rng rng(1);
    CHECK(mlp_init<float>(arch, rng).size() == expected);
}

TEST_CASE("fresh network computes the zero function") {
    const MlpArch arch{4, 16, 2, 4};
    Rng rng(3);
    const auto params = mlp_init<float>(arch, rng);
    MlpWorkspace<float> ws;
    std::vector<float> x(8, 0.0f);
    Rng xr(9);
    for (auto& v : x) v = xr.normal_f();
    std::vector<float> y(8, 1.0f);
    mlp_forward(arch, params.data(), x.data(), 2, y.data(), ws);
    for (float v : y) CHECK(v == 0.0f);
}

TEST_CASE("batched forward equals per-row forward") {
    const MlpArch arch{6, 12, 2, 5};
    Rng rng(8);
    auto params = mlp_init<float>(arch, rng);
    for (auto& v : params) v += 0.05f * rng.normal_f();
    const int batch = 4;
    std::vector<float> x(batch * 6);
    for (auto& v : x) v = rng.normal_f();
    MlpWorkspace<float> ws_all, ws_row;
    std::vector<float> y_all(batch * 5);
    mlp_forward(arch, params.data(), x.data(), batch, y_all.data(), ws_all);
    for (int row = 0; row < batch; ++row) {
        std::vector<float> y_row(5);
        mlp_forward(arch, params.data(), x.data() + row * 6, 1, y_row.data(), ws_row);
        for (int j = 0; j < 5; ++j) CHECK(y_all[row * 5 + j] == y_row[j]);
    }
}

TEST_CASE("parameter gradients match finite differences") {
    Probe p = make_probe(5, 8, 2, 4, 3, 1001);
    CHECK(max_param_grad_rel_err(p, 1e-5) < 1e-6);
}

TEST_CASE("parameter gradients match finite differences at depth 1 and 3") {
    Probe shallow = make_probe(3, 8, 1, 2, 2, 2002);
    CHECK(max_param_grad_rel_err(shallow, 1e-5) < 1e-6);
    Probe deep = make_probe(4, 8, 3, 3, 2, 3003);
    CHECK(max_param_grad_rel_err(deep, 1e-5) < 1e-6);
}

TEST_CASE("input gradients match finite differences") {
    Probe p = make_probe(5, 8, 2, 4, 3, 4004);
    MlpWorkspace<double> ws;
    std::vector<double> y(static_cast<std::size_t>(p.batch) * p.arch.out_dim);
    mlp_forward(p.arch, p.params.data(), p.x.data(), p.batch, y.data(), ws);
    std::vector<double> grad(p.arch.param_count(), 0.0);
    std::vector<double> gx(p.x.size(), 0.0);
    mlp_backward(p.arch, p.params.data(), p.x.data(), p.batch, p.gy.data(),
                 grad.data(), gx.data(), ws);

    const double h = 1e-5;
    Probe probe = p;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double keep = probe.x[i];
        probe.x[i] = keep + h;
        const double up = probe.loss(probe.params);
        probe.x[i] = keep - h;
        const double dn = probe.loss(probe.params);
        probe.x[i] = keep;
        const double fd = (up - dn) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(gx[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - gx[i]) / denom);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("backward accumulates instead of overwriting") {
    Probe p = make_probe(4, 8, 1, 2, 2, 5005);
    MlpWorkspace<double> ws;
    std::vector<double> y(static_cast<std::size_t>(p.batch) * p.arch.out_dim);
    mlp_forward(p.arch, p.params.data(), p.x.data(), p.batch, y.data(), ws);
    std::vector<double> once(p.arch.param_count(), 0.0);
    mlp_backward(p.arch, p.params.data(), p.x.data(), p.batch, p.gy.data(),
                 once.data(), static_cast<double*>(nullptr), ws);
    mlp_forward(p.arch, p.params.data(), p.x.data(), p.batch, y.data(), ws);
    std::vector<double> twice = once;
    mlp_backward(p.arch, p.params.data(), p.x.data(), p.batch, p.gy.data(),
                 twice.data(), static_cast<double*>(nullptr), ws);
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
}
