// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/mlp.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "deskdiff/errors.hpp"

namespace deskdiff {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using CMapRow = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using MapRow = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

struct Offsets {
    std::size_t w_in = 0, b_in = 0;
    std::vector<std::size_t> w_l, b_l;
    std::size_t w_out = 0, b_out = 0, total = 0;
};

Offsets layout(const MlpArch& a) {
    if (a.in_dim <= 0 || a.width <= 0 || a.depth < 0 || a.out_dim <= 0)
        throw ConfigError("mlp: invalid architecture");
    Offsets o;
    std::size_t p = 0;
    const auto in = static_cast<std::size_t>(a.in_dim);
    const auto w = static_cast<std::size_t>(a.width);
    const auto out = static_cast<std::size_t>(a.out_dim);
    o.w_in = p;
    p += in * w;
    o.b_in = p;
    p += w;
    for (int l = 0; l < a.depth; ++l) {
        o.w_l.push_back(p);
        p += w * w;
        o.b_l.push_back(p);
        p += w;
    }
    o.w_out = p;
    p += w * out;
    o.b_out = p;
    p += out;
    o.total = p;
    return o;
}

template <typename T>
inline T silu(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return x * s;
}

template <typename T>
inline T silu_grad(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return s * (T(1) + x * (T(1) - s));
}

template <typename T>
void ensure_workspace(const MlpArch& a, int batch, MlpWorkspace<T>& ws) {
    const std::size_t n = static_cast<std::size_t>(batch) * static_cast<std::size_t>(a.width);
    ws.batch = batch;
    ws.z.resize(static_cast<std::size_t>(a.depth) + 1);
    ws.h.resize(static_cast<std::size_t>(a.depth) + 1);
    for (auto& v : ws.z) v.resize(n);
    for (auto& v : ws.h) v.resize(n);
    ws.gh.resize(n);
    ws.gz.resize(n);
}

}  // namespace

std::size_t MlpArch::param_count() const { return layout(*this).total; }

template <typename T>
std::vector<T> mlp_init(const MlpArch& arch, Rng& rng) {
    const Offsets o = layout(arch);
    std::vector<T> params(o.total, T(0));
    auto fill = [&](std::size_t at, std::size_t count, int fan_in) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i)
            params[at + i] = static_cast<T>(stddev * rng.normal());
    };
    const auto in = static_cast<std::size_t>(arch.in_dim);
    const auto w = static_cast<std::size_t>(arch.width);
    fill(o.w_in, in * w, arch.in_dim);
    for (int l = 0; l < arch.depth; ++l)
        fill(o.w_l[static_cast<std::size_t>(l)], w * w, arch.width);
    // Output weights and all biases stay zero.
    return params;
}

template <typename T>
void mlp_forward(const MlpArch& arch, const T* params, const T* x, int batch, T* y,
                 MlpWorkspace<T>& ws) {
    const Offsets o = layout(arch);
    if (batch <= 0) throw ConfigError("mlp: batch must be positive");
    ensure_workspace(arch, batch, ws);

    const int w = arch.width;
    CMapMat<T> X(x, batch, arch.in_dim);
    CMapMat<T> Win(params + o.w_in, arch.in_dim, w);
    CMapRow<T> bin(params + o.b_in, w);

    MapMat<T> Z0(ws.z[0].data(), batch, w);
    MapMat<T> H0(ws.h[0].data(), batch, w);
    Z0.noalias() = X * Win;
    Z0.rowwise() += bin;
    for (Eigen::Index i = 0; i < Z0.size(); ++i) H0.data()[i] = silu(Z0.data()[i]);

    for (int l = 0; l < arch.depth; ++l) {
        const auto li = static_cast<std::size_t>(l);
        CMapMat<T> Wl(params + o.w_l[li], w, w);
        CMapRow<T> bl(params + o.b_l[li], w);
        MapMat<T> Z(ws.z[li + 1].data(), batch, w);
        MapMat<T> Hprev(ws.h[li].data(), batch, w);
        MapMat<T> H(ws.h[li + 1].data(), batch, w);
        Z.noalias() = Hprev * Wl;
        Z.rowwise() += bl;
        for (Eigen::Index i = 0; i < Z.size(); ++i)
            H.data()[i] = Hprev.data()[i] + silu(Z.data()[i]);
    }

    CMapMat<T> Wout(params + o.w_out, w, arch.out_dim);
    CMapRow<T> bout(params + o.b_out, arch.out_dim);
    MapMat<T> Y(y, batch, arch.out_dim);
    MapMat<T> Hlast(ws.h[static_cast<std::size_t>(arch.depth)].data(), batch, w);
    Y.noalias() = Hlast * Wout;
    Y.rowwise() += bout;
}

template <typename T>
void mlp_backward(const MlpArch& arch, const T* params, const T* x, int batch,
                  const T* gy, T* grad, T* gx, MlpWorkspace<T>& ws) {
    const Offsets o = layout(arch);
    if (ws.batch != batch) throw ConfigError("mlp: backward without matching forward");

    const int w = arch.width;
    CMapMat<T> X(x, batch, arch.in_dim);
    CMapMat<T> GY(gy, batch, arch.out_dim);
    MapMat<T> GH(ws.gh.data(), batch, w);
    MapMat<T> GZ(ws.gz.data(), batch, w);

    {
        CMapMat<T> Wout(params + o.w_out, w, arch.out_dim);
        MapMat<T> gWout(grad + o.w_out, w, arch.out_dim);
        MapRow<T> gbout(grad + o.b_out, arch.out_dim);
        MapMat<T> Hlast(ws.h[static_cast<std::size_t>(arch.depth)].data(), batch, w);
        gWout.noalias() += Hlast.transpose() * GY;
        gbout += GY.colwise().sum();
        GH.noalias() = GY * Wout.transpose();
    }

    for (int l = arch.depth - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        CMapMat<T> Wl(params + o.w_l[li], w, w);
        MapMat<T> gWl(grad + o.w_l[li], w, w);
        MapRow<T> gbl(grad + o.b_l[li], w);
        MapMat<T> Z(ws.z[li + 1].data(), batch, w);
        MapMat<T> Hprev(ws.h[li].data(), batch, w);
        for (Eigen::Index i = 0; i < GZ.size(); ++i)
            GZ.data()[i] = GH.data()[i] * silu_grad(Z.data()[i]);
        gWl.noalias() += Hprev.transpose() * GZ;
        gbl += GZ.colwise().sum();
        // Residual connection: gradient flows through both the identity path
        // (already in GH) and the transformed path.
        GH.noalias() += GZ * Wl.transpose();
    }

    {
        CMapMat<T> Win(params + o.w_in, arch.in_dim, w);
        MapMat<T> gWin(grad + o.w_in, arch.in_dim, w);
        MapRow<T> gbin(grad + o.b_in, w);
        MapMat<T> Z0(ws.z[0].data(), batch, w);
        for (Eigen::Index i = 0; i < GZ.size(); ++i)
            GZ.data()[i] = GH.data()[i] * silu_grad(Z0.data()[i]);
        gWin.noalias() += X.transpose() * GZ;
        gbin += GZ.colwise().sum();
        if (gx != nullptr) {
            MapMat<T> GX(gx, batch, arch.in_dim);
            GX.noalias() = GZ * Win.transpose();
        }
    }
}

template std::vector<float> mlp_init<float>(const MlpArch&, Rng&);
template std::vector<double> mlp_init<double>(const MlpArch&, Rng&);
template void mlp_forward<float>(const MlpArch&, const float*, const float*, int, float*,
                                 MlpWorkspace<float>&);
template void mlp_forward<double>(const MlpArch&, const double*, const double*, int, double*,
                                  MlpWorkspace<double>&);
template void mlp_backward<float>(const MlpArch&, const float*, const float*, int,
                                  const float*, float*, float*, MlpWorkspace<float>&);
template void mlp_backward<double>(const MlpArch&, const double*, const double*, int,
                                   const double*, double*, double*, MlpWorkspace<double>&);

}  // namespace deskdiff
