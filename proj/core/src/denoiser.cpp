// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/denoiser.hpp"

#include <cmath>
#include <cstring>

#include "deskdiff/adam.hpp"
#include "deskdiff/errors.hpp"

namespace deskdiff {

namespace {

// Consecutive steps the loss may sit above the divergence ceiling before the
// run aborts, and the ceiling as a multiple of the initial loss.
constexpr int kDivergencePatience = 100;
constexpr double kDivergenceFactor = 10.0;

template <typename T>
int feature_dim(const DenoiserModel<T>& m) {
    return m.data_dim + kTimeEmbDim + kCondEmbDim;
}

template <typename T>
void validate(const DenoiserModel<T>& m) {
    if (m.data_dim <= 0 || m.n_classes <= 0)
        throw ConfigError("denoiser: invalid dimensions");
    if (m.arch.in_dim != feature_dim(m) || m.arch.out_dim != m.data_dim)
        throw ConfigError("denoiser: architecture does not match data dimensions");
    if (m.params.size() != m.param_count())
        throw ConfigError("denoiser: parameter vector size mismatch");
}

template <typename T>
int cond_row(const DenoiserModel<T>& m, Condition c) {
    if (c.is_null()) return m.n_classes;
    if (c.cls >= m.n_classes) throw ConfigError("denoiser: class id out of range");
    return c.cls;
}

template <typename T>
void build_features(const DenoiserModel<T>& m, const T* x, const double* t,
                    const Condition* cond, int batch, std::vector<T>& features) {
    const int in = feature_dim(m);
    features.resize(static_cast<std::size_t>(batch) * static_cast<std::size_t>(in));
    for (int b = 0; b < batch; ++b) {
        T* row = features.data() + static_cast<std::size_t>(b) * in;
        std::memcpy(row, x + static_cast<std::size_t>(b) * m.data_dim,
                    sizeof(T) * static_cast<std::size_t>(m.data_dim));
        time_embedding(t[b], row + m.data_dim);
        const T* emb = m.cond_table() +
                       static_cast<std::size_t>(cond_row(m, cond[b])) * kCondEmbDim;
        std::memcpy(row + m.data_dim + kTimeEmbDim, emb,
                    sizeof(T) * static_cast<std::size_t>(kCondEmbDim));
    }
}

}  // namespace

template <typename T>
void time_embedding(double t, T* out) {
    constexpr int kHalf = kTimeEmbDim / 2;
    for (int i = 0; i < kHalf; ++i) {
        const double freq = std::pow(1000.0, static_cast<double>(i) / (kHalf - 1));
        out[i] = static_cast<T>(std::sin(freq * t));
        out[kHalf + i] = static_cast<T>(std::cos(freq * t));
    }
}

template <typename T>
DenoiserModel<T> make_denoiser(int data_dim, int n_classes, int width, int depth,
                               Rng& rng) {
    DenoiserModel<T> m;
    m.data_dim = data_dim;
    m.n_classes = n_classes;
    m.arch = MlpArch{data_dim + kTimeEmbDim + kCondEmbDim, width, depth, data_dim};
    m.params = mlp_init<T>(m.arch, rng);
    m.params.resize(m.param_count());
    // Condition embeddings start as unit-scale noise so classes separate from
    // the first step; drawn after the trunk weights, row-major.
    T* table = m.cond_table();
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(n_classes + 1) * kCondEmbDim; ++i)
        table[i] = static_cast<T>(rng.normal());
    validate(m);
    return m;
}

DenoiserModel<double> widen_to_f64(const DenoiserModel<float>& model) {
    DenoiserModel<double> out;
    out.arch = model.arch;
    out.data_dim = model.data_dim;
    out.n_classes = model.n_classes;
    out.schedule_fingerprint = model.schedule_fingerprint;
    out.params.assign(model.params.begin(), model.params.end());
    return out;
}

template <typename T>
void denoiser_forward(const DenoiserModel<T>& model, const T* x, const double* t,
                      const Condition* cond, int batch, T* eps_out,
                      DenoiserWorkspace<T>& ws) {
    validate(model);
    build_features(model, x, t, cond, batch, ws.features);
    mlp_forward(model.arch, model.params.data(), ws.features.data(), batch, eps_out,
                ws.mlp);
}

template <typename T>
void denoiser_backward(const DenoiserModel<T>& model, const T* x, const double* t,
                       const Condition* cond, int batch, const T* g_eps,
                       std::vector<T>& grad, T* gx, DenoiserWorkspace<T>& ws) {
    (void)x;
    if (grad.size() != model.param_count())
        throw ConfigError("denoiser: gradient vector size mismatch");
    const int in = feature_dim(model);
    ws.grad_features.resize(static_cast<std::size_t>(batch) * static_cast<std::size_t>(in));
    // Trunk params occupy the same prefix in `grad` as in `params`, so the
    // MLP accumulates into it directly.
    mlp_backward(model.arch, model.params.data(), ws.features.data(), batch, g_eps, grad.data(),
                 ws.grad_features.data(), ws.mlp);

    T* table_grad = grad.data() + model.trunk_param_count();
    for (int b = 0; b < batch; ++b) {
        const T* row = ws.grad_features.data() + static_cast<std::size_t>(b) * in;
        if (gx != nullptr)
            std::memcpy(gx + static_cast<std::size_t>(b) * model.data_dim, row,
                        sizeof(T) * static_cast<std::size_t>(model.data_dim));
        T* emb_grad = table_grad +
                      static_cast<std::size_t>(cond_row(model, cond[b])) * kCondEmbDim;
        const T* src = row + model.data_dim + kTimeEmbDim;
        for (int i = 0; i < kCondEmbDim; ++i) emb_grad[i] += src[i];
    }
}

template <typename T>
double denoiser_loss_and_grad(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                              const T* x0, const double* t, const T* eps,
                              const Condition* cond, int batch, std::vector<T>& grad,
                              DenoiserWorkspace<T>& ws) {
    validate(model);
    const std::size_t n = static_cast<std::size_t>(batch) *
                          static_cast<std::size_t>(model.data_dim);
    std::vector<T> xt(n), pred(n), g_eps(n);
    for (int b = 0; b < batch; ++b) {
        const double a = sched.alpha(t[b]);
        const T sa = static_cast<T>(std::sqrt(a));
        const T sn = static_cast<T>(std::sqrt(1.0 - a));
        const std::size_t off = static_cast<std::size_t>(b) * model.data_dim;
        for (int i = 0; i < model.data_dim; ++i)
            xt[off + i] = sa * x0[off + i] + sn * eps[off + i];
    }
    denoiser_forward(model, xt.data(), t, cond, batch, pred.data(), ws);
    double loss = 0.0;
    const T scale = static_cast<T>(2.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = static_cast<double>(pred[i]) - static_cast<double>(eps[i]);
        loss += diff * diff;
        g_eps[i] = scale * static_cast<T>(diff);
    }
    denoiser_backward(model, xt.data(), t, cond, batch, g_eps.data(), grad,
                      static_cast<T*>(nullptr), ws);
    return loss / static_cast<double>(n);
}

TrainReport train_denoiser(Denoiser& model, const NoiseSchedule& sched,
                           const std::vector<Sample>& data, const TrainConfig& cfg) {
    validate(model);
    if (data.empty()) throw ConfigError("train: empty dataset");
    if (cfg.steps <= 0 || cfg.batch <= 0) throw ConfigError("train: invalid steps/batch");
    const int d = model.data_dim;
    for (const Sample& s : data)
        if (s.shape.size() != d) throw ConfigError("train: sample dimension mismatch");
    model.schedule_fingerprint = sched.fingerprint();

    DenoiserWorkspace<float> ws;
    Adam<float> opt;
    opt.lr = cfg.lr;
    std::vector<float> grad(model.param_count());
    const std::size_t bn = static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(d);
    std::vector<float> x0(bn), eps(bn);
    std::vector<double> t(static_cast<std::size_t>(cfg.batch));
    std::vector<Condition> cond(static_cast<std::size_t>(cfg.batch));

    TrainReport report;
    int high_loss_streak = 0;
    for (int step = 0; step < cfg.steps; ++step) {
        // Per-step generator; draws happen in a fixed order (indices, times,
        // noises, dropout coins) so runs are reproducible.
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step)));
        std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch));
        for (int b = 0; b < cfg.batch; ++b) idx[static_cast<std::size_t>(b)] = rng.uniform_int(data.size());
        for (int b = 0; b < cfg.batch; ++b) t[static_cast<std::size_t>(b)] = rng.uniform();
        for (std::size_t i = 0; i < bn; ++i) eps[i] = rng.normal_f();
        for (int b = 0; b < cfg.batch; ++b) {
            const Sample& s = data[idx[static_cast<std::size_t>(b)]];
            std::copy(s.data.begin(), s.data.end(),
                      x0.begin() + static_cast<std::ptrdiff_t>(b) * d);
            cond[static_cast<std::size_t>(b)] =
                rng.uniform() < cfg.cond_dropout ? Condition::none() : Condition::of(s.label);
        }

        std::fill(grad.begin(), grad.end(), 0.0f);
        const double loss = denoiser_loss_and_grad(model, sched, x0.data(), t.data(),
                                                   eps.data(), cond.data(), cfg.batch,
                                                   grad, ws);
        if (!std::isfinite(loss))
            throw NumericError("train: non-finite loss at step " + std::to_string(step));
        if (step == 0) report.initial_loss = loss;
        if (loss > kDivergenceFactor * report.initial_loss) {
            if (++high_loss_streak >= kDivergencePatience)
                throw NumericError("train: loss diverged near step " + std::to_string(step));
        } else {
            high_loss_streak = 0;
        }
        if (cfg.log_every > 0 && step % cfg.log_every == 0)
            report.loss_log.emplace_back(step, loss);
        report.final_loss = loss;
        report.steps_run = step + 1;
        // Cosine decay from cfg.lr to 5% of it over the run; late steps then
        // refine instead of bouncing around the optimum.
        const double progress =
            cfg.steps > 1 ? static_cast<double>(step) / static_cast<double>(cfg.steps - 1)
                          : 1.0;
        opt.lr = cfg.lr * (0.05 + 0.475 * (1.0 + std::cos(M_PI * progress)));
        opt.step(model.params, grad);
    }
    return report;
}

template void time_embedding<float>(double, float*);
template void time_embedding<double>(double, double*);
template DenoiserModel<float> make_denoiser<float>(int, int, int, int, Rng&);
template DenoiserModel<double> make_denoiser<double>(int, int, int, int, Rng&);
template void denoiser_forward<float>(const DenoiserModel<float>&, const float*,
                                      const double*, const Condition*, int, float*,
                                      DenoiserWorkspace<float>&);
template void denoiser_forward<double>(const DenoiserModel<double>&, const double*,
                                       const double*, const Condition*, int, double*,
                                       DenoiserWorkspace<double>&);
template void denoiser_backward<float>(const DenoiserModel<float>&, const float*,
                                       const double*, const Condition*, int, const float*,
                                       std::vector<float>&, float*, DenoiserWorkspace<float>&);
template void denoiser_backward<double>(const DenoiserModel<double>&, const double*,
                                        const double*, const Condition*, int, const double*,
                                        std::vector<double>&, double*, DenoiserWorkspace<double>&);
template double denoiser_loss_and_grad<float>(const DenoiserModel<float>&, const NoiseSchedule&,
                                              const float*, const double*, const float*,
                                              const Condition*, int, std::vector<float>&,
                                              DenoiserWorkspace<float>&);
template double denoiser_loss_and_grad<double>(const DenoiserModel<double>&, const NoiseSchedule&,
                                               const double*, const double*, const double*,
                                               const Condition*, int, std::vector<double>&,
                                               DenoiserWorkspace<double>&);

}  // namespace deskdiff
