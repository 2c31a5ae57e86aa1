// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/sampler.hpp"

#include <cmath>

#include "deskdiff/errors.hpp"

namespace deskdiff {

template <typename T>
void guided_eps(const DenoiserModel<T>& model, const T* x, double t,
                const GuidanceSpec& g, T* eps_out, DenoiserWorkspace<T>& ws) {
    const int d = model.data_dim;
    if (g.cond.is_null() || g.lambda == 0.0) {
        const Condition c = Condition::none();
        denoiser_forward(model, x, &t, &c, 1, eps_out, ws);
        return;
    }
    if (g.lambda == 1.0) {
        denoiser_forward(model, x, &t, &g.cond, 1, eps_out, ws);
        return;
    }
    // Both branches in one batched evaluation: row 0 unconditional, row 1
    // conditional.
    std::vector<T> xx(static_cast<std::size_t>(2 * d));
    std::copy(x, x + d, xx.begin());
    std::copy(x, x + d, xx.begin() + d);
    const double tt[2] = {t, t};
    const Condition cc[2] = {Condition::none(), g.cond};
    std::vector<T> pred(static_cast<std::size_t>(2 * d));
    denoiser_forward(model, xx.data(), tt, cc, 2, pred.data(), ws);
    for (int i = 0; i < d; ++i)
        eps_out[i] = guidance_combine(pred[static_cast<std::size_t>(i)],
                                      pred[static_cast<std::size_t>(d + i)], g.lambda);
}

template <typename T>
void ddim_step(const T* x, const T* eps, double a_src, double a_dst, int dim, T* out) {
    if (!(a_src > 0.0) || !(a_dst > 0.0))
        throw NumericError("sampler step: cumulative signal fraction must be positive");
    const double ratio = std::sqrt(a_dst / a_src);
    const T c1 = static_cast<T>(ratio);
    const T c2 = static_cast<T>(std::sqrt(1.0 - a_dst) - ratio * std::sqrt(1.0 - a_src));
    for (int i = 0; i < dim; ++i) out[i] = c1 * x[i] + c2 * eps[i];
}

template <typename T>
TrajectoryT<T> ddim_decode(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                           const std::vector<T>& x_start, const StepGrid& grid,
                           const GuidanceSpec& g, DenoiserWorkspace<T>& ws) {
    const int d = model.data_dim;
    if (static_cast<int>(x_start.size()) != d)
        throw ConfigError("decode: state dimension mismatch");
    TrajectoryT<T> traj;
    traj.grid = grid;
    traj.states.assign(grid.size(), std::vector<T>(static_cast<std::size_t>(d)));
    traj.states.back() = x_start;
    std::vector<T> eps(static_cast<std::size_t>(d));
    for (std::size_t k = grid.size() - 1; k > 0; --k) {
        const double t_src = grid.times[k];
        const double t_dst = grid.times[k - 1];
        guided_eps(model, traj.states[k].data(), t_src, g, eps.data(), ws);
        ddim_step(traj.states[k].data(), eps.data(), sched.alpha(t_src),
                  sched.alpha(t_dst), d, traj.states[k - 1].data());
    }
    return traj;
}

template <typename T>
TrajectoryT<T> ddim_encode(const DenoiserModel<T>& model, const NoiseSchedule& sched,
                           const std::vector<T>& x0, const StepGrid& grid,
                           Condition cond, DenoiserWorkspace<T>& ws) {
    const int d = model.data_dim;
    if (static_cast<int>(x0.size()) != d)
        throw ConfigError("encode: state dimension mismatch");
    TrajectoryT<T> traj;
    traj.grid = grid;
    traj.states.assign(grid.size(), std::vector<T>(static_cast<std::size_t>(d)));
    traj.states.front() = x0;
    std::vector<T> eps(static_cast<std::size_t>(d));
    GuidanceSpec g;
    g.cond = cond;
    g.lambda = cond.is_null() ? 0.0 : 1.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t_src = grid.times[k];
        const double t_dst = grid.times[k + 1];
        guided_eps(model, traj.states[k].data(), t_src, g, eps.data(), ws);
        ddim_step(traj.states[k].data(), eps.data(), sched.alpha(t_src),
                  sched.alpha(t_dst), d, traj.states[k + 1].data());
    }
    return traj;
}

template <typename T>
std::vector<T> sdedit_encode(const std::vector<T>& x0, const std::vector<T>& eps,
                             const NoiseSchedule& sched, double r) {
    if (x0.size() != eps.size()) throw ConfigError("stochastic encode: size mismatch");
    const double a = sched.alpha(r);
    const T sa = static_cast<T>(std::sqrt(a));
    const T sn = static_cast<T>(std::sqrt(1.0 - a));
    std::vector<T> out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = sa * x0[i] + sn * eps[i];
    return out;
}

template void guided_eps<float>(const DenoiserModel<float>&, const float*, double,
                                const GuidanceSpec&, float*, DenoiserWorkspace<float>&);
template void guided_eps<double>(const DenoiserModel<double>&, const double*, double,
                                 const GuidanceSpec&, double*, DenoiserWorkspace<double>&);
template void ddim_step<float>(const float*, const float*, double, double, int, float*);
template void ddim_step<double>(const double*, const double*, double, double, int, double*);
template TrajectoryT<float> ddim_decode<float>(const DenoiserModel<float>&, const NoiseSchedule&,
                                               const std::vector<float>&, const StepGrid&,
                                               const GuidanceSpec&, DenoiserWorkspace<float>&);
template TrajectoryT<double> ddim_decode<double>(const DenoiserModel<double>&, const NoiseSchedule&,
                                                 const std::vector<double>&, const StepGrid&,
                                                 const GuidanceSpec&, DenoiserWorkspace<double>&);
template TrajectoryT<float> ddim_encode<float>(const DenoiserModel<float>&, const NoiseSchedule&,
                                               const std::vector<float>&, const StepGrid&,
                                               Condition, DenoiserWorkspace<float>&);
template TrajectoryT<double> ddim_encode<double>(const DenoiserModel<double>&, const NoiseSchedule&,
                                                 const std::vector<double>&, const StepGrid&,
                                                 Condition, DenoiserWorkspace<double>&);
template std::vector<float> sdedit_encode<float>(const std::vector<float>&, const std::vector<float>&,
                                                 const NoiseSchedule&, double);
template std::vector<double> sdedit_encode<double>(const std::vector<double>&, const std::vector<double>&,
                                                   const NoiseSchedule&, double);

}  // namespace deskdiff
