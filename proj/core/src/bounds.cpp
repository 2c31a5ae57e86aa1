// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deskdiff/assignment.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/parallel.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/sampler.hpp"
#include "deskdiff/stats.hpp"

namespace deskdiff {

namespace {

constexpr int kK1Pairs = 200;          // random perturbation quotients
constexpr int kK1PowerPoints = 50;     // points receiving power iteration
constexpr int kK1PowerIters = 15;
constexpr double kUntrainedFloor = 1e-6;

double norm2(const double* v, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

int draw_query(Rng& rng, int n_classes, int source) {
    int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes - 1)));
    if (q >= source) ++q;
    return q;
}

// Encode grid to max(t_grid) that passes through every marker time exactly.
StepGrid merged_grid(const std::vector<double>& markers, int fine_steps) {
    const double t_max = markers.back();
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(fine_steps) + markers.size() + 1);
    for (int i = 0; i <= fine_steps; ++i)
        times.push_back(t_max * static_cast<double>(i) / fine_steps);
    times.insert(times.end(), markers.begin(), markers.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());
    StepGrid grid;
    grid.times = times;
    grid.n_steps = static_cast<int>(times.size()) - 1;
    return grid;
}

std::size_t grid_index_of(const StepGrid& grid, double t) {
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        if (std::abs(grid.times[i] - t) < 1e-12) return i;
    throw NumericError("constants: marker time missing from encode grid");
}

}  // namespace

double sdedit_bound(double tau, double C) {
    if (tau < 0.0) throw ConfigError("bound: tau must be >= 0");
    return (C + 1.0) * tau;
}

double diffedit_bound(double tau, double K1, double K2) {
    if (tau < 0.0) throw ConfigError("bound: tau must be >= 0");
    const double root = std::sqrt(tau * tau + 1.0);
    return K2 * tau / root * std::pow(tau + root, K1);
}

std::optional<double> bounds_crossover_tau(double C, double K1, double K2,
                                           double tau_max) {
    const auto gap = [&](double tau) {
        return diffedit_bound(tau, K1, K2) - sdedit_bound(tau, C);
    };
    // Scan for a sign change on a fixed grid, then bisect.
    constexpr int kScan = 4000;
    double prev_tau = tau_max / kScan;
    double prev = gap(prev_tau);
    if (prev >= 0.0) return std::nullopt;  // second bound never starts tighter
    for (int i = 2; i <= kScan; ++i) {
        const double tau = tau_max * static_cast<double>(i) / kScan;
        const double g = gap(tau);
        if (g >= 0.0) {
            double lo = prev_tau, hi = tau;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (gap(mid) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev_tau = tau;
        prev = g;
    }
    return std::nullopt;
}

BoundConstants estimate_constants(const Denoiser& model, const NoiseSchedule& sched,
                                  const std::vector<Sample>& data, int n_samples,
                                  const std::vector<double>& t_grid, std::uint64_t seed) {
    if (n_samples < 100) throw ConfigError("constants: need n_samples >= 100");
    if (data.empty()) throw ConfigError("constants: empty dataset");
    std::vector<double> markers = t_grid;
    std::sort(markers.begin(), markers.end());
    markers.erase(std::unique(markers.begin(), markers.end()), markers.end());
    if (markers.empty() || markers.front() <= 0.0 || markers.back() > 1.0)
        throw ConfigError("constants: t_grid values must lie in (0, 1]");

    const DenoiserModel<double> m64 = widen_to_f64(model);
    const int d = m64.data_dim;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    const StepGrid grid = merged_grid(markers, 200);
    std::vector<std::size_t> marker_idx;
    for (double t : markers) marker_idx.push_back(grid_index_of(grid, t));

    BoundConstants out;
    out.n_samples = n_samples;
    out.t_grid = markers;
    out.k1_pairs = kK1Pairs;
    out.k1_power_points = kK1PowerPoints;

    DenoiserWorkspace<double> ws;
    const std::size_t n_states = grid.size();
    std::vector<double> batch(n_states * static_cast<std::size_t>(d));
    std::vector<double> pred(batch.size());
    std::vector<Condition> conds(n_states);
    std::vector<double> k2_per_sample;
    // Pool of (state, time) pairs feeding the Lipschitz estimators.
    std::vector<std::vector<double>> pool_x;
    std::vector<double> pool_t;

    for (int i = 0; i < n_samples; ++i) {
        const Sample& s = data[static_cast<std::size_t>(i) % data.size()];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const int query = draw_query(rng, m64.n_classes, s.label);
        std::vector<double> x0(s.data.begin(), s.data.end());
        const TrajectoryT<double> enc =
            ddim_encode(m64, sched, x0, grid, Condition::none(), ws);

        // Conditional estimates at every trajectory state in one batch.
        for (std::size_t k = 0; k < n_states; ++k) {
            std::copy(enc.states[k].begin(), enc.states[k].end(),
                      batch.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(d)));
            conds[k] = Condition::of(query);
        }
        denoiser_forward(m64, batch.data(), grid.times.data(), conds.data(),
                         static_cast<int>(n_states), pred.data(), ws);
        for (std::size_t k = 0; k < n_states; ++k)
            out.C = std::max(out.C,
                             norm2(pred.data() + k * static_cast<std::size_t>(d), d) / sqrt_d);

        // Unconditional estimates at the marker states only.
        std::vector<double> mk_batch(marker_idx.size() * static_cast<std::size_t>(d));
        std::vector<double> mk_t(marker_idx.size());
        std::vector<Condition> mk_cond(marker_idx.size(), Condition::none());
        for (std::size_t j = 0; j < marker_idx.size(); ++j) {
            const std::size_t k = marker_idx[j];
            std::copy(enc.states[k].begin(), enc.states[k].end(),
                      mk_batch.begin() + static_cast<std::ptrdiff_t>(j * static_cast<std::size_t>(d)));
            mk_t[j] = grid.times[k];
        }
        std::vector<double> mk_pred(mk_batch.size());
        denoiser_forward(m64, mk_batch.data(), mk_t.data(), mk_cond.data(),
                         static_cast<int>(marker_idx.size()), mk_pred.data(), ws);
        double kappa = 0.0;
        for (std::size_t j = 0; j < marker_idx.size(); ++j) {
            const std::size_t k = marker_idx[j];
            double gap2 = 0.0;
            for (int ii = 0; ii < d; ++ii) {
                const double diff = pred[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(ii)] -
                                    mk_pred[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(ii)];
                gap2 += diff * diff;
            }
            kappa = std::max(kappa, std::sqrt(gap2) / sqrt_d);
        }
        k2_per_sample.push_back(kappa);

        for (std::size_t j = 0; j < marker_idx.size(); ++j) {
            pool_x.push_back(enc.states[marker_idx[j]]);
            pool_t.push_back(grid.times[marker_idx[j]]);
        }
    }
    out.K2 = mean(k2_per_sample);

    // Lipschitz constant of the unconditional branch. Both estimators probe
    // from trajectory states, so the result is a lower bound by construction.
    const auto eval_u = [&](const std::vector<double>& x, double t, std::vector<double>& e) {
        const Condition c = Condition::none();
        e.resize(static_cast<std::size_t>(d));
        denoiser_forward(m64, x.data(), &t, &c, 1, e.data(), ws);
    };
    Rng k1_rng(derive_seed(seed, seed_tag::kNoise));
    std::vector<double> e0, e1, xp;
    for (int p = 0; p < kK1Pairs; ++p) {
        const std::size_t j = k1_rng.uniform_int(pool_x.size());
        std::vector<double> dir(static_cast<std::size_t>(d));
        for (auto& v : dir) v = k1_rng.normal();
        const double len = norm2(dir.data(), d);
        if (len < 1e-12) continue;
        const double delta = std::pow(10.0, -2.0 + 2.0 * k1_rng.uniform());
        xp = pool_x[j];
        for (int ii = 0; ii < d; ++ii) xp[static_cast<std::size_t>(ii)] += delta * dir[static_cast<std::size_t>(ii)] / len;
        eval_u(pool_x[j], pool_t[j], e0);
        eval_u(xp, pool_t[j], e1);
        for (int ii = 0; ii < d; ++ii) e1[static_cast<std::size_t>(ii)] -= e0[static_cast<std::size_t>(ii)];
        out.K1 = std::max(out.K1, norm2(e1.data(), d) / delta);
    }

    // Power iteration on J^T J at a spread of pool points: J v by central
    // differences, J^T w by the exact backward pass.
    std::vector<double> grad(m64.param_count());
    const std::size_t stride = std::max<std::size_t>(1, pool_x.size() / kK1PowerPoints);
    int power_points = 0;
    for (std::size_t j = 0; j < pool_x.size() && power_points < kK1PowerPoints; j += stride, ++power_points) {
        const std::vector<double>& x = pool_x[j];
        const double t = pool_t[j];
        std::vector<double> v(static_cast<std::size_t>(d));
        for (auto& vv : v) vv = k1_rng.normal();
        double lambda = 0.0;
        for (int it = 0; it < kK1PowerIters; ++it) {
            const double vlen = norm2(v.data(), d);
            if (vlen < 1e-30) break;
            for (auto& vv : v) vv /= vlen;
            const double h = 1e-6 * (1.0 + norm2(x.data(), d));
            std::vector<double> xa = x, xb = x;
            for (int ii = 0; ii < d; ++ii) {
                xa[static_cast<std::size_t>(ii)] += h * v[static_cast<std::size_t>(ii)];
                xb[static_cast<std::size_t>(ii)] -= h * v[static_cast<std::size_t>(ii)];
            }
            eval_u(xa, t, e0);
            eval_u(xb, t, e1);
            std::vector<double> w(static_cast<std::size_t>(d));
            for (int ii = 0; ii < d; ++ii)
                w[static_cast<std::size_t>(ii)] =
                    (e0[static_cast<std::size_t>(ii)] - e1[static_cast<std::size_t>(ii)]) / (2.0 * h);
            // Backward needs a fresh forward at x itself.
            eval_u(x, t, e0);
            std::fill(grad.begin(), grad.end(), 0.0);
            const Condition c = Condition::none();
            std::vector<double> gx(static_cast<std::size_t>(d));
            denoiser_backward(m64, x.data(), &t, &c, 1, w.data(), grad, gx.data(), ws);
            lambda = 0.0;
            for (int ii = 0; ii < d; ++ii) lambda += v[static_cast<std::size_t>(ii)] * gx[static_cast<std::size_t>(ii)];
            v = gx;
        }
        if (lambda > 0.0) out.K1 = std::max(out.K1, std::sqrt(lambda));
    }

    if (out.C < kUntrainedFloor)
        out.note = "untrained model: constants vacuous";
    else
        out.note = "Lipschitz estimates are lower bounds";
    return out;
}

BoundCurve empirical_curve(const Denoiser& model, const NoiseSchedule& sched,
                           const std::vector<Sample>& data,
                           const BoundConstants& constants,
                           const std::vector<double>& r_grid, int n_mc, int n_steps,
                           std::uint64_t seed, int jobs) {
    if (data.empty()) throw ConfigError("curve: empty dataset");
    if (n_mc < 1 || n_steps < 1) throw ConfigError("curve: invalid n_mc/n_steps");
    const int d = model.data_dim;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    BoundCurve curve;
    curve.n_mc = n_mc;
    curve.n_steps = n_steps;

    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        const double r = r_grid[ri];
        const StepGrid grid = sched.make_grid(r, n_steps);
        std::vector<double> dist_sd(static_cast<std::size_t>(n_mc));
        std::vector<double> dist_ed(static_cast<std::size_t>(n_mc));
        parallel_for(n_mc, jobs, [&](int i) {
            // Per-index draws: query class first, then the stochastic start.
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ri),
                                static_cast<std::uint64_t>(i)));
            const Sample& s = data[static_cast<std::size_t>(i) % data.size()];
            const int query = draw_query(rng, model.n_classes, s.label);
            std::vector<float> eps(static_cast<std::size_t>(d));
            for (auto& v : eps) v = rng.normal_f();

            DenoiserWorkspace<float> ws;
            GuidanceSpec g;
            g.cond = Condition::of(query);
            g.lambda = 1.0;  // the bounds are stated for the plain conditional decoder
            const auto distance = [&](const std::vector<float>& out) {
                double acc = 0.0;
                for (int ii = 0; ii < d; ++ii) {
                    const double diff = static_cast<double>(out[static_cast<std::size_t>(ii)]) -
                                        static_cast<double>(s.data[static_cast<std::size_t>(ii)]);
                    acc += diff * diff;
                }
                return std::sqrt(acc) / sqrt_d;
            };

            const std::vector<float> start_sd = sdedit_encode(s.data, eps, sched, r);
            const Trajectory dec_sd = ddim_decode(model, sched, start_sd, grid, g, ws);
            dist_sd[static_cast<std::size_t>(i)] = distance(dec_sd.states.front());

            const Trajectory enc =
                ddim_encode(model, sched, s.data, grid, Condition::none(), ws);
            const Trajectory dec_ed =
                ddim_decode(model, sched, enc.states.back(), grid, g, ws);
            dist_ed[static_cast<std::size_t>(i)] = distance(dec_ed.states.front());
        });

        BoundCurvePoint p;
        p.r = r;
        p.tau = sched.tau(r);
        p.bound_sdedit = sdedit_bound(p.tau, constants.C);
        p.bound_diffedit = diffedit_bound(p.tau, constants.K1, constants.K2);
        p.emp_sdedit = mean(dist_sd);
        p.emp_encdec = mean(dist_ed);
        p.se_sdedit = standard_error(dist_sd);
        p.se_encdec = standard_error(dist_ed);
        curve.points.push_back(p);
    }
    return curve;
}

OtReport ot_defect(const Denoiser& model, const NoiseSchedule& sched,
                   const DatasetSpec& spec2d, double r, int n_points, int n_steps,
                   std::uint64_t seed) {
    if (spec2d.shape().size() != 2) throw ConfigError("ot: requires the 2-D dataset");
    if (n_points < 1 || n_points > 2000)
        throw ConfigError("ot: n_points must lie in [1, 2000]");
    OtReport report;
    report.r = r;
    report.n_points = n_points;
    if (r == 0.0 || sched.alpha(r) >= 1.0) return report;  // identity transport

    const int d = 2;
    DatasetSpec spec = spec2d;
    spec.size = n_points;

    // Encoder cost on one set of draws.
    spec.seed = derive_seed(seed, 1);
    const std::vector<Sample> enc_set = generate(spec);
    const StepGrid grid = sched.make_grid(r, n_steps);
    DenoiserWorkspace<float> ws;
    std::vector<double> costs(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const Trajectory enc = ddim_encode(model, sched, enc_set[static_cast<std::size_t>(i)].data,
                                           grid, Condition::none(), ws);
        double c = 0.0;
        for (int ii = 0; ii < d; ++ii) {
            const double diff = static_cast<double>(enc.states.back()[static_cast<std::size_t>(ii)]) -
                                static_cast<double>(enc_set[static_cast<std::size_t>(i)].data[static_cast<std::size_t>(ii)]);
            c += diff * diff;
        }
        costs[static_cast<std::size_t>(i)] = c;
    }
    report.encoder_cost = mean(costs);
    report.encoder_se = standard_error(costs);

    // Exact assignment between fresh draws of the data and of the noised
    // marginal (drawn from a third independent set).
    spec.seed = derive_seed(seed, 2);
    const std::vector<Sample> cloud_a = generate(spec);
    spec.seed = derive_seed(seed, 3);
    const std::vector<Sample> cloud_b0 = generate(spec);
    Rng noise_rng(derive_seed(seed, 4));
    const double a = sched.alpha(r);
    const double sa = std::sqrt(a);
    const double sn = std::sqrt(1.0 - a);
    std::vector<double> cloud_b(static_cast<std::size_t>(n_points) * d);
    for (int i = 0; i < n_points; ++i)
        for (int ii = 0; ii < d; ++ii)
            cloud_b[static_cast<std::size_t>(i * d + ii)] =
                sa * static_cast<double>(cloud_b0[static_cast<std::size_t>(i)].data[static_cast<std::size_t>(ii)]) +
                sn * noise_rng.normal();

    std::vector<double> cost(static_cast<std::size_t>(n_points) * static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        for (int j = 0; j < n_points; ++j) {
            double c = 0.0;
            for (int ii = 0; ii < d; ++ii) {
                const double diff = static_cast<double>(cloud_a[static_cast<std::size_t>(i)].data[static_cast<std::size_t>(ii)]) -
                                    cloud_b[static_cast<std::size_t>(j * d + ii)];
                c += diff * diff;
            }
            cost[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_points) +
                 static_cast<std::size_t>(j)] = c;
        }
    }
    const AssignmentResult assignment =
        solve_assignment(cost, static_cast<std::size_t>(n_points));
    report.ot_cost = assignment.total_cost / static_cast<double>(n_points);
    if (report.ot_cost < 1e-15)
        report.ratio = report.encoder_cost < 1e-15 ? 1.0
                                                   : std::numeric_limits<double>::infinity();
    else
        report.ratio = report.encoder_cost / report.ot_cost;
    return report;
}

double gaussian_w2_squared(const std::vector<double>& m1, double s1,
                           const std::vector<double>& m2, double s2) {
    if (m1.size() != m2.size()) throw ConfigError("w2: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < m1.size(); ++i) sq += (m1[i] - m2[i]) * (m1[i] - m2[i]);
    const double ds = s1 - s2;
    return sq + static_cast<double>(m1.size()) * ds * ds;
}

}  // namespace deskdiff
