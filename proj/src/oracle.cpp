#include "iqcgain/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "iqcgain/filter.hpp"

namespace iqcgain {

double NonlinearityKind::apply_scalar(double v) const {
    switch (tag) {
        case Tag::Relu: return v >= 0.0 ? v : 0.0;
        case Tag::Saturation: return std::clamp(v, -1.0, 1.0);
        case Tag::ScaledIdentity: return lambda * v;
        case Tag::Tanh: return std::tanh(v);
    }
    return 0.0;
}

VectorXd NonlinearityKind::apply(const VectorXd& v) const {
    VectorXd w(v.size());
    for (int i = 0; i < v.size(); ++i) w(i) = apply_scalar(v(i));
    return w;
}

Trajectory simulate_loop(const StateSpace& plant, const NonlinearityKind& nl,
                         const Trajectory& d, const VectorXd& x0) {
    PlantBlocks g = plant_blocks(plant);
    if (g.D11.cwiseAbs().maxCoeff() != 0.0) {
        throw std::invalid_argument("simulate_loop: D11 must be zero (implicit loop not supported)");
    }
    const MatrixXd& dd = d.at("d");
    if (dd.rows() != g.nd) throw std::invalid_argument("simulate_loop: disturbance width mismatch");
    if (x0.size() != g.nx) throw std::invalid_argument("simulate_loop: x0 length mismatch");

    const int T = d.horizon;
    MatrixXd x(g.nx, T + 1), v(g.m, T + 1), w(g.m, T + 1), e(g.ne, T + 1);
    VectorXd xk = x0;
    for (int k = 0; k <= T; ++k) {
        x.col(k) = xk;
        v.col(k) = g.C1 * xk + g.D12 * dd.col(k);
        w.col(k) = nl.apply(v.col(k));
        e.col(k) = g.C2 * xk + g.D21 * w.col(k) + g.D22 * dd.col(k);
        xk = g.A * xk + g.B1 * w.col(k) + g.B2 * dd.col(k);
    }
    Trajectory out(T);
    out.set("x", std::move(x));
    out.set("v", std::move(v));
    out.set("w", std::move(w));
    out.set("e", std::move(e));
    return out;
}

namespace {

struct TrialResult {
    double min_sum = 0.0;
    double min_normalized = 0.0;
    int worst_T0 = -1;
};

TrialResult run_iqc_trial(const NonlinearityKind& nl, const MiddleMatrix& M,
                          int T0max, std::uint64_t trial_seed) {
    std::mt19937_64 rng(trial_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int m = M.m;

    Trajectory vw(T0max);
    MatrixXd v(m, T0max + 1), w(m, T0max + 1);
    for (int k = 0; k <= T0max; ++k) {
        for (int i = 0; i < m; ++i) v(i, k) = gauss(rng);
        w.col(k) = nl.apply(v.col(k));
    }
    const double energy = v.squaredNorm() + w.squaredNorm();
    vw.set("v", std::move(v));
    vw.set("w", std::move(w));
    const Trajectory stacked = stacked_output(vw, M.N);
    const MatrixXd& r = stacked.at("r");

    TrialResult res;
    double partial = 0.0;
    res.min_sum = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= T0max; ++k) {
        partial += r.col(k).dot(M.M * r.col(k));
        if (partial < res.min_sum) {
            res.min_sum = partial;
            res.worst_T0 = k;
        }
    }
    res.min_normalized = res.min_sum / std::max(energy, 1e-300);
    return res;
}

IqcCheckReport reduce_iqc_trials(const NonlinearityKind& nl, const MiddleMatrix& M,
                                 int trials, int T0max, std::uint64_t seed, bool parallel) {
    IqcCheckReport rep;
    rep.seed = seed;
    rep.trials = trials;
    rep.min_partial_sum = std::numeric_limits<double>::infinity();
    rep.min_normalized = std::numeric_limits<double>::infinity();

    if (parallel) {
#pragma omp parallel
        {
            IqcCheckReport local = rep;
#pragma omp for schedule(static)
            for (int t = 0; t < trials; ++t) {
                TrialResult r = run_iqc_trial(nl, M, T0max, seed + static_cast<std::uint64_t>(t));
                if (r.min_sum < local.min_partial_sum) {
                    local.min_partial_sum = r.min_sum;
                    local.worst_trial = t;
                    local.worst_T0 = r.worst_T0;
                }
                local.min_normalized = std::min(local.min_normalized, r.min_normalized);
            }
#pragma omp critical
            {
                if (local.min_partial_sum < rep.min_partial_sum) {
                    rep.min_partial_sum = local.min_partial_sum;
                    rep.worst_trial = local.worst_trial;
                    rep.worst_T0 = local.worst_T0;
                }
                rep.min_normalized = std::min(rep.min_normalized, local.min_normalized);
            }
        }
    } else {
        for (int t = 0; t < trials; ++t) {
            TrialResult r = run_iqc_trial(nl, M, T0max, seed + static_cast<std::uint64_t>(t));
            if (r.min_sum < rep.min_partial_sum) {
                rep.min_partial_sum = r.min_sum;
                rep.worst_trial = t;
                rep.worst_T0 = r.worst_T0;
            }
            rep.min_normalized = std::min(rep.min_normalized, r.min_normalized);
        }
    }
    return rep;
}

}  // namespace

IqcCheckReport check_hard_iqc(const NonlinearityKind& nl, const MiddleMatrix& M,
                              int trials, int T0max, std::uint64_t seed) {
    return reduce_iqc_trials(nl, M, trials, T0max, seed, true);
}

IqcCheckReport check_hard_iqc_serial(const NonlinearityKind& nl, const MiddleMatrix& M,
                                     int trials, int T0max, std::uint64_t seed) {
    return reduce_iqc_trials(nl, M, trials, T0max, seed, false);
}

namespace {

double gain_ratio(const StateSpace& plant, const NonlinearityKind& nl, const MatrixXd& d) {
    const int T = static_cast<int>(d.cols()) - 1;
    Trajectory dist(T);
    dist.set("d", d);
    Trajectory out = simulate_loop(plant, nl, dist, VectorXd::Zero(plant.nx()));
    const double dn = d.norm();
    if (dn == 0.0) return 0.0;
    return out.at("e").norm() / dn;
}

MatrixXd sample_disturbance(GainSearchStrategy strategy, int nd, int horizon,
                            int index, int budget, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Zero-padded tail lets the closed-loop response ring out, tightening
    // the lower bound.
    const int active = std::max(1, horizon / 2);
    MatrixXd d = MatrixXd::Zero(nd, horizon + 1);
    if (strategy == GainSearchStrategy::SinusoidGrid) {
        const int per_channel = std::max(1, budget / std::max(1, nd));
        const int ch = (index / per_channel) % std::max(1, nd);
        const int fi = index % per_channel;
        const double theta = M_PI * fi / std::max(1, per_channel - 1);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
        const double ph = phase(rng);
        for (int k = 0; k < active; ++k) d(ch, k) = std::cos(theta * k + ph);
    } else {
        for (int k = 0; k < active; ++k) {
            for (int i = 0; i < nd; ++i) d(i, k) = gauss(rng);
        }
    }
    return d;
}

double ascend(const StateSpace& plant, const NonlinearityKind& nl, MatrixXd d,
              std::mt19937_64& rng, int steps) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = gain_ratio(plant, nl, d);
    double scale = 0.5 * std::max(1e-12, d.norm());
    for (int s = 0; s < steps; ++s) {
        MatrixXd trial = d;
        const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(d.cols()));
        for (int i = 0; i < d.rows(); ++i) trial(i, k) += scale * gauss(rng);
        const double val = gain_ratio(plant, nl, trial);
        if (val > best) {
            best = val;
            d = trial;
        } else {
            scale *= 0.97;
        }
    }
    return best;
}

EmpiricalGainResult empirical_gain_impl(const StateSpace& plant, const NonlinearityKind& nl,
                                        GainSearchStrategy strategy, int budget,
                                        std::uint64_t seed, int horizon, bool parallel) {
    PlantBlocks g = plant_blocks(plant);
    EmpiricalGainResult res;
    res.samples = budget;
    res.seed = seed;

    if (strategy == GainSearchStrategy::CoordinateAscent) {
        // A handful of random starts, most of the budget spent climbing.
        const int starts = std::max(1, budget / 500);
        const int steps = budget / starts;
        double best = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : best) if (parallel)
        for (int s = 0; s < starts; ++s) {
            std::mt19937_64 rng(seed + 7919 * static_cast<std::uint64_t>(s));
            MatrixXd d = sample_disturbance(GainSearchStrategy::RandomGaussian, g.nd,
                                            horizon, s, starts, rng);
            best = std::max(best, ascend(plant, nl, d, rng, steps));
        }
        res.lower_bound = best;
        return res;
    }

    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best) if (parallel)
    for (int i = 0; i < budget; ++i) {
        std::mt19937_64 rng(seed + 7919 * static_cast<std::uint64_t>(i));
        MatrixXd d = sample_disturbance(strategy, g.nd, horizon, i, budget, rng);
        best = std::max(best, gain_ratio(plant, nl, d));
    }
    res.lower_bound = best;
    return res;
}

}  // namespace

EmpiricalGainResult empirical_gain(const StateSpace& plant, const NonlinearityKind& nl,
                                   GainSearchStrategy strategy, int budget,
                                   std::uint64_t seed, int horizon) {
    return empirical_gain_impl(plant, nl, strategy, budget, seed, horizon, true);
}

EmpiricalGainResult empirical_gain_serial(const StateSpace& plant, const NonlinearityKind& nl,
                                          GainSearchStrategy strategy, int budget,
                                          std::uint64_t seed, int horizon) {
    return empirical_gain_impl(plant, nl, strategy, budget, seed, horizon, false);
}

}  // namespace iqcgain
