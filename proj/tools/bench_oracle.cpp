// Benchmark the OpenMP sampling kernels against their serial references and
// confirm both produce identical results.

#include <chrono>
#include <cstdio>
#include <random>

#include "iqcgain/oracle.hpp"

using namespace iqcgain;

namespace {

StateSpace bench_plant() {
    FirstOrderGrid g;
    g.rows = 3;
    g.cols = 4;
    g.entries = {
        FirstOrderTerm::first_order(-0.13, 0.98), FirstOrderTerm::first_order(0.21, 0.92),
        FirstOrderTerm::constant(1.0),            FirstOrderTerm::constant(0.0),
        FirstOrderTerm::first_order(-0.3, 0.97),  FirstOrderTerm::first_order(-0.1, 0.91),
        FirstOrderTerm::constant(0.0),            FirstOrderTerm::constant(1.0),
        FirstOrderTerm::constant(1.0),            FirstOrderTerm::constant(0.0),
        FirstOrderTerm::constant(0.0),            FirstOrderTerm::constant(0.0),
    };
    g.input_partition = {2, 2};
    g.output_partition = {2, 1};
    return realize_first_order_bank(g);
}

template <typename F>
double time_seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SlopeMultiplier sample_multiplier(std::mt19937_64& rng, int N, int m) {
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    SlopeMultiplier q;
    q.N = N;
    q.m = m;
    q.Q.assign(2 * N + 1, MatrixXd::Zero(m, m));
    for (int i = -N; i <= N; ++i) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                if (i != 0 || r != c) q.at(i)(r, c) = -mag(rng);
            }
        }
    }
    for (int r = 0; r < m; ++r) {
        double row_sum = 0.0, col_sum = 0.0;
        for (int i = -N; i <= N; ++i) {
            row_sum += q.at(i).row(r).sum();
            col_sum += q.at(i).col(r).sum();
        }
        q.at(0)(r, r) = std::max(-row_sum, -col_sum) + 1.0;
    }
    return q;
}

}  // namespace

int main() {
    std::mt19937_64 rng(1);
    const StateSpace plant = bench_plant();
    const MiddleMatrix M = assemble_slope_M(sample_multiplier(rng, 3, 2));

    const int trials = 4000, T0max = 40;
    IqcCheckReport rs, rp;
    const double ts = time_seconds([&] {
        rs = check_hard_iqc_serial(NonlinearityKind::relu(), M, trials, T0max, 7);
    });
    const double tp = time_seconds([&] {
        rp = check_hard_iqc(NonlinearityKind::relu(), M, trials, T0max, 7);
    });
    std::printf("hard-iqc check, %d trials x T0=%d\n", trials, T0max);
    std::printf("  serial   %8.3f s   min %.3e\n", ts, rs.min_normalized);
    std::printf("  parallel %8.3f s   min %.3e   speedup %.2fx   %s\n", tp, rp.min_normalized,
                ts / tp, rs.min_partial_sum == rp.min_partial_sum ? "identical" : "MISMATCH");

    const int budget = 2000;
    EmpiricalGainResult gs, gp;
    const double gts = time_seconds([&] {
        gs = empirical_gain_serial(plant, NonlinearityKind::relu(),
                                   GainSearchStrategy::RandomGaussian, budget, 7, 60);
    });
    const double gtp = time_seconds([&] {
        gp = empirical_gain(plant, NonlinearityKind::relu(), GainSearchStrategy::RandomGaussian,
                            budget, 7, 60);
    });
    std::printf("empirical gain search, %d samples\n", budget);
    std::printf("  serial   %8.3f s   bound %.6f\n", gts, gs.lower_bound);
    std::printf("  parallel %8.3f s   bound %.6f   speedup %.2fx   %s\n", gtp, gp.lower_bound,
                gts / gtp, gs.lower_bound == gp.lower_bound ? "identical" : "MISMATCH");

    const bool ok = rs.min_partial_sum == rp.min_partial_sum && gs.lower_bound == gp.lower_bound;
    return ok ? 0 : 1;
}
