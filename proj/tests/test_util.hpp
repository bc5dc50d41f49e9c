#pragma once

#include <random>

#include "iqcgain/filter.hpp"
#include "iqcgain/multiplier.hpp"
#include "iqcgain/state_space.hpp"

namespace iqcgain::testutil {

/// The two-input/two-output example plant: first-order bank feeding a
/// repeated two-wide nonlinearity, one error output e = w1-path.
inline FirstOrderGrid example_grid() {
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
    return g;
}

inline StateSpace example_plant() { return realize_first_order_bank(example_grid()); }

inline MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = gauss(rng);
    }
    return m;
}

/// Random internally stable plant with D11 = 0 and spectral radius at most
/// `rho_max`; B1 is shrunk so the loop gain stays certifiable.
inline StateSpace random_stable_plant(std::mt19937_64& rng, int nx, int m, int nd, int ne,
                                      double rho_max = 0.95, double b1_scale = 0.1) {
    MatrixXd A = random_matrix(rng, nx, nx);
    const double rho = nx > 0 ? A.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
    std::uniform_real_distribution<double> target(0.3 * rho_max, rho_max);
    if (rho > 0.0) A *= target(rng) / rho;
    MatrixXd B(nx, m + nd), C(m + ne, nx), D(m + ne, m + nd);
    B << random_matrix(rng, nx, m, b1_scale), random_matrix(rng, nx, nd);
    C << random_matrix(rng, m, nx, b1_scale), random_matrix(rng, ne, nx);
    D.setZero();
    D.block(0, m, m, nd) = random_matrix(rng, m, nd, 0.2);   // D12
    D.block(m, 0, ne, m) = random_matrix(rng, ne, m, 0.2);   // D21
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D), {m, nd}, {m, ne});
}

/// Random member of the slope-restricted multiplier class: nonpositive
/// tails, then the center diagonal lifted until every row and column sum
/// clears zero.
inline SlopeMultiplier random_slope_multiplier(std::mt19937_64& rng, int N, int m) {
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
        q.at(0)(r, r) = std::max(-row_sum, -col_sum) + mag(rng);
    }
    return q;
}

/// Random member of the ReLU multiplier class: M1 and M2 symmetric with
/// nonnegative entries, M3 nonnegative off the diagonal with a signed
/// diagonal.
inline ReluMultiplier random_relu_multiplier(std::mt19937_64& rng, int N, int m) {
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int blk = m * (N + 1);
    ReluMultiplier q;
    q.N = N;
    q.m = m;
    q.M1 = MatrixXd::Zero(blk, blk);
    q.M2 = MatrixXd::Zero(blk, blk);
    q.M3 = MatrixXd::Zero(blk, blk);
    for (int r = 0; r < blk; ++r) {
        for (int c = r; c < blk; ++c) {
            q.M1(r, c) = q.M1(c, r) = mag(rng);
            q.M2(r, c) = q.M2(c, r) = mag(rng);
        }
    }
    for (int r = 0; r < blk; ++r) {
        for (int c = 0; c < blk; ++c) {
            q.M3(r, c) = (r == c) ? gauss(rng) : mag(rng);
        }
    }
    return q;
}

/// Arrowhead coefficient families for structured ReLU members: Q1/Q2 hold
/// N+1 symmetric nonnegative blocks, Q3 holds 2N+1 blocks stored
/// oldest-negative-first with nonnegative entries away from the center
/// diagonal.
struct ReluFamilies {
    std::vector<MatrixXd> Q1, Q2, Q3;
};

inline ReluFamilies random_relu_families(std::mt19937_64& rng, int N, int m) {
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ReluFamilies f;
    f.Q1.assign(N + 1, MatrixXd::Zero(m, m));
    f.Q2.assign(N + 1, MatrixXd::Zero(m, m));
    f.Q3.assign(2 * N + 1, MatrixXd::Zero(m, m));
    for (int i = 0; i <= N; ++i) {
        for (int r = 0; r < m; ++r) {
            for (int c = r; c < m; ++c) {
                f.Q1[i](r, c) = f.Q1[i](c, r) = mag(rng);
                f.Q2[i](r, c) = f.Q2[i](c, r) = mag(rng);
            }
        }
    }
    for (int i = -N; i <= N; ++i) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                f.Q3[i + N](r, c) = (i == 0 && r == c) ? gauss(rng) : mag(rng);
            }
        }
    }
    return f;
}

/// Random slope-restricted trajectory pair: w obtained from v through a
/// randomly chosen admissible nonlinearity applied elementwise.
inline Trajectory random_slope_trajectory(std::mt19937_64& rng, int m, int T0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2);
    const int which = pick(rng);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    const double lambda = lam(rng);
    auto f = [&](double v) {
        switch (which) {
            case 0: return v >= 0.0 ? v : 0.0;                  // relu
            case 1: return std::clamp(v, -1.0, 1.0);            // saturation
            default: return lambda * v;                          // scaled identity
        }
    };
    MatrixXd v(m, T0 + 1), w(m, T0 + 1);
    for (int k = 0; k <= T0; ++k) {
        for (int i = 0; i < m; ++i) {
            v(i, k) = gauss(rng);
            w(i, k) = f(v(i, k));
        }
    }
    Trajectory vw(T0);
    vw.set("v", std::move(v));
    vw.set("w", std::move(w));
    return vw;
}

}  // namespace iqcgain::testutil
