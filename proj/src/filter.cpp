#include "iqcgain/filter.hpp"

#include <stdexcept>

namespace iqcgain {

FilterRealization build_psi(int N, int m) {
    if (N < 0 || m < 1) throw std::invalid_argument("build_psi: require N >= 0, m >= 1");

    const int n_states = 2 * m * N;
    const int n_out = 2 * m * (N + 1);
    MatrixXd A = MatrixXd::Zero(n_states, n_states);
    MatrixXd B = MatrixXd::Zero(n_states, 2 * m);
    MatrixXd C = MatrixXd::Zero(n_out, n_states);
    MatrixXd D = MatrixXd::Zero(n_out, 2 * m);

    // Two shift registers: states [s^v_1 ... s^v_N, s^w_1 ... s^w_N] with
    // s_j(k) = signal(k - j).
    for (int half = 0; half < 2; ++half) {
        const int s0 = half * m * N;   // first state of this register
        const int u0 = half * m;       // input offset (v or w)
        const int r0 = half * m * (N + 1);  // output offset
        // s_1(k+1) = u(k); s_{j+1}(k+1) = s_j(k)
        if (N > 0) {
            B.block(s0, u0, m, m).setIdentity();
            for (int j = 1; j < N; ++j) {
                A.block(s0 + j * m, s0 + (j - 1) * m, m, m).setIdentity();
            }
        }
        // r block 0 is the current sample, blocks 1..N read the register.
        D.block(r0, u0, m, m).setIdentity();
        for (int j = 1; j <= N; ++j) {
            C.block(r0 + j * m, s0 + (j - 1) * m, m, m).setIdentity();
        }
    }

    FilterRealization f;
    f.N = N;
    f.m = m;
    f.psi = StateSpace(std::move(A), std::move(B), std::move(C), std::move(D),
                       {m, m}, {n_out});
    return f;
}

Trajectory stacked_output(const Trajectory& vw, int N) {
    const MatrixXd& v = vw.at("v");
    const MatrixXd& w = vw.at("w");
    if (v.rows() != w.rows()) throw std::invalid_argument("stacked_output: v and w widths differ");
    const int m = static_cast<int>(v.rows());
    const int T = vw.horizon;

    MatrixXd r = MatrixXd::Zero(2 * m * (N + 1), T + 1);
    for (int k = 0; k <= T; ++k) {
        for (int j = 0; j <= N; ++j) {
            if (k - j < 0) continue;  // zero initial condition convention
            r.block(j * m, k, m, 1) = v.col(k - j);
            r.block((N + 1 + j) * m, k, m, 1) = w.col(k - j);
        }
    }
    Trajectory out(T);
    out.set("r", std::move(r));
    return out;
}

}  // namespace iqcgain
