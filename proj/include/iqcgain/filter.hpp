#pragma once

#include "iqcgain/state_space.hpp"

namespace iqcgain {

/// FIR filter stacking the current and N delayed copies of the (v, w) pair.
/// Output at time k is
///   r(k) = [v(k); ...; v(k-N); w(k); ...; w(k-N)]
/// with zero-padding for negative time indices. States hold the delayed v
/// samples first (newest to oldest), then the delayed w samples; this
/// layout is normative: the multiplier middle matrix depends on it.
struct FilterRealization {
    int N = 0;  // horizon
    int m = 0;  // channel width
    StateSpace psi;  // 2m inputs (v; w), 2m(N+1) outputs, 2mN states

    int output_dim() const { return 2 * m * (N + 1); }
    int state_dim() const { return 2 * m * N; }
};

FilterRealization build_psi(int N, int m);

/// Reference construction of the stacked output r directly by shifting and
/// zero-padding, independent of the state-space realization. `vw` must hold
/// channels "v" and "w" of equal width.
Trajectory stacked_output(const Trajectory& vw, int N);

}  // namespace iqcgain
