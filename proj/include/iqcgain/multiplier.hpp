#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iqcgain/state_space.hpp"

namespace iqcgain {

/// Coefficient family {Q_i}_{i=-N}^{N} for the slope-restricted multiplier
/// class. Lists are stored oldest-negative-index-first: q[i + N] holds Q_i.
struct SlopeMultiplier {
    int N = 0;
    int m = 0;
    std::vector<MatrixXd> Q;  // 2N+1 matrices of size m x m

    const MatrixXd& at(int i) const { return Q.at(i + N); }
    MatrixXd& at(int i) { return Q.at(i + N); }
};

/// ReLU multiplier class over the stacked window of size m(N+1): M1 and
/// M2 symmetric entrywise nonnegative, M3 Metzler (off-diagonal entries
/// nonnegative, diagonal free). Soundness rests on the window vectors
/// w >= 0 and w - v >= 0 holding entrywise for ReLU, with w_i(v_i - w_i)
/// = 0 per sample freeing the M3 diagonal.
struct ReluMultiplier {
    int N = 0;
    int m = 0;
    MatrixXd M1;  // m(N+1) x m(N+1)
    MatrixXd M2;
    MatrixXd M3;
};

enum class MultiplierKind { Slope, Relu };

/// Assembled symmetric middle matrix of size 2m(N+1), with provenance.
struct MiddleMatrix {
    MatrixXd M;
    MultiplierKind kind;
    int N = 0;
    int m = 0;
};

/// Validate class membership. Returns the list of violated conditions
/// (empty means valid). `slack` relaxes every sign comparison; user input
/// is checked with slack 0, solver output with a small positive slack.
std::vector<std::string> validate(const SlopeMultiplier& q, double slack = 0.0);
std::vector<std::string> validate(const ReluMultiplier& q, double slack = 0.0);

/// Middle matrix M = [0, M0^T; M0, -(M0+M0^T)] with M0 the arrowhead
/// block matrix built from {Q_i}. Throws if the class conditions fail.
MiddleMatrix assemble_slope_M(const SlopeMultiplier& q, double slack = 0.0);

/// Middle matrix M = [M1, -M3^T-M1; -M3-M1, M1+M2+M3+M3^T]. Throws if
/// the class conditions fail.
MiddleMatrix assemble_relu_M(const ReluMultiplier& q, double slack = 0.0);

/// Structured ReLU member from arrowhead coefficient families: M1 and M2
/// get {Q1_i} resp. {Q2_i} (i = 0..N, symmetric) along their first block
/// row and column, M3 gets {Q3_i} (i = -N..N) with Q3_i in the first
/// block row for i >= 0 and the first block column for i < 0. Q3 is
/// stored oldest-negative-first: q3[i + N] holds Q3_i.
ReluMultiplier relu_from_families(int N, int m, const std::vector<MatrixXd>& q1,
                                  const std::vector<MatrixXd>& q2,
                                  const std::vector<MatrixXd>& q3);

/// Banded block-Toeplitz matrix of size (T0+1)m with block (r,c) equal to
/// Q_{c-r} when |c-r| <= N and zero otherwise. `q` holds 2N+1 blocks,
/// oldest-negative-first.
MatrixXd block_toeplitz(const std::vector<MatrixXd>& q, int m, int T0);

// Families with one-sided index lists (Q1/Q2, i = 0..N) extend
// symmetrically: Q_{-i} := Q_i.
MatrixXd block_toeplitz_symmetric(const std::vector<MatrixXd>& q, int m, int T0);

bool is_doubly_hyperdominant(const MatrixXd& M, double slack = 0.0);
bool is_metzler(const MatrixXd& M, double slack = 0.0);
bool is_symmetric_nonnegative(const MatrixXd& M, double slack = 0.0);

/// A valid slope family maps into the ReLU class with M1 = M2 = 0 and
/// M3 the negated arrowhead of {Q_i}, reproducing the same middle matrix.
ReluMultiplier embed_slope_in_relu(const SlopeMultiplier& q);

/// Linear parameterization of a multiplier class for SDP assembly: a list
/// of free scalars, the symmetric middle-matrix basis contribution of each
/// scalar, and the elementwise sign constraints as linear inequalities
/// sum_k a_k x_k >= 0 over those scalars.
struct MultiplierParam {
    MultiplierKind kind;
    int N = 0;
    int m = 0;
    int num_vars = 0;
    std::vector<MatrixXd> basis;  // dM per free scalar, size 2m(N+1)
    struct LinIneq {
        std::vector<std::pair<int, double>> terms;
        std::string label;
    };
    std::vector<LinIneq> inequalities;

    static MultiplierParam make(MultiplierKind kind, int N, int m);

    /// Recover the structured coefficient families from a free-scalar vector.
    SlopeMultiplier to_slope(const VectorXd& x) const;
    ReluMultiplier to_relu(const VectorXd& x) const;
    MiddleMatrix to_middle(const VectorXd& x, double slack) const;
};

}  // namespace iqcgain
