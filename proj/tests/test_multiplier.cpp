#include <random>

#include "doctest.h"
#include "iqcgain/filter.hpp"
#include "iqcgain/multiplier.hpp"
#include "test_util.hpp"

using namespace iqcgain;
using testutil::random_relu_multiplier;
using testutil::random_slope_multiplier;
using testutil::random_slope_trajectory;

namespace {

// Time-reversed stacking: row block r of the result is sig(T0 - r).
VectorXd reverse_stack(const MatrixXd& sig) {
    const int m = static_cast<int>(sig.rows());
    const int T0 = static_cast<int>(sig.cols()) - 1;
    VectorXd out(m * (T0 + 1));
    for (int r = 0; r <= T0; ++r) out.segment(r * m, m) = sig.col(T0 - r);
    return out;
}

double stacked_quadratic_sum(const Trajectory& vw, const MiddleMatrix& M) {
    const MatrixXd r = stacked_output(vw, M.N).at("r");
    double total = 0.0;
    for (int k = 0; k <= vw.horizon; ++k) total += r.col(k).dot(M.M * r.col(k));
    return total;
}

}  // namespace

TEST_CASE("slope middle matrix, N = 1, m = 1, center-only family") {
    SlopeMultiplier q;
    q.N = 1;
    q.m = 1;
    q.Q = {MatrixXd::Zero(1, 1), MatrixXd::Constant(1, 1, 1.0), MatrixXd::Zero(1, 1)};
    const MiddleMatrix mm = assemble_slope_M(q);
    MatrixXd expect(4, 4);
    expect << 0, 0, 1, 0,
              0, 0, 0, 0,
              1, 0, -2, 0,
              0, 0, 0, 0;
    CHECK((mm.M - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("slope middle matrix, N = 1, m = 1, second-difference family") {
    SlopeMultiplier q;
    q.N = 1;
    q.m = 1;
    q.Q = {MatrixXd::Constant(1, 1, -1.0), MatrixXd::Constant(1, 1, 2.0),
           MatrixXd::Constant(1, 1, -1.0)};
    CHECK(validate(q).empty());
    const MiddleMatrix mm = assemble_slope_M(q);
    MatrixXd expect(4, 4);
    expect << 0, 0, 2, -1,
              0, 0, -1, 0,
              2, -1, -4, 2,
              -1, 0, 2, 0;
    CHECK((mm.M - expect).cwiseAbs().maxCoeff() == 0.0);

    // Its block-Toeplitz matrix is the tridiagonal second-difference matrix.
    const MatrixXd T = block_toeplitz(q.Q, 1, 4);
    MatrixXd expectT(5, 5);
    expectT << 2, -1, 0, 0, 0,
               -1, 2, -1, 0, 0,
               0, -1, 2, -1, 0,
               0, 0, -1, 2, -1,
               0, 0, 0, -1, 2;
    CHECK((T - expectT).cwiseAbs().maxCoeff() == 0.0);
    CHECK(is_doubly_hyperdominant(T));
}

TEST_CASE("N = 0 static classes reduce to single-matrix conditions") {
    SlopeMultiplier q;
    q.N = 0;
    q.m = 2;
    MatrixXd Q0(2, 2);
    Q0 << 2, -1, -0.5, 1;
    q.Q = {Q0};
    CHECK(validate(q).empty());
    const MiddleMatrix mm = assemble_slope_M(q);
    CHECK(mm.M.rows() == 4);
    CHECK((mm.M.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((mm.M.bottomLeftCorner(2, 2) - Q0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((mm.M.topRightCorner(2, 2) - Q0.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((mm.M.bottomRightCorner(2, 2) + Q0 + Q0.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // Positive row sums required: flipping a sign breaks membership.
    SlopeMultiplier bad = q;
    bad.Q[0](0, 0) = -3.0;
    CHECK(!validate(bad).empty());
}

TEST_CASE("validation reports each violated condition") {
    SlopeMultiplier q;
    q.N = 1;
    q.m = 1;
    q.Q = {MatrixXd::Constant(1, 1, 0.5),   // positive off-center entry
           MatrixXd::Constant(1, 1, -2.0),  // drags row/col sums negative
           MatrixXd::Zero(1, 1)};
    const auto bad = validate(q);
    REQUIRE(bad.size() == 3);  // entry sign, row sum, column sum
    CHECK(bad[0].find("Q_-1(0,0)") != std::string::npos);

    ReluMultiplier r;
    r.N = 0;
    r.m = 2;
    MatrixXd asym(2, 2);
    asym << 1, 2, 0, 1;
    r.M1 = asym;
    r.M2 = MatrixXd::Constant(2, 2, -1.0);
    r.M3 = MatrixXd::Zero(2, 2);
    const auto badr = validate(r);
    CHECK(badr.size() >= 2);  // M1 asymmetry plus M2 negative entries
    r.M3(0, 1) = -0.5;
    r.M3(0, 0) = -3.0;  // diagonal stays unconstrained
    const auto badr2 = validate(r);
    CHECK(badr2.size() == badr.size() + 1);
}

TEST_CASE("slack loosens sign checks for solver output") {
    SlopeMultiplier q;
    q.N = 0;
    q.m = 1;
    q.Q = {MatrixXd::Constant(1, 1, -1e-12)};  // row sum barely negative
    CHECK(!validate(q, 0.0).empty());
    CHECK(validate(q, 1e-9).empty());
}

TEST_CASE("slope family embeds in the relu class with identical middle matrix") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> pick_N(0, 3), pick_m(1, 3);
        const int N = pick_N(rng), m = pick_m(rng);
        const SlopeMultiplier q = random_slope_multiplier(rng, N, m);
        REQUIRE(validate(q).empty());
        const ReluMultiplier r = embed_slope_in_relu(q);
        REQUIRE(validate(r).empty());
        const MiddleMatrix ms = assemble_slope_M(q);
        const MiddleMatrix mr = assemble_relu_M(r);
        CHECK((ms.M - mr.M).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("finite-sum quadratic form equals the block-Toeplitz form (slope)") {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> pick_N(0, 3), pick_m(1, 3), pick_T(0, 12);
        const int N = pick_N(rng), m = pick_m(rng), T0 = pick_T(rng);
        const SlopeMultiplier q = random_slope_multiplier(rng, N, m);
        const MiddleMatrix mm = assemble_slope_M(q);
        const Trajectory vw = random_slope_trajectory(rng, m, T0);

        const double lhs = stacked_quadratic_sum(vw, mm);

        const MatrixXd Qbar = block_toeplitz(q.Q, m, T0);
        const VectorXd vbar = reverse_stack(vw.at("v"));
        const VectorXd wbar = reverse_stack(vw.at("w"));
        const double rhs = 2.0 * wbar.dot(Qbar * vbar) - wbar.dot((Qbar + Qbar.transpose()) * wbar);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("finite-sum quadratic form equals the block-Toeplitz form (relu)") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> pick_N(0, 3), pick_m(1, 3), pick_T(0, 12);
        const int N = pick_N(rng), m = pick_m(rng), T0 = pick_T(rng);
        const testutil::ReluFamilies f = testutil::random_relu_families(rng, N, m);
        const ReluMultiplier q = relu_from_families(N, m, f.Q1, f.Q2, f.Q3);
        REQUIRE(validate(q).empty());
        const MiddleMatrix mm = assemble_relu_M(q);
        const Trajectory vw = random_slope_trajectory(rng, m, T0);

        const double lhs = stacked_quadratic_sum(vw, mm);

        const MatrixXd Q1 = block_toeplitz_symmetric(f.Q1, m, T0);
        const MatrixXd Q2 = block_toeplitz_symmetric(f.Q2, m, T0);
        const MatrixXd Q3 = block_toeplitz(f.Q3, m, T0);
        const VectorXd vbar = reverse_stack(vw.at("v"));
        const VectorXd wbar = reverse_stack(vw.at("w"));
        const long n = Q1.rows();
        MatrixXd Mbar(2 * n, 2 * n);
        Mbar.topLeftCorner(n, n) = Q1;
        Mbar.topRightCorner(n, n) = -Q3.transpose() - Q1;
        Mbar.bottomLeftCorner(n, n) = -Q3 - Q1;
        Mbar.bottomRightCorner(n, n) = Q1 + Q2 + Q3 + Q3.transpose();
        VectorXd z(2 * n);
        z << vbar, wbar;
        CHECK(lhs == doctest::Approx(z.dot(Mbar * z)).epsilon(1e-9));
    }
}

TEST_CASE("block-Toeplitz matrices of valid families keep their cone structure") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<int> pick_N(0, 3), pick_m(1, 3);
        const int N = pick_N(rng), m = pick_m(rng);
        const SlopeMultiplier qs = random_slope_multiplier(rng, N, m);
        const testutil::ReluFamilies f = testutil::random_relu_families(rng, N, m);
        CHECK(validate(relu_from_families(N, m, f.Q1, f.Q2, f.Q3)).empty());
        for (int T0 = 0; T0 <= 12; ++T0) {
            CHECK(is_doubly_hyperdominant(block_toeplitz(qs.Q, m, T0), 1e-12));
            CHECK(is_symmetric_nonnegative(block_toeplitz_symmetric(f.Q1, m, T0), 1e-12));
            CHECK(is_symmetric_nonnegative(block_toeplitz_symmetric(f.Q2, m, T0), 1e-12));
            CHECK(is_metzler(block_toeplitz(f.Q3, m, T0), 1e-12));
        }
    }
}

TEST_CASE("structure predicates on hand-built matrices") {
    MatrixXd H(2, 2);
    H << 1, -0.5, -0.5, 1;
    CHECK(is_doubly_hyperdominant(H));
    H(0, 1) = 0.1;
    CHECK(!is_doubly_hyperdominant(H));
    H(0, 1) = -2.0;
    CHECK(!is_doubly_hyperdominant(H));  // row sum negative

    MatrixXd Z(2, 2);
    Z << -5, 1, 2, -7;
    CHECK(is_metzler(Z));
    Z(0, 1) = -1;
    CHECK(!is_metzler(Z));

    MatrixXd S(2, 2);
    S << 1, 2, 2, 3;
    CHECK(is_symmetric_nonnegative(S));
    S(0, 1) = -2;
    CHECK(!is_symmetric_nonnegative(S));  // asymmetric now
}

TEST_CASE("parameterization round-trips and matches the assembled middle matrix") {
    std::mt19937_64 rng(808);
    for (MultiplierKind kind : {MultiplierKind::Slope, MultiplierKind::Relu}) {
        for (int trial = 0; trial < 10; ++trial) {
            std::uniform_int_distribution<int> pick_N(0, 2), pick_m(1, 3);
            const int N = pick_N(rng), m = pick_m(rng);
            const MultiplierParam param = MultiplierParam::make(kind, N, m);
            REQUIRE(static_cast<int>(param.basis.size()) == param.num_vars);

            VectorXd x(param.num_vars);
            MiddleMatrix expected{MatrixXd(), kind, N, m};
            if (kind == MultiplierKind::Slope) {
                const SlopeMultiplier q = random_slope_multiplier(rng, N, m);
                expected = assemble_slope_M(q);
                x = [&] {
                    VectorXd out(param.num_vars);
                    int var = 0;
                    for (int i = -N; i <= N; ++i) {
                        for (int r = 0; r < m; ++r) {
                            for (int c = 0; c < m; ++c) out(var++) = q.at(i)(r, c);
                        }
                    }
                    return out;
                }();
                const SlopeMultiplier back = param.to_slope(x);
                for (int i = -N; i <= N; ++i) {
                    CHECK((back.at(i) - q.at(i)).cwiseAbs().maxCoeff() == 0.0);
                }
            } else {
                const ReluMultiplier q = random_relu_multiplier(rng, N, m);
                expected = assemble_relu_M(q);
                const int blk = m * (N + 1);
                x = [&] {
                    VectorXd out(param.num_vars);
                    int var = 0;
                    for (int j = 1; j <= 2; ++j) {
                        const MatrixXd& M = (j == 1) ? q.M1 : q.M2;
                        for (int r = 0; r < blk; ++r) {
                            for (int c = r; c < blk; ++c) out(var++) = M(r, c);
                        }
                    }
                    for (int r = 0; r < blk; ++r) {
                        for (int c = 0; c < blk; ++c) out(var++) = q.M3(r, c);
                    }
                    return out;
                }();
                const ReluMultiplier back = param.to_relu(x);
                CHECK((back.M1 - q.M1).cwiseAbs().maxCoeff() == 0.0);
                CHECK((back.M2 - q.M2).cwiseAbs().maxCoeff() == 0.0);
                CHECK((back.M3 - q.M3).cwiseAbs().maxCoeff() == 0.0);
            }

            // Sum of scalar * basis must reproduce the assembled matrix.
            MatrixXd M = MatrixXd::Zero(2 * m * (N + 1), 2 * m * (N + 1));
            for (int k = 0; k < param.num_vars; ++k) M += x(k) * param.basis[k];
            CHECK((M - expected.M).cwiseAbs().maxCoeff() < 1e-12);

            // And the sign constraints must hold at a valid point.
            for (const auto& ineq : param.inequalities) {
                double lhs = 0.0;
                for (const auto& [var, a] : ineq.terms) lhs += a * x(var);
                CHECK(lhs >= -1e-12);
            }
        }
    }
}

TEST_CASE("assembly throws on invalid families") {
    SlopeMultiplier q;
    q.N = 0;
    q.m = 1;
    q.Q = {MatrixXd::Constant(1, 1, -1.0)};  // negative row sum
    CHECK_THROWS(assemble_slope_M(q));

    ReluMultiplier r;
    r.N = 0;
    r.m = 1;
    r.M1 = MatrixXd::Constant(1, 1, -1.0);
    r.M2 = MatrixXd::Zero(1, 1);
    r.M3 = MatrixXd::Zero(1, 1);
    CHECK_THROWS(assemble_relu_M(r));
}
