#include <random>

#include "doctest.h"
#include "iqcgain/analysis.hpp"
#include "iqcgain/oracle.hpp"
#include "test_util.hpp"

using namespace iqcgain;
using testutil::example_plant;
using testutil::random_relu_multiplier;
using testutil::random_slope_multiplier;

namespace {

StateSpace scalar_loop_plant(double c1) {
    MatrixXd A(1, 1), B(1, 2), C(2, 1), D(2, 2);
    A << 0.5;
    B << 1, 1;
    C << c1, 1;
    D.setZero();
    return StateSpace(A, B, C, D, {1, 1}, {1, 1});
}

Trajectory impulse_d(int nd, int T0) {
    MatrixXd d = MatrixXd::Zero(nd, T0 + 1);
    d(0, 0) = 1.0;
    Trajectory out(T0);
    out.set("d", d);
    return out;
}

}  // namespace

TEST_CASE("nonlinearity evaluations") {
    CHECK(NonlinearityKind::relu().apply_scalar(-2.0) == 0.0);
    CHECK(NonlinearityKind::relu().apply_scalar(3.0) == 3.0);
    CHECK(NonlinearityKind::saturation().apply_scalar(2.0) == 1.0);
    CHECK(NonlinearityKind::saturation().apply_scalar(-2.0) == -1.0);
    CHECK(NonlinearityKind::saturation().apply_scalar(0.3) == doctest::Approx(0.3));
    CHECK(NonlinearityKind::scaled_identity(0.4).apply_scalar(5.0) == doctest::Approx(2.0));
    CHECK(NonlinearityKind::tanh_fn().apply_scalar(1.0) == doctest::Approx(std::tanh(1.0)));
}

TEST_CASE("closed-loop simulation by hand recursion") {
    // Active loop: v stays nonnegative so relu passes it through.
    const Trajectory out = simulate_loop(scalar_loop_plant(1.0), NonlinearityKind::relu(),
                                         impulse_d(1, 3), VectorXd::Zero(1));
    const MatrixXd& e = out.at("e");
    CHECK(e(0, 0) == doctest::Approx(0.0));
    CHECK(e(0, 1) == doctest::Approx(1.0));
    CHECK(e(0, 2) == doctest::Approx(1.5));
    CHECK(e(0, 3) == doctest::Approx(2.25));

    // Negative v: the relu branch opens the loop.
    const Trajectory out2 = simulate_loop(scalar_loop_plant(-1.0), NonlinearityKind::relu(),
                                          impulse_d(1, 3), VectorXd::Zero(1));
    const MatrixXd& e2 = out2.at("e");
    CHECK(e2(0, 1) == doctest::Approx(1.0));
    CHECK(e2(0, 2) == doctest::Approx(0.5));
    CHECK(e2(0, 3) == doctest::Approx(0.25));
    CHECK(out2.at("w").cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-slope identity opens the loop exactly") {
    std::mt19937_64 rng(3);
    const StateSpace plant = example_plant();
    const int T0 = 30;
    Trajectory d(T0);
    d.set("d", testutil::random_matrix(rng, 2, T0 + 1));

    const Trajectory closed = simulate_loop(plant, NonlinearityKind::scaled_identity(0.0), d,
                                            VectorXd::Zero(4));
    // Open loop: w = 0, so the plant sees only d.
    MatrixXd u = MatrixXd::Zero(4, T0 + 1);
    u.bottomRows(2) = d.at("d");
    Trajectory in(T0);
    in.set("u", u);
    const Trajectory open = simulate(plant, in, VectorXd::Zero(4));
    CHECK((closed.at("e") - open.at("y").bottomRows(1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(closed.at("w").cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate_loop rejects implicit loops and bad shapes") {
    StateSpace base = scalar_loop_plant(1.0);
    MatrixXd D = base.D;
    D(0, 0) = 0.5;  // D11 != 0
    const StateSpace implicit(base.A, base.B, base.C, D, {1, 1}, {1, 1});
    CHECK_THROWS(simulate_loop(implicit, NonlinearityKind::relu(), impulse_d(1, 3),
                               VectorXd::Zero(1)));
    CHECK_THROWS(simulate_loop(base, NonlinearityKind::relu(), impulse_d(2, 3),
                               VectorXd::Zero(1)));
    CHECK_THROWS(simulate_loop(base, NonlinearityKind::relu(), impulse_d(1, 3),
                               VectorXd::Zero(2)));
}

TEST_CASE("hard IQC holds for random valid multipliers and matching nonlinearities") {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> pick_N(0, 4), pick_m(1, 3);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = pick_N(rng), m = pick_m(rng);

        const MiddleMatrix Ms = assemble_slope_M(random_slope_multiplier(rng, N, m));
        for (auto nl : {NonlinearityKind::relu(), NonlinearityKind::saturation(),
                        NonlinearityKind::scaled_identity(0.7), NonlinearityKind::tanh_fn()}) {
            const IqcCheckReport rep = check_hard_iqc(nl, Ms, 200, 20, 1000 + trial);
            CHECK(rep.min_normalized >= -1e-9);
        }

        // The relu class is certified for the relu nonlinearity only.
        const MiddleMatrix Mr = assemble_relu_M(random_relu_multiplier(rng, N, m));
        const IqcCheckReport rep = check_hard_iqc(NonlinearityKind::relu(), Mr, 200, 20,
                                                  2000 + trial);
        CHECK(rep.min_normalized >= -1e-9);
    }
}

TEST_CASE("zero multiplier gives identically zero partial sums") {
    SlopeMultiplier q;
    q.N = 1;
    q.m = 2;
    q.Q.assign(3, MatrixXd::Zero(2, 2));
    const MiddleMatrix M = assemble_slope_M(q);
    const IqcCheckReport rep = check_hard_iqc(NonlinearityKind::relu(), M, 50, 10, 9);
    CHECK(rep.min_partial_sum == 0.0);
    CHECK(rep.min_normalized == 0.0);
}

TEST_CASE("serial and parallel oracles return identical results") {
    std::mt19937_64 rng(64);
    const MiddleMatrix M = assemble_slope_M(random_slope_multiplier(rng, 2, 2));
    const IqcCheckReport par = check_hard_iqc(NonlinearityKind::saturation(), M, 300, 15, 77);
    const IqcCheckReport ser = check_hard_iqc_serial(NonlinearityKind::saturation(), M, 300, 15, 77);
    CHECK(par.min_partial_sum == ser.min_partial_sum);
    CHECK(par.min_normalized == ser.min_normalized);
    CHECK(par.worst_trial == ser.worst_trial);
    CHECK(par.worst_T0 == ser.worst_T0);

    const StateSpace plant = example_plant();
    for (auto strat : {GainSearchStrategy::RandomGaussian, GainSearchStrategy::SinusoidGrid,
                       GainSearchStrategy::CoordinateAscent}) {
        const EmpiricalGainResult p =
            empirical_gain(plant, NonlinearityKind::relu(), strat, 64, 5, 40);
        const EmpiricalGainResult s =
            empirical_gain_serial(plant, NonlinearityKind::relu(), strat, 64, 5, 40);
        CHECK(p.lower_bound == s.lower_bound);
    }
}

TEST_CASE("empirical lower bounds stay below certified upper bounds") {
    const StateSpace plant = example_plant();

    AnalysisRequest req;
    req.plant = plant;
    req.kind = MultiplierKind::Relu;
    req.horizons = {3};
    const AnalysisReport rep = certify(req);
    REQUIRE(rep.results[0].certificate.status == SolveStatus::Optimal);
    const double gamma = rep.results[0].certificate.gamma;

    double best = 0.0;
    for (auto strat : {GainSearchStrategy::RandomGaussian, GainSearchStrategy::SinusoidGrid,
                       GainSearchStrategy::CoordinateAscent}) {
        const EmpiricalGainResult r =
            empirical_gain(plant, NonlinearityKind::relu(), strat, 300, 11, 80);
        CHECK(r.lower_bound <= gamma * (1.0 + 1e-6));
        best = std::max(best, r.lower_bound);
    }
    // The bound is not vacuous: the search must find a decent fraction of it.
    CHECK(best > 0.3 * gamma);
}
