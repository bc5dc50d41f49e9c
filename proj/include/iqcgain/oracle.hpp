#pragma once

#include <cstdint>

#include "iqcgain/multiplier.hpp"
#include "iqcgain/state_space.hpp"

namespace iqcgain {

/// Static memoryless nonlinearities, all slope-restricted to [0,1] with
/// f(0) = 0; Relu is the exact elementwise max(v, 0).
struct NonlinearityKind {
    enum class Tag { Relu, Saturation, ScaledIdentity, Tanh };
    Tag tag = Tag::Relu;
    double lambda = 1.0;  // ScaledIdentity slope, in [0, 1]

    static NonlinearityKind relu() { return {Tag::Relu, 1.0}; }
    static NonlinearityKind saturation() { return {Tag::Saturation, 1.0}; }
    static NonlinearityKind scaled_identity(double lam) { return {Tag::ScaledIdentity, lam}; }
    static NonlinearityKind tanh_fn() { return {Tag::Tanh, 1.0}; }

    double apply_scalar(double v) const;
    VectorXd apply(const VectorXd& v) const;
};

/// Simulate the feedback loop of the plant with the static nonlinearity on
/// the (v, w) channels. Requires D11 = 0 so v(k) is explicit. Returns
/// channels x, v, w, e.
Trajectory simulate_loop(const StateSpace& plant, const NonlinearityKind& nl,
                         const Trajectory& d, const VectorXd& x0);

struct IqcCheckReport {
    double min_partial_sum = 0.0;        // over all trials and all T0
    double min_normalized = 0.0;         // divided by the trial's signal energy
    int worst_trial = -1;
    int worst_T0 = -1;
    std::uint64_t seed = 0;
    int trials = 0;
};

/// Empirically verify the hard IQC: for random inputs v (and w = nl(v)),
/// every partial sum sum_{k<=T0} r(k)^T M r(k) must be nonnegative up to
/// rounding. A clearly negative minimum indicates an implementation bug.
IqcCheckReport check_hard_iqc(const NonlinearityKind& nl, const MiddleMatrix& M,
                              int trials = 1000, int T0max = 30,
                              std::uint64_t seed = 0);

/// Serial reference for the OpenMP implementation above; results are
/// identical because trials are seeded independently.
IqcCheckReport check_hard_iqc_serial(const NonlinearityKind& nl, const MiddleMatrix& M,
                                     int trials = 1000, int T0max = 30,
                                     std::uint64_t seed = 0);

enum class GainSearchStrategy { RandomGaussian, SinusoidGrid, CoordinateAscent };

struct EmpiricalGainResult {
    double lower_bound = 0.0;  // max over sampled d of ||e||_2 / ||d||_2
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Sample finite-horizon disturbances and report the best observed gain
/// ratio; always a valid lower bound on the induced l2 gain.
EmpiricalGainResult empirical_gain(const StateSpace& plant, const NonlinearityKind& nl,
                                   GainSearchStrategy strategy, int budget,
                                   std::uint64_t seed = 0, int horizon = 60);

EmpiricalGainResult empirical_gain_serial(const StateSpace& plant, const NonlinearityKind& nl,
                                          GainSearchStrategy strategy, int budget,
                                          std::uint64_t seed = 0, int horizon = 60);

}  // namespace iqcgain
