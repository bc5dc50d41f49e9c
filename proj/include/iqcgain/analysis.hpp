#pragma once

#include "iqcgain/sdp.hpp"

namespace iqcgain {

struct AnalysisRequest {
    StateSpace plant;
    MultiplierKind kind = MultiplierKind::Relu;
    std::vector<int> horizons;           // nonnegative, ascending
    std::optional<double> feasibility_gamma;  // set: feasibility mode at this gamma
    CertificateOptions options;
    bool assert_well_posed = false;  // required to analyze plants with D11 != 0
    bool warm_start = false;         // reuse the previous horizon's certificate
};

struct HorizonResult {
    int N = 0;
    Certificate certificate;
    double solve_seconds = 0.0;
    std::string error;  // nonempty if this horizon failed outright
};

struct AnalysisReport {
    MultiplierKind kind = MultiplierKind::Relu;
    std::vector<HorizonResult> results;
    bool any_optimal = false;

    /// "stable, gain < gamma" holds iff some horizon solved optimally;
    /// infeasibility is inconclusive, never a proof of instability.
    bool stable_verdict() const { return any_optimal; }
    double best_gamma() const;
};

/// Run the full pipeline (filter, augmentation, assembly, solve) for each
/// requested horizon. Per-horizon failures are recorded, not propagated.
AnalysisReport certify(const AnalysisRequest& request);

/// True iff optimal gamma values are nonincreasing in N up to a relative
/// solver-noise tolerance.
bool monotonicity_check(const AnalysisReport& report, double rel_tol = 1e-3);

/// Zero-pad a certificate from horizon N to horizon N+1: P gains zero rows
/// and columns for the new filter states (placed by the state layout, not
/// appended blindly) and every multiplier coefficient list is extended with
/// zero blocks. The result must satisfy the N+1 LMI at the same gamma.
struct EmbeddedCertificate {
    MatrixXd P;
    std::variant<SlopeMultiplier, ReluMultiplier> multiplier;
    double gamma = 0.0;
    ReplayReport revalidation;
};
EmbeddedCertificate embed_certificate(const Certificate& cert, const StateSpace& plant,
                                      int N, double revalidation_tol = 1e-6);

}  // namespace iqcgain
