#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "iqcgain/lmi.hpp"

namespace iqcgain {

/// A linear-objective program over semidefinite and scalar inequality
/// constraints, in the form
///   minimize c^T x  subject to  F0_b + sum_k x_k F_{k,b}  >= 0 (PSD)
/// per matrix block b, plus scalar entries f0_i + a_i^T x >= 0.
struct ConicProgram {
    int num_vars = 0;
    VectorXd c;

    struct MatBlock {
        int dim = 0;
        MatrixXd F0;
        std::vector<std::pair<int, MatrixXd>> F;  // (variable, symmetric coefficient)
    };
    struct DiagEntry {
        double f0 = 0.0;
        std::vector<std::pair<int, double>> terms;
    };
    std::vector<MatBlock> blocks;
    std::vector<DiagEntry> diag;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct SolverOptions {
    double tol_gap = 1e-8;      // relative duality gap
    double tol_feas = 1e-8;     // primal/dual feasibility
    int max_iterations = 200;
    bool verbose = false;
    double infeasibility_ray_threshold = 1e9;
};

struct SolveDiagnostics {
    int iterations = 0;
    double rel_gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

struct ConicResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    VectorXd x;
    SolveDiagnostics diagnostics;
};

/// Primal-dual path-following interior-point solve (HKM direction with a
/// Mehrotra corrector). Reentrant: distinct problem instances may be
/// solved concurrently.
ConicResult solve_conic(const ConicProgram& program, const SolverOptions& options = {});

/// Plain-text sparse dump of the conic program, one coefficient entry per
/// line, for offline debugging. Internal convention, documented in-repo.
void write_problem_dump(std::ostream& os, const ConicProgram& program);

/// The gain-certification SDP: minimize t = gamma^2 over the LMI and
/// multiplier cone constraints derived from one (plant, filter, class)
/// triple.
struct SdpProblem {
    ConicProgram program;
    LmiAssembly assembly;
    double epsilon_lmi = 0.0;
    std::optional<double> fixed_gamma_sq;  // set in feasibility mode
};

/// Minimize gamma^2 subject to L(P, M, gamma^2) <= -eps*I, P >= 0, and the
/// multiplier class sign constraints.
SdpProblem build_gain_problem(const LmiAssembly& assembly, double epsilon_base = 1e-7);

/// Feasibility at a fixed gamma: minimize the margin s with
/// L + (eps - s) I <= 0; feasible iff the optimum satisfies s < 0.
SdpProblem build_feasibility_problem(const LmiAssembly& assembly, double gamma_sq,
                                     double epsilon_base = 1e-7);

struct Certificate {
    SolveStatus status = SolveStatus::NumericalFailure;
    double gamma = 0.0;
    MatrixXd P;
    std::variant<SlopeMultiplier, ReluMultiplier> multiplier;
    SolveDiagnostics diagnostics;
    double lmi_max_eig = 0.0;  // lambda_max of the dense L at the solution
    double p_min_eig = 0.0;

    MiddleMatrix middle(double slack = 1e-9) const;
};

struct CertificateOptions {
    SolverOptions solver;
    bool bisection_fallback = false;  // bisect over gamma^2 if the single-shot solve stalls
    double validation_slack = 1e-9;   // sign-constraint slack on solver output
};

/// Build a certificate from a raw solution vector: unpack P and the
/// multiplier (sign-polished onto its cone), then re-validate against a
/// dense evaluation of L independent of the assembly coefficient maps.
Certificate certificate_from_solution(const LmiAssembly& assembly, const AugmentedPlant& aug,
                                      const VectorXd& x, double gamma_sq,
                                      const ConicResult& solved, double validation_slack = 1e-9);

/// Solve the gain problem and re-validate the witness against a dense
/// evaluation of L (independent of the assembly coefficient maps).
Certificate solve_gain(const LmiAssembly& assembly, const AugmentedPlant& aug,
                       const CertificateOptions& options = {});

/// Check an existing witness against the augmented plant: dense L at
/// (P, M, gamma^2) must satisfy lambda_max <= lmi_tol, P >= -p_tol, and the
/// multiplier must pass class validation.
struct ReplayReport {
    bool pass = false;
    double lmi_max_eig = 0.0;
    double p_min_eig = 0.0;
    std::vector<std::string> violations;
};
ReplayReport replay_certificate(const AugmentedPlant& aug, const MatrixXd& P,
                                const MiddleMatrix& M, double gamma,
                                double lmi_tol = 1e-6, double p_tol = 1e-7);

}  // namespace iqcgain
