#include "iqcgain/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace iqcgain {

namespace {

ConicProgram base_program(const LmiAssembly& assembly, double eps) {
    ConicProgram prog;
    prog.num_vars = assembly.num_vars;
    prog.c = VectorXd::Zero(prog.num_vars);

    ConicProgram::MatBlock lmi;
    lmi.dim = assembly.size;
    lmi.F0 = -assembly.L0 - eps * MatrixXd::Identity(assembly.size, assembly.size);
    for (int k = 0; k < assembly.num_vars; ++k) {
        lmi.F.push_back({k, -assembly.coeff[k]});
    }
    prog.blocks.push_back(std::move(lmi));

    if (assembly.nxhat > 0) {
        ConicProgram::MatBlock pblk;
        pblk.dim = assembly.nxhat;
        pblk.F0 = MatrixXd::Zero(assembly.nxhat, assembly.nxhat);
        int var = 0;
        for (int i = 0; i < assembly.nxhat; ++i) {
            for (int j = i; j < assembly.nxhat; ++j) {
                MatrixXd E = MatrixXd::Zero(assembly.nxhat, assembly.nxhat);
                E(i, j) = 1.0;
                E(j, i) = 1.0;
                pblk.F.push_back({var++, std::move(E)});
            }
        }
        prog.blocks.push_back(std::move(pblk));
    }

    for (const auto& ineq : assembly.mclass.inequalities) {
        ConicProgram::DiagEntry e;
        for (const auto& [q, a] : ineq.terms) e.terms.push_back({assembly.num_p_vars + q, a});
        prog.diag.push_back(std::move(e));
    }
    return prog;
}

}  // namespace

SdpProblem build_gain_problem(const LmiAssembly& assembly, double epsilon_base) {
    SdpProblem p;
    p.assembly = assembly;
    p.epsilon_lmi = lmi_margin(assembly, epsilon_base);
    p.program = base_program(assembly, p.epsilon_lmi);
    p.program.c(assembly.t_index()) = 1.0;  // minimize t = gamma^2
    ConicProgram::DiagEntry t_nonneg;
    t_nonneg.terms.push_back({assembly.t_index(), 1.0});
    p.program.diag.push_back(std::move(t_nonneg));
    return p;
}

SdpProblem build_feasibility_problem(const LmiAssembly& assembly, double gamma_sq,
                                     double epsilon_base) {
    SdpProblem p;
    p.assembly = assembly;
    p.epsilon_lmi = lmi_margin(assembly, epsilon_base);
    p.fixed_gamma_sq = gamma_sq;
    p.program = base_program(assembly, p.epsilon_lmi);
    // Reuse the t slot as the margin variable s: minimize s subject to
    // s*I - L(x, gamma^2) - eps*I >= 0; feasible at gamma iff s* < 0.
    const int t = assembly.t_index();
    auto& lmi = p.program.blocks.front();
    lmi.F0 += gamma_sq * (-assembly.coeff[t]);  // fold the fixed gamma^2 term into F0
    for (auto& [k, Fk] : lmi.F) {
        if (k == t) Fk = MatrixXd::Identity(assembly.size, assembly.size);
    }
    p.program.c(t) = 1.0;
    return p;
}

namespace {

SlopeMultiplier polish(SlopeMultiplier q) {
    for (int i = -q.N; i <= q.N; ++i) {
        for (int r = 0; r < q.m; ++r) {
            for (int c = 0; c < q.m; ++c) {
                if (i != 0 || r != c) q.at(i)(r, c) = std::min(q.at(i)(r, c), 0.0);
            }
        }
    }
    for (int r = 0; r < q.m; ++r) {
        double row_sum = 0.0, col_sum = 0.0;
        for (int i = -q.N; i <= q.N; ++i) {
            row_sum += q.at(i).row(r).sum();
            col_sum += q.at(i).col(r).sum();
        }
        const double deficit = std::max({0.0, -row_sum, -col_sum});
        q.at(0)(r, r) += deficit;
    }
    return q;
}

ReluMultiplier polish(ReluMultiplier q) {
    q.M1 = (0.5 * (q.M1 + q.M1.transpose())).cwiseMax(0.0);
    q.M2 = (0.5 * (q.M2 + q.M2.transpose())).cwiseMax(0.0);
    for (long r = 0; r < q.M3.rows(); ++r) {
        for (long c = 0; c < q.M3.cols(); ++c) {
            if (r != c) q.M3(r, c) = std::max(q.M3(r, c), 0.0);
        }
    }
    return q;
}

double max_eig(const MatrixXd& S) {
    if (S.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_eig(const MatrixXd& S) {
    if (S.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

Certificate certificate_from_solution(const LmiAssembly& assembly, const AugmentedPlant& aug,
                                      const VectorXd& x, double gamma_sq,
                                      const ConicResult& solved, double validation_slack) {
    Certificate cert;
    cert.diagnostics = solved.diagnostics;
    cert.P = assembly.unpack_p(x.head(assembly.num_p_vars));
    const VectorXd q = assembly.q_slice(x);
    if (assembly.mclass.kind == MultiplierKind::Slope) {
        cert.multiplier = polish(assembly.mclass.to_slope(q));
    } else {
        cert.multiplier = polish(assembly.mclass.to_relu(q));
    }
    cert.gamma = std::sqrt(std::max(0.0, gamma_sq));

    MiddleMatrix M = cert.middle(validation_slack);
    MatrixXd L = dense_lmi(aug, cert.P, M.M, gamma_sq);
    cert.lmi_max_eig = max_eig(L);
    cert.p_min_eig = min_eig(cert.P);

    const bool witness_ok = cert.p_min_eig >= -1e-7 && cert.lmi_max_eig <= 1e-7;
    cert.status = witness_ok ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
    return cert;
}

MiddleMatrix Certificate::middle(double slack) const {
    if (std::holds_alternative<SlopeMultiplier>(multiplier)) {
        return assemble_slope_M(std::get<SlopeMultiplier>(multiplier), slack);
    }
    return assemble_relu_M(std::get<ReluMultiplier>(multiplier), slack);
}

Certificate solve_gain(const LmiAssembly& assembly, const AugmentedPlant& aug,
                       const CertificateOptions& options) {
    SdpProblem prob = build_gain_problem(assembly);
    ConicResult res = solve_conic(prob.program, options.solver);

    if (res.status == SolveStatus::Optimal) {
        return certificate_from_solution(assembly, aug, res.x, res.x(assembly.t_index()), res,
                                   options.validation_slack);
    }
    if (res.status == SolveStatus::Infeasible || !options.bisection_fallback) {
        Certificate cert;
        cert.status = res.status;
        cert.diagnostics = res.diagnostics;
        return cert;
    }

    // Bisection fallback over gamma^2 using feasibility solves.
    double lo = 0.0, hi = 1.0;
    VectorXd best_x;
    double best_gsq = -1.0;
    auto feasible_at = [&](double gsq, VectorXd& x_out) {
        SdpProblem fp = build_feasibility_problem(assembly, gsq);
        ConicResult r = solve_conic(fp.program, options.solver);
        if (r.status != SolveStatus::Optimal) return false;
        if (r.x(assembly.t_index()) >= 0.0) return false;
        x_out = r.x;
        return true;
    };
    VectorXd x_tmp;
    while (hi < 1e12 && !feasible_at(hi, x_tmp)) {
        lo = hi;
        hi *= 4.0;
    }
    if (hi >= 1e12) {
        Certificate cert;
        cert.status = SolveStatus::Infeasible;
        cert.diagnostics = res.diagnostics;
        return cert;
    }
    best_x = x_tmp;
    best_gsq = hi;
    for (int it = 0; it < 60 && (hi - lo) > 1e-6 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(mid, x_tmp)) {
            hi = mid;
            best_x = x_tmp;
            best_gsq = mid;
        } else {
            lo = mid;
        }
    }
    return certificate_from_solution(assembly, aug, best_x, best_gsq, res, options.validation_slack);
}

ReplayReport replay_certificate(const AugmentedPlant& aug, const MatrixXd& P,
                                const MiddleMatrix& M, double gamma,
                                double lmi_tol, double p_tol) {
    ReplayReport rep;
    MatrixXd L = dense_lmi(aug, P, M.M, gamma * gamma);
    rep.lmi_max_eig = max_eig(L);
    rep.p_min_eig = min_eig(P);
    if (rep.lmi_max_eig > lmi_tol) {
        rep.violations.push_back("lambda_max(L) = " + std::to_string(rep.lmi_max_eig) +
                                 " exceeds " + std::to_string(lmi_tol));
    }
    if (rep.p_min_eig < -p_tol) {
        rep.violations.push_back("lambda_min(P) = " + std::to_string(rep.p_min_eig) +
                                 " below -" + std::to_string(p_tol));
    }
    rep.pass = rep.violations.empty();
    return rep;
}

}  // namespace iqcgain
