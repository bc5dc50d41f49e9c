#include "iqcgain/analysis.hpp"

#include <chrono>
#include <stdexcept>

namespace iqcgain {

double AnalysisReport::best_gamma() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        if (r.certificate.status == SolveStatus::Optimal) {
            best = std::min(best, r.certificate.gamma);
        }
    }
    return best;
}

AnalysisReport certify(const AnalysisRequest& req) {
    if (req.horizons.empty()) throw std::invalid_argument("certify: empty horizon list");
    for (size_t i = 0; i < req.horizons.size(); ++i) {
        if (req.horizons[i] < 0) throw std::invalid_argument("certify: negative horizon");
        if (i > 0 && req.horizons[i] < req.horizons[i - 1]) {
            throw std::invalid_argument("certify: horizons must be ascending");
        }
    }
    PlantBlocks g = plant_blocks(req.plant);
    if (g.D11.cwiseAbs().maxCoeff() != 0.0 && !req.assert_well_posed) {
        throw std::invalid_argument(
            "certify: D11 != 0; well-posedness is not checkable here, pass an explicit "
            "well-posedness assertion to proceed");
    }

    AnalysisReport report;
    report.kind = req.kind;

    const Certificate* prev_opt = nullptr;
    int prev_N = -1;
    for (int N : req.horizons) {
        HorizonResult hr;
        hr.N = N;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            FilterRealization filt = build_psi(N, g.m);
            AugmentedPlant aug = augment(req.plant, filt);
            MultiplierParam mc = MultiplierParam::make(req.kind, N, g.m);
            LmiAssembly assembly = assemble_L(aug, mc);

            if (req.feasibility_gamma) {
                const double gsq = *req.feasibility_gamma * *req.feasibility_gamma;
                SdpProblem fp = build_feasibility_problem(assembly, gsq);
                ConicResult res = solve_conic(fp.program, req.options.solver);
                if (res.status == SolveStatus::Optimal && res.x(assembly.t_index()) < 0.0) {
                    VectorXd x = res.x;
                    x(assembly.t_index()) = gsq;
                    hr.certificate = certificate_from_solution(assembly, aug, x, gsq, res,
                                                               req.options.validation_slack);
                } else {
                    hr.certificate.status = res.status == SolveStatus::Optimal
                                                ? SolveStatus::Infeasible
                                                : res.status;
                    hr.certificate.diagnostics = res.diagnostics;
                }
            } else {
                hr.certificate = solve_gain(assembly, aug, req.options);
            }

            // Opt-in warm start: a certificate embedded from the previous
            // horizon is itself feasible here (at its own gamma), so it backs
            // up a failed or worse solve.
            if (req.warm_start && prev_opt != nullptr && prev_N == N - 1) {
                EmbeddedCertificate emb = embed_certificate(*prev_opt, req.plant, prev_N);
                const bool solve_bad = hr.certificate.status != SolveStatus::Optimal ||
                                       hr.certificate.gamma > emb.gamma;
                if (solve_bad && emb.revalidation.pass) {
                    hr.certificate.status = SolveStatus::Optimal;
                    hr.certificate.gamma = emb.gamma;
                    hr.certificate.P = emb.P;
                    hr.certificate.multiplier = emb.multiplier;
                    hr.certificate.lmi_max_eig = emb.revalidation.lmi_max_eig;
                    hr.certificate.p_min_eig = emb.revalidation.p_min_eig;
                }
            }
        } catch (const std::exception& ex) {
            hr.error = ex.what();
            hr.certificate.status = SolveStatus::NumericalFailure;
        }
        hr.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.results.push_back(std::move(hr));
        if (report.results.back().certificate.status == SolveStatus::Optimal) {
            report.any_optimal = true;
            prev_opt = &report.results.back().certificate;
            prev_N = N;
        }
    }
    return report;
}

bool monotonicity_check(const AnalysisReport& report, double rel_tol) {
    int seen = 0;
    double prev = 0.0;
    bool ok = true;
    for (const auto& r : report.results) {
        if (r.certificate.status != SolveStatus::Optimal) continue;
        if (seen > 0 && r.certificate.gamma > prev * (1.0 + rel_tol)) ok = false;
        prev = r.certificate.gamma;
        ++seen;
    }
    if (seen < 2) throw std::invalid_argument("monotonicity_check: need >= 2 optimal horizons");
    return ok;
}

EmbeddedCertificate embed_certificate(const Certificate& cert, const StateSpace& plant,
                                      int N, double revalidation_tol) {
    if (cert.status != SolveStatus::Optimal) {
        throw std::invalid_argument("embed_certificate: certificate is not optimal");
    }
    PlantBlocks g = plant_blocks(plant);
    const int m = g.m;
    const int nx = g.nx;
    const int n_old = nx + 2 * m * N;
    if (cert.P.rows() != n_old) {
        throw std::invalid_argument("embed_certificate: P dimension does not match horizon N");
    }

    EmbeddedCertificate out;
    out.gamma = cert.gamma;

    // State layout is [x; v-delays; w-delays]; going to N+1 inserts one new
    // v-delay block before the w-delays and one new w-delay block at the end.
    const int n_new = nx + 2 * m * (N + 1);
    auto new_index = [&](int k) {
        if (k < nx + m * N) return k;           // plant states and v-delays keep their slots
        return k + m;                            // w-delays shift past the new v block
    };
    MatrixXd P = MatrixXd::Zero(n_new, n_new);
    for (int i = 0; i < n_old; ++i) {
        for (int j = 0; j < n_old; ++j) P(new_index(i), new_index(j)) = cert.P(i, j);
    }
    out.P = std::move(P);

    const MatrixXd zero = MatrixXd::Zero(m, m);
    if (std::holds_alternative<SlopeMultiplier>(cert.multiplier)) {
        const auto& q = std::get<SlopeMultiplier>(cert.multiplier);
        SlopeMultiplier ext;
        ext.N = N + 1;
        ext.m = m;
        ext.Q.assign(2 * (N + 1) + 1, zero);
        for (int i = -N; i <= N; ++i) ext.at(i) = q.at(i);
        out.multiplier = std::move(ext);
    } else {
        // The new column of the window stack is the oldest tap, so zero
        // padding at the bottom-right reproduces the quadratic form.
        const auto& q = std::get<ReluMultiplier>(cert.multiplier);
        const int blk = m * (N + 1);
        const int blk2 = m * (N + 2);
        ReluMultiplier ext;
        ext.N = N + 1;
        ext.m = m;
        ext.M1 = MatrixXd::Zero(blk2, blk2);
        ext.M2 = MatrixXd::Zero(blk2, blk2);
        ext.M3 = MatrixXd::Zero(blk2, blk2);
        ext.M1.topLeftCorner(blk, blk) = q.M1;
        ext.M2.topLeftCorner(blk, blk) = q.M2;
        ext.M3.topLeftCorner(blk, blk) = q.M3;
        out.multiplier = std::move(ext);
    }

    FilterRealization filt = build_psi(N + 1, m);
    AugmentedPlant aug = augment(plant, filt);
    MiddleMatrix M = std::holds_alternative<SlopeMultiplier>(out.multiplier)
                         ? assemble_slope_M(std::get<SlopeMultiplier>(out.multiplier), 1e-9)
                         : assemble_relu_M(std::get<ReluMultiplier>(out.multiplier), 1e-9);
    out.revalidation =
        replay_certificate(aug, out.P, M, out.gamma, revalidation_tol, 1e-7);
    return out;
}

}  // namespace iqcgain
