#include "iqcgain/lmi.hpp"

#include <stdexcept>

namespace iqcgain {

AugmentedPlant augment(const StateSpace& plant, const FilterRealization& filt) {
    PlantBlocks g = plant_blocks(plant);
    if (g.m != filt.m) throw std::invalid_argument("augment: plant/filter width mismatch");

    const StateSpace& psi = filt.psi;
    const int npsi = psi.nx();
    const int nr = filt.output_dim();
    const MatrixXd Bpsi1 = psi.B.leftCols(g.m);
    const MatrixXd Bpsi2 = psi.B.rightCols(g.m);
    const MatrixXd Dpsi1 = psi.D.leftCols(g.m);
    const MatrixXd Dpsi2 = psi.D.rightCols(g.m);

    AugmentedPlant aug;
    aug.plant = g;
    aug.filt = filt;
    aug.nxhat = g.nx + npsi;

    aug.Ahat = MatrixXd::Zero(aug.nxhat, aug.nxhat);
    aug.Ahat.topLeftCorner(g.nx, g.nx) = g.A;
    aug.Ahat.bottomLeftCorner(npsi, g.nx) = Bpsi1 * g.C1;
    aug.Ahat.bottomRightCorner(npsi, npsi) = psi.A;

    aug.B1hat = MatrixXd(aug.nxhat, g.m);
    aug.B1hat.topRows(g.nx) = g.B1;
    aug.B1hat.bottomRows(npsi) = Bpsi1 * g.D11 + Bpsi2;

    aug.B2hat = MatrixXd(aug.nxhat, g.nd);
    aug.B2hat.topRows(g.nx) = g.B2;
    aug.B2hat.bottomRows(npsi) = Bpsi1 * g.D12;

    aug.C1hat = MatrixXd(nr, aug.nxhat);
    aug.C1hat.leftCols(g.nx) = Dpsi1 * g.C1;
    aug.C1hat.rightCols(npsi) = psi.C;

    aug.C2hat = MatrixXd::Zero(g.ne, aug.nxhat);
    aug.C2hat.leftCols(g.nx) = g.C2;

    aug.D11hat = Dpsi1 * g.D11 + Dpsi2;
    aug.D12hat = Dpsi1 * g.D12;
    aug.D21hat = g.D21;
    aug.D22hat = g.D22;

    MatrixXd A = aug.Ahat;
    MatrixXd B(aug.nxhat, g.m + g.nd);
    B << aug.B1hat, aug.B2hat;
    MatrixXd C(nr + g.ne, aug.nxhat);
    C << aug.C1hat, aug.C2hat;
    MatrixXd D(nr + g.ne, g.m + g.nd);
    D << aug.D11hat, aug.D12hat, aug.D21hat, aug.D22hat;
    aug.ghat = StateSpace(std::move(A), std::move(B), std::move(C), std::move(D),
                          {g.m, g.nd}, {nr, g.ne});
    return aug;
}

MatrixXd dense_lmi(const AugmentedPlant& aug, const MatrixXd& P,
                   const MatrixXd& M, double gamma_sq) {
    const int n = aug.nxhat, m = aug.plant.m, nd = aug.plant.nd;
    const int sz = n + m + nd;
    if (P.rows() != n || P.cols() != n) throw std::invalid_argument("dense_lmi: P size mismatch");
    if (M.rows() != aug.filt.output_dim()) throw std::invalid_argument("dense_lmi: M size mismatch");

    MatrixXd K(n, sz);
    K << aug.Ahat, aug.B1hat, aug.B2hat;
    MatrixXd H1(aug.filt.output_dim(), sz);
    H1 << aug.C1hat, aug.D11hat, aug.D12hat;
    MatrixXd H2(aug.plant.ne, sz);
    H2 << aug.C2hat, aug.D21hat, aug.D22hat;

    MatrixXd L = K.transpose() * P * K;
    L.topLeftCorner(n, n) -= P;
    L.bottomRightCorner(nd, nd) -= gamma_sq * MatrixXd::Identity(nd, nd);
    L += H2.transpose() * H2;
    L += H1.transpose() * M * H1;
    return L;
}

MatrixXd LmiAssembly::evaluate(const VectorXd& x) const {
    if (x.size() != num_vars) throw std::invalid_argument("LmiAssembly::evaluate: wrong vector length");
    MatrixXd L = L0;
    for (int k = 0; k < num_vars; ++k) {
        if (x(k) != 0.0) L += x(k) * coeff[k];
    }
    return L;
}

VectorXd LmiAssembly::pack_p(const MatrixXd& P) const {
    VectorXd x(num_p_vars);
    int k = 0;
    for (int i = 0; i < nxhat; ++i) {
        for (int j = i; j < nxhat; ++j) x(k++) = P(i, j);
    }
    return x;
}

MatrixXd LmiAssembly::unpack_p(const VectorXd& x) const {
    MatrixXd P(nxhat, nxhat);
    int k = 0;
    for (int i = 0; i < nxhat; ++i) {
        for (int j = i; j < nxhat; ++j) {
            P(i, j) = x(k);
            P(j, i) = x(k);
            ++k;
        }
    }
    return P;
}

VectorXd LmiAssembly::q_slice(const VectorXd& x) const {
    return x.segment(num_p_vars, num_q_vars);
}

LmiAssembly assemble_L(const AugmentedPlant& aug, const MultiplierParam& mclass) {
    if (mclass.N != aug.filt.N || mclass.m != aug.filt.m) {
        throw std::invalid_argument("assemble_L: multiplier class does not match filter");
    }
    const int n = aug.nxhat, m = aug.plant.m, nd = aug.plant.nd;
    const int sz = n + m + nd;

    LmiAssembly out;
    out.size = sz;
    out.nxhat = n;
    out.num_p_vars = n * (n + 1) / 2;
    out.num_q_vars = mclass.num_vars;
    out.num_vars = out.num_p_vars + out.num_q_vars + 1;
    out.mclass = mclass;

    MatrixXd K(n, sz);
    K << aug.Ahat, aug.B1hat, aug.B2hat;
    MatrixXd H1(aug.filt.output_dim(), sz);
    H1 << aug.C1hat, aug.D11hat, aug.D12hat;
    MatrixXd H2(aug.plant.ne, sz);
    H2 << aug.C2hat, aug.D21hat, aug.D22hat;

    out.L0 = H2.transpose() * H2;
    out.coeff.reserve(out.num_vars);

    // P entries: K^T E_ij K - [E_ij embedded in the leading block].
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            MatrixXd E = MatrixXd::Zero(n, n);
            E(i, j) = 1.0;
            E(j, i) = 1.0;  // i == j writes the same entry twice
            MatrixXd Cmat = K.transpose() * E * K;
            Cmat.topLeftCorner(n, n) -= E;
            out.coeff.push_back(std::move(Cmat));
        }
    }
    // Multiplier scalars enter through the H1-congruence of their dM basis.
    for (int k = 0; k < mclass.num_vars; ++k) {
        out.coeff.push_back(H1.transpose() * mclass.basis[k] * H1);
    }
    // t = gamma^2 scales the identity on the disturbance block.
    MatrixXd Ct = MatrixXd::Zero(sz, sz);
    Ct.bottomRightCorner(nd, nd) = -MatrixXd::Identity(nd, nd);
    out.coeff.push_back(std::move(Ct));
    return out;
}

double lmi_margin(const LmiAssembly& assembly, double base) {
    return base * (1.0 + assembly.L0.norm());
}

}  // namespace iqcgain
