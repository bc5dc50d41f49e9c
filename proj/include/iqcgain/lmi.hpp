#pragma once

#include "iqcgain/filter.hpp"
#include "iqcgain/multiplier.hpp"
#include "iqcgain/state_space.hpp"

namespace iqcgain {

/// The augmented system mapping (w, d) to (r, e): the plant with the IQC
/// filter hooked onto its (v, w) channels. State is [x; psi].
struct AugmentedPlant {
    StateSpace ghat;  // inputs (w: m, d: nd), outputs (r: 2m(N+1), e: ne)
    PlantBlocks plant;       // source plant blocks
    FilterRealization filt;  // source filter
    int nxhat = 0;

    MatrixXd Ahat, B1hat, B2hat, C1hat, C2hat;
    MatrixXd D11hat, D12hat, D21hat, D22hat;
};

/// Compose the plant and filter realization into the augmented system.
/// The plant's nonlinearity channel width must equal the filter's.
AugmentedPlant augment(const StateSpace& plant, const FilterRealization& filt);

/// Dense evaluation of the stability/performance matrix function
///   L(P, M, gamma^2)
/// directly from the augmented state matrices. Used as the independent
/// oracle for the affine assembly and for certificate replay.
MatrixXd dense_lmi(const AugmentedPlant& aug, const MatrixXd& P,
                   const MatrixXd& M, double gamma_sq);

/// Affine representation L(x) = L0 + sum_k x_k * coeff_k over a scalar
/// decision vector laid out as [P upper triangle | multiplier scalars | t],
/// with t = gamma^2. Immutable and shareable across threads.
struct LmiAssembly {
    int size = 0;       // LMI dimension: nxhat + m + nd
    int nxhat = 0;
    int num_p_vars = 0;    // nxhat*(nxhat+1)/2
    int num_q_vars = 0;
    int num_vars = 0;      // num_p_vars + num_q_vars + 1
    MatrixXd L0;
    std::vector<MatrixXd> coeff;  // one symmetric matrix per variable
    MultiplierParam mclass;

    int t_index() const { return num_vars - 1; }

    MatrixXd evaluate(const VectorXd& x) const;

    // Pack/unpack the symmetric P block of the decision vector.
    VectorXd pack_p(const MatrixXd& P) const;
    MatrixXd unpack_p(const VectorXd& x) const;
    VectorXd q_slice(const VectorXd& x) const;
};

LmiAssembly assemble_L(const AugmentedPlant& aug, const MultiplierParam& mclass);

/// Margin used to encode the strict inequality L < 0 as L <= -eps*I,
/// scaled by the magnitude of the constant term.
double lmi_margin(const LmiAssembly& assembly, double base = 1e-7);

}  // namespace iqcgain
