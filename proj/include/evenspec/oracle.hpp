#pragma once

#include <map>
#include <vector>

#include "evenspec/basis.hpp"

namespace evenspec {

struct DenseEigen {
    CVector values;
    CMatrix right; ///< columns are right eigenvectors
    CMatrix left;  ///< rows are left eigenvectors with left.row(i) * right.col(i) = 1
};

/// Full eigendecomposition; Hermitian input goes through the self-adjoint
/// solver so that clustered eigenvalues keep orthogonal eigenvectors.
DenseEigen dense_eigs(const CMatrix& M);

/**
 * Invariant subspace of L0 - Q belonging to a set S of rows (a block, or the
 * low corner), computed by the fixed-point iteration
 *
 *   L [I; X] = [I; X] T,   [I Z] L = T_L [I Z]
 *
 * on the complementary rows.  Gaps are taken relative to a reference label
 * with exact eigenvalue differences, so eigenvalues of T come out as small
 * offsets from lambda_ref rather than as large absolute numbers.
 */
struct InvariantSubspace {
    std::vector<int> rows; ///< the set S
    int ref_index = 0;     ///< lambda_ref = lambda0(ref_index)
    CMatrix T;             ///< restriction minus lambda_ref * I (|S| x |S|)
    CMatrix q_block;       ///< Q_{S,S}
    CMatrix coupling;      ///< Q_{S,R} X_R, so that T = diag(gaps) - q_block - coupling
    CMatrix X;             ///< d x |S| right basis; identity on rows S
    CMatrix Z;             ///< |S| x d left basis; identity on rows S
    int iterations = 0;

    std::vector<cplx> offsets() const; ///< eigenvalues of T
    CMatrix projector() const;         ///< X (Z X)^{-1} Z
};

/// Requires the rows outside S to be separated from S by more than twice
/// the infinity norm of Q.
InvariantSubspace invariant_subspace(const SpectralModel& model, const CMatrix& Q,
                                     const std::vector<int>& rows, int ref_index);

/// Smallest index from which every block is isolated: its distance to all
/// other unperturbed eigenvalues is at least `factor` times ||Q||_inf.
int isolation_index(const SpectralModel& model, double q_inf_norm, double factor = 8.0);

struct MatchedEigenvalue {
    int index = -1;      ///< spectral index; -1 when unmatched
    cplx value;          ///< eigenvalue of the truncated L
    cplx offset;         ///< value - lambda0(index), evaluated without cancellation
    double confidence = 0.0;
    bool reliable = false;
    bool refined = false; ///< value taken from the invariant-subspace iteration
    int column = -1;      ///< column of the dense decomposition
};

/// Restricted operator of an isolated block written as -q_block - coupling
/// (mean-free Q, offsets from lambda_n).
struct RefinedBlock {
    CMatrix q_block;
    CMatrix coupling;
};

struct OracleOptions {
    bool refine = true;
    double isolation_factor = 8.0;
};

struct MatchedSpectrum {
    SpectralModel model;
    cplx mean{0.0, 0.0};
    DenseEigen eig;
    std::map<int, std::vector<MatchedEigenvalue>> by_index;
    std::vector<MatchedEigenvalue> unmatched;
    std::map<int, RefinedBlock> blocks; ///< isolated reliable blocks
    int isolation = 0;

    bool reliable(int n) const;
    /// Dense columns matched to indices in [lo, hi].
    std::vector<int> columns(int lo, int hi) const;
    std::vector<MatchedEigenvalue> all() const; ///< sorted by index, then value
};

MatchedSpectrum truncated_spectrum(const SpectralModel& model, const Potential& q,
                                   const OracleOptions& opts = {});

/// Sum of right * left over the selected columns.  Throws when a selected
/// eigenvalue lies within `min_gap` of an unselected one.
CMatrix riesz_projection(const DenseEigen& eig, const std::vector<int>& selected,
                         double min_gap = 0.0);

/// exp(-t M) by scaling and squaring.
CMatrix matrix_exponential(const CMatrix& M, double t);

} // namespace evenspec
