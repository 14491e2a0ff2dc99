#pragma once

#include <vector>

#include "evenspec/basis.hpp"

namespace evenspec {

/// Hilbert-Schmidt operators share the dense layout of OperatorMatrix.
using HSOperator = OperatorMatrix;

/**
 * J_m and Gamma_m on a fixed truncation.  The table of inverse eigenvalue
 * gaps is built once; each application is O(d^2).
 *
 * J_m X   = J(X - P_(m) X P_(m)) + P_(m) X P_(m)
 * Gamma_m X = Gamma(X - P_(m) X P_(m))
 *
 * m = -1 selects the plain J and Gamma (no corner).  For per/ap, m = 0 with
 * theta = 1 or for the rank one block n = 0 the corner is block 0 alone,
 * which J already keeps and Gamma already drops, so J_0 = J and Gamma_0 = Gamma.
 */
class Transformers {
public:
    explicit Transformers(const SpectralModel& model);

    const SpectralModel& model() const { return model_; }

    CMatrix J(const CMatrix& X, int m = -1) const;
    CMatrix Gamma(const CMatrix& X, int m = -1) const;

    /// X * D where D is block diagonal with an (m)-corner (the range of J_m).
    CMatrix times_block_diagonal(const CMatrix& X, const CMatrix& D, int m) const;

    int index_of_row(int r) const { return index_[r]; }

private:
    void check(const CMatrix& X, int m) const;
    bool kept(int r, int c, int m) const
    {
        return index_[r] == index_[c] || (index_[r] <= m && index_[c] <= m);
    }

    SpectralModel model_;
    std::vector<int> index_;
    CMatrix inv_gap_; // 1/(lambda_r - lambda_c), zero within a block
};

HSOperator apply_J(const SpectralModel& model, const HSOperator& X);
HSOperator apply_Gamma(const SpectralModel& model, const HSOperator& X);
HSOperator apply_Jm(const SpectralModel& model, int m, const HSOperator& X);
HSOperator apply_Gamma_m(const SpectralModel& model, int m, const HSOperator& X);

/// Bound on ||Gamma_m||_2 as an operator on Hilbert-Schmidt matrices.
double gamma_norm_bound(const SpectralModel& model, int m);

double hs_norm(const CMatrix& X);
cplx hs_inner(const CMatrix& X, const CMatrix& Y);

} // namespace evenspec
