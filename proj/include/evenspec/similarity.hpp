#pragma once

#include <array>
#include <map>

#include "json.hpp"

#include "evenspec/transformers.hpp"

namespace evenspec {

struct FixedPointOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

struct PreliminaryTransform {
    HSOperator JlQ;
    HSOperator B;
};

struct FixedPointSolution {
    HSOperator Xstar;
    int iterations = 0;
    double residual = 0.0;
};

struct SimilarityResult {
    SpectralModel model;
    cplx mean{0.0, 0.0};
    int l = 0;
    int m = 0;
    HSOperator JlQ;
    HSOperator B;
    HSOperator Xstar;
    int iterations = 0;
    double residual = 0.0;
    /// n > m: 2x2 (per/ap, 1x1 for the rank-one block) or 1x1 (dir) matrices.
    std::map<int, CMatrix> blocks;
    /// (m)-corner of L0 - J_l Q - X* - mean, in the order of corner_rows.
    CMatrix corner;
    std::vector<int> corner_rows;

    std::vector<cplx> block_eigenvalues(int n) const;
    std::vector<cplx> corner_eigenvalues() const;
    nlohmann::json to_json() const;
};

/// Smallest l in the index set with ||Gamma_l Q||_2 <= 1/2, for the
/// mean-free part of q.
int find_l(const SpectralModel& model, const Potential& q);

/// B = (I + Gamma_l Q)^{-1} (Q Gamma_l Q - (Gamma_l Q) J_l Q) on the mean-free part.
PreliminaryTransform preliminary_transform(const SpectralModel& model, const Potential& q, int l);

/// Smallest m >= l+1 satisfying the contraction condition for this ||B||_2.
int find_m(const SpectralModel& model, double b_norm, int l);
inline int find_m(const SpectralModel& model, const HSOperator& B, int l)
{
    return find_m(model, hs_norm(B.entries), l);
}

/// Phi(X) = B Gamma_m X - (Gamma_m X)(J_m B) - (Gamma_m X) J_m(B Gamma_m X) + B
CMatrix phi(const Transformers& t, const CMatrix& B, const CMatrix& JmB, int m, const CMatrix& X);

FixedPointSolution solve_fixed_point(const SpectralModel& model, const HSOperator& B, int m,
                                     const FixedPointOptions& opts = {});

SimilarityResult extract_blocks(const SpectralModel& model, const Potential& q, int l, int m,
                                const PreliminaryTransform& pre, const FixedPointSolution& fp);

/// Full pipeline: find_l, preliminary transform, find_m, fixed point, blocks.
SimilarityResult run_similarity(const SpectralModel& model, const Potential& q,
                                const FixedPointOptions& opts = {});

/// Eigenvalues of a 2x2 matrix as (a+d)/2 -/+ sqrt(((a-d)/2)^2 + bc), principal root.
std::array<cplx, 2> block_eigs(const Eigen::Matrix2cd& A);

} // namespace evenspec
