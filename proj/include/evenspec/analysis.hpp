#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "evenspec/asymptotics.hpp"
#include "evenspec/oracle.hpp"
#include "evenspec/similarity.hpp"

namespace evenspec {

struct EigenRecord {
    int n = 0;
    std::vector<cplx> oracle;     ///< oracle offsets from lambda0(n)
    std::vector<cplx> asymptotic; ///< asymptotic offsets from lambda0(n)
    double residual = 0.0;        ///< worst distance after pairing
    double shape = 0.0;           ///< remainder_shape(n)
    bool reliable = false;
};

struct EigenReport {
    SpectralModel model;
    Order order = Order::Second;
    std::vector<EigenRecord> records;
    double max_residual = 0.0;
    /// max residual / shape over records with a positive shape.
    double c_hat = 0.0;

    std::vector<std::pair<int, double>> residual_series() const;
    nlohmann::json to_json() const;
};

struct CompareOptions {
    AsymptoticOptions asymptotic;
    int n_lo = 0;  ///< 0 selects the first index above split_index
    int n_hi = 0;  ///< 0 selects N/2
    bool real_form = false; ///< per/ap: use the real-valued form of the pair
};

EigenReport compare_spectra(const MatchedSpectrum& oracle, const Potential& q,
                            const CompareOptions& opts = {});

struct RateFit {
    int n_lo = 0;
    int n_hi = 0;
    double order = 0.0; ///< negated log-log slope
    double intercept = 0.0;
    double r2 = 0.0;
    int points = 0;

    nlohmann::json to_json() const;
};

/// Least-squares line through (log n, log r).  Points with n <= 0 or a
/// residual that is zero or not finite are skipped.
RateFit fit_rate(const std::vector<std::pair<int, double>>& pairs);
/// Number of points fit_rate would use; it needs at least 6.
int fit_points(const std::vector<std::pair<int, double>>& pairs);

struct BoundCheck {
    std::string name;
    int n = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Column/row bounds on Gamma_m Q and Q Gamma_m Q for n in [n_lo, n_hi]
/// (defaults m+1 and N/2), on the mean-free part of q.
BoundReport verify_lemma_bounds(const SpectralModel& model, const Potential& q, int l, int m,
                                int n_lo = 0, int n_hi = 0);

/// Diagonal-block bounds on X* - B from n0 (per/ap) or n1 (dir) to n_hi.
BoundReport verify_block_bounds(const SimilarityResult& sim, int n_hi = 0);
/// Threshold index above which the diagonal-block bounds are claimed.
int block_bound_start(const SimilarityResult& sim);

/// ||P(tilde Omega) - P(Omega)||_2 for Omega = [lo, hi] with oracle Riesz projections.
double projection_deviation(const MatchedSpectrum& oracle, int lo, int hi);
/// Same deviation through (I+U)(I+V) P (I+V)^{-1} (I+U)^{-1}, U = Gamma_l Q, V = Gamma_m X*.
double projection_deviation_similarity(const SimilarityResult& sim, const Potential& q, int lo, int hi);
/// ||P(sigma_(m)) + sum_{m<j<=n} tilde P_j - sum_{j<=n} P_j||_2
double decomposition_deviation(const MatchedSpectrum& oracle, int n);

/// exp(A t) for A = [[a, b], [c, d]] in closed form, rho = sqrt(((a-d)/2)^2 + bc).
Eigen::Matrix2cd two_by_two_exp(cplx a, cplx b, cplx c, cplx d, double t);
/// Same closed form with rho = sqrt((a-d)^2/2 + bc); kept for comparison.
Eigen::Matrix2cd two_by_two_exp_alt_rho(cplx a, cplx b, cplx c, cplx d, double t);

/// exp(-t L~) x on the tail blocks (n > m) and the corner, using the
/// extracted blocks of the similarity result.
CVector semigroup_eval(const SimilarityResult& sim, double t, const CVector& x);

/// L0 - J_l Q - J_m X* - q0: the block-diagonal operator whose blocks are
/// those of the similarity result.
CMatrix transformed_matrix(const SimilarityResult& sim);

} // namespace evenspec
