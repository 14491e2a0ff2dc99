#pragma once

#include <array>

#include "evenspec/basis.hpp"

namespace evenspec {

enum class Order { First = 1, Second = 2 };

struct AsymptoticOptions {
    Order order = Order::Second;
    /// Sums run over |j| <= series_cut (per/ap labels) or 1 <= j <= series_cut
    /// (dir).  Zero selects the truncation N of the model.
    int series_cut = 0;
    /// Blocks with index <= split_index are rejected (the m of the similarity
    /// step); -1 disables the check.
    int split_index = -1;
};

/**
 * Asymptotic eigenvalue written as lambda_n - mean + correction.  Keeping
 * the three parts apart lets callers compare corrections directly, without
 * rounding them against the large lambda_n.
 */
struct EigenEstimate {
    double lambda0 = 0.0;
    cplx mean{0.0, 0.0};
    cplx correction{0.0, 0.0};

    cplx value() const { return cplx(lambda0) - mean + correction; }
    /// value() - lambda0
    cplx offset() const { return correction - mean; }
};

struct CSeries {
    cplx c11{0.0, 0.0};
    cplx c22{0.0, 0.0};
    cplx c12{0.0, 0.0};
    cplx c21{0.0, 0.0};
};

/// Second-order coupling sums of block n (per/ap), mean removed.
CSeries c_series(const SpectralModel& model, const Potential& q, int n, int series_cut = 0);

/// Pair lambda_n - q0 - c11 -/+ sqrt(a_n b_n), a_n = q_{-2n-theta} + c12,
/// b_n = q_{2n+theta} + c21; first order drops every c term.
std::array<EigenEstimate, 2> eig_asymptotic_per_ap(const SpectralModel& model, const Potential& q,
                                                   int n, const AsymptoticOptions& opts = {});

/// Real-valued potentials: lambda_n - q0 - c11 -/+ (q_{2n+theta} + c21).
std::array<EigenEstimate, 2> eig_asymptotic_real(const SpectralModel& model, const Potential& q,
                                                 int n, const AsymptoticOptions& opts = {});

/// lambda_n - q0 + qc_{2n}/sqrt(2)
///   - (omega/pi)^{2k}/2 sum_{j != n} (qc_{|n-j|} - qc_{n+j})^2 / (j^{2k} - n^{2k})
EigenEstimate eig_asymptotic_dir(const SpectralModel& model, const Potential& q, int n,
                                 const AsymptoticOptions& opts = {});

/// Coupling matrix C of the asymptotic formula: the estimate for block n is
/// the spectrum of lambda_n - q0 - Q_{S,S} - C, with Q_{S,S} the block of the
/// mean-free Q matrix in row order (-n-theta, n).  First order gives C = 0.
/// With real_form the per/ap splitting q_{2n+theta} + c21 replaces the root.
CMatrix asymptotic_coupling(const SpectralModel& model, const Potential& q, int n,
                            const AsymptoticOptions& opts = {}, bool real_form = false);

/// Expected decay of the second-order remainder for the potential's class.
double remainder_shape(const SpectralModel& model, const Potential& q, int n);

struct BvCheck {
    double c_hat = 0.0;
    bool pass = true;
};
BvCheck bv_coefficient_check(const Potential& q);

/// True when every stored coefficient is consistent with a real-valued q.
bool is_real_valued(const Potential& q, double tol = 1e-12);

} // namespace evenspec
