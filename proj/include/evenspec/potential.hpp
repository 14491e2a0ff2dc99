#pragma once

#include <map>
#include <span>
#include <string>

#include "json.hpp"

#include "evenspec/types.hpp"

namespace evenspec {

enum class SmoothnessClass { L2, BoundedVariation, Smooth };

std::string to_string(SmoothnessClass c);
SmoothnessClass smoothness_from_string(const std::string& s);

/// Number of cosine (resp. exponential) coefficients synthesized when a
/// potential is given only through the other expansion.
inline constexpr int kDefaultSynthesisLimit = 4096;

/**
 * Complex potential q on [0, omega], stored through two expansions:
 *
 *   q(t) = sum_l q_l exp(2 pi i l t / omega)
 *   q(t) = mean + sqrt(2) sum_{l>=1} qc_l cos(pi l t / omega)
 *
 * Both maps are sparse.  Coefficients outside the stored support are zero.
 */
class Potential {
public:
    Potential() = default;

    /// Samples on the uniform grid t_j = j omega / M; M must be a power of
    /// two and at least 4.
    static Potential from_samples(std::span<const cplx> samples, double omega,
                                  SmoothnessClass cls);

    /// Exponential coefficients; the cosine expansion is computed from the
    /// exact integrals of the exponentials against cos(pi l t / omega) for
    /// 1 <= l <= cos_limit.
    static Potential from_exp_coeffs(const std::map<int, cplx>& coeffs, double omega,
                                     SmoothnessClass cls,
                                     int cos_limit = kDefaultSynthesisLimit);

    /// Cosine coefficients (keys >= 1) plus the mean; exponential
    /// coefficients are synthesized for |l| <= exp_limit.
    static Potential from_cos_coeffs(const std::map<int, cplx>& coeffs, cplx mean,
                                     double omega, SmoothnessClass cls,
                                     int exp_limit = kDefaultSynthesisLimit);

    double omega() const { return omega_; }
    SmoothnessClass smoothness() const { return class_; }
    cplx mean() const { return mean_; }

    cplx exp_coeff(int l) const;
    /// Cosine coefficient; index 0 is defined as zero (the mean is separate).
    cplx cos_coeff(int l) const;

    const std::map<int, cplx>& exp_coeffs() const { return exp_; }
    const std::map<int, cplx>& cos_coeffs() const { return cos_; }

    /// Largest |l| carrying a nonzero exponential coefficient.
    int exp_support() const;
    int cos_support() const;

    /// Larger of the norms computed from the two expansions.
    double l2_norm() const;

    /// Evaluation from the exponential series.
    cplx value(double t) const;
    /// Evaluation from the mean plus cosine series.
    cplx value_cos(double t) const;

    /// Max difference between the two series on a uniform grid.
    double reconstruction_mismatch(int grid_size) const;

    bool is_zero() const { return exp_.empty() && cos_.empty() && mean_ == cplx(0.0); }

    /// Same potential with the mean removed from both expansions.
    Potential without_mean() const;

    nlohmann::json to_json() const;
    static Potential from_json(const nlohmann::json& j);
    static Potential read_file(const std::string& path);

private:
    void validate() const;

    double omega_ = 1.0;
    SmoothnessClass class_ = SmoothnessClass::L2;
    cplx mean_{0.0, 0.0};
    std::map<int, cplx> exp_;
    std::map<int, cplx> cos_;
};

/// (||q||^2/n^2 + sum_{0<|p|<=n} |q_{p-n}|^2/p^2)^{1/2}
double alpha_seq(const Potential& q, int n);
/// (||q||^2/n^2 + sum_{0<|p|<=n} max(|qc_{|p+n|}|^2, |qc_{|p-n|}|^2)/p^2)^{1/2}
double beta_seq(const Potential& q, int n);

/// Bounded-variation proxy max_l |q_l| (|l| + 1) together with a log-log
/// decay slope of the exponential coefficients; the tag check passes when
/// the slope is at least `min_decay` (or too few coefficients exist to fit).
struct VariationCheck {
    double proxy = 0.0;
    double decay = 0.0;
    bool fitted = false;
    bool passed = true;
};
VariationCheck check_bounded_variation(const Potential& q, double min_decay = 0.9);

} // namespace evenspec
