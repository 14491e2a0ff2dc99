#include "evenspec/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace evenspec {

namespace {

void check_index(const SpectralModel& model, int n, const AsymptoticOptions& opts)
{
    model.validate();
    if (n < model.first_index())
        throw std::invalid_argument("spectral index outside the index set");
    if (n <= opts.split_index)
        throw std::invalid_argument("asymptotic formulas apply only to blocks above the split index m");
}

int cut_of(const SpectralModel& model, int series_cut) { return series_cut > 0 ? series_cut : model.N; }

// (omega/pi)^{2k}/2 sum_{j != n} (qc_{|n-j|} - qc_{n+j})^2 / (j^{2k} - n^{2k})
cplx dirichlet_series(const SpectralModel& model, const Potential& q, int n, int series_cut)
{
    const int cut = cut_of(model, series_cut);
    cplx sum = 0.0;
    for (int j = 1; j <= cut; ++j) {
        if (j == n)
            continue;
        const cplx d = q.cos_coeff(std::abs(n - j)) - q.cos_coeff(n + j);
        if (d == cplx(0.0))
            continue;
        // lambda_gap already carries (pi/omega)^{2k}.
        sum += d * d / model.lambda_gap(j, n);
    }
    return 0.5 * sum;
}

} // namespace

CSeries c_series(const SpectralModel& model, const Potential& q, int n, int series_cut)
{
    if (model.bc.is_dirichlet())
        throw std::invalid_argument("c_series is defined for per/ap only");
    const int theta = model.theta();
    const int cut = cut_of(model, series_cut);
    const int partner = -n - theta;
    auto in_range = [&](long j) { return j >= -cut - theta && j <= cut && j != n && j != partner; };

    // Candidate labels where a numerator can be nonzero.
    std::set<long> c_diag, c_diag2, c_up, c_low;
    for (const auto& [l, v] : q.exp_coeffs()) {
        if (l == 0)
            continue;
        c_diag.insert(static_cast<long>(l) - n - theta); // q_{n+j+theta}
        c_diag2.insert(static_cast<long>(n) - l);        // q_{n-j}
        c_up.insert(static_cast<long>(n) + l);           // q_{j-n}
        c_low.insert(static_cast<long>(n) - l);          // q_{n-j}
    }
    auto gap = [&](long j) { return model.lambda_gap(model.index_of_label(static_cast<int>(j)), n); };

    CSeries s;
    for (long j : c_diag)
        if (in_range(j))
            s.c11 += q.exp_coeff(-n - j - theta) * q.exp_coeff(n + j + theta) / gap(j);
    for (long j : c_diag2)
        if (in_range(j))
            s.c22 += q.exp_coeff(n - j) * q.exp_coeff(j - n) / gap(j);
    for (long j : c_up)
        if (in_range(j))
            s.c12 += q.exp_coeff(-n - j - theta) * q.exp_coeff(j - n) / gap(j);
    for (long j : c_low)
        if (in_range(j))
            s.c21 += q.exp_coeff(n - j) * q.exp_coeff(n + j + theta) / gap(j);
    return s;
}

std::array<EigenEstimate, 2> eig_asymptotic_per_ap(const SpectralModel& model, const Potential& q,
                                                   int n, const AsymptoticOptions& opts)
{
    check_index(model, n, opts);
    if (model.bc.is_dirichlet())
        throw std::invalid_argument("per/ap formula used with a Dirichlet model");
    const int w = 2 * n + model.theta();
    cplx a = q.exp_coeff(-w);
    cplx b = q.exp_coeff(w);
    cplx diag = 0.0;
    if (opts.order == Order::Second) {
        CSeries c = c_series(model, q, n, opts.series_cut);
        a += c.c12;
        b += c.c21;
        diag = c.c11;
    }
    const cplx root = std::sqrt(a * b);
    const double lam = model.lambda0(n);
    return {EigenEstimate{lam, q.mean(), -diag - root}, EigenEstimate{lam, q.mean(), -diag + root}};
}

std::array<EigenEstimate, 2> eig_asymptotic_real(const SpectralModel& model, const Potential& q,
                                                 int n, const AsymptoticOptions& opts)
{
    check_index(model, n, opts);
    if (model.bc.is_dirichlet())
        throw std::invalid_argument("per/ap formula used with a Dirichlet model");
    if (!is_real_valued(q))
        throw std::invalid_argument("potential is not real-valued");
    const int w = 2 * n + model.theta();
    CSeries c = c_series(model, q, n, opts.series_cut);
    const cplx split = q.exp_coeff(w) + c.c21;
    const double lam = model.lambda0(n);
    return {EigenEstimate{lam, q.mean(), -c.c11 - split}, EigenEstimate{lam, q.mean(), -c.c11 + split}};
}

EigenEstimate eig_asymptotic_dir(const SpectralModel& model, const Potential& q, int n,
                                 const AsymptoticOptions& opts)
{
    check_index(model, n, opts);
    if (!model.bc.is_dirichlet())
        throw std::invalid_argument("Dirichlet formula used with a per/ap model");
    cplx corr = q.cos_coeff(2 * n) / std::numbers::sqrt2;
    if (opts.order == Order::Second)
        corr -= dirichlet_series(model, q, n, opts.series_cut);
    return EigenEstimate{model.lambda0(n), q.mean(), corr};
}

CMatrix asymptotic_coupling(const SpectralModel& model, const Potential& q, int n,
                            const AsymptoticOptions& opts, bool real_form)
{
    check_index(model, n, opts);
    if (model.bc.is_dirichlet()) {
        CMatrix C(1, 1);
        C(0, 0) = opts.order == Order::Second ? dirichlet_series(model, q, n, opts.series_cut) : cplx(0.0);
        return C;
    }
    const std::size_t size = model.block_rows(n).size();
    const int w = 2 * n + model.theta();
    CSeries c;
    if (opts.order == Order::Second || real_form)
        c = c_series(model, q, n, opts.series_cut);
    if (size == 1) {
        CMatrix C(1, 1);
        C(0, 0) = c.c11;
        return C;
    }
    CMatrix C(2, 2);
    if (real_form) {
        C << c.c11, q.exp_coeff(w) + c.c21 - q.exp_coeff(-w), c.c21, c.c11;
        return C;
    }
    C << c.c11, c.c12, c.c21, c.c11;
    return C;
}

double remainder_shape(const SpectralModel& model, const Potential& q, int n)
{
    const Potential qf = q.without_mean();
    if (qf.is_zero())
        return 0.0;
    const double nn = static_cast<double>(n);
    if (q.smoothness() != SmoothnessClass::L2)
        return std::pow(nn, -(4.0 * model.k - 2.0));
    const double a = model.bc.is_dirichlet() ? beta_seq(qf, 2 * n) : alpha_seq(qf, 2 * n + model.theta());
    return a / std::pow(nn, 4.0 * model.k - 3.0);
}

BvCheck bv_coefficient_check(const Potential& q)
{
    VariationCheck v = check_bounded_variation(q);
    return {v.proxy, v.passed};
}

bool is_real_valued(const Potential& q, double tol)
{
    if (std::abs(q.mean().imag()) > tol)
        return false;
    for (const auto& [l, v] : q.exp_coeffs())
        if (std::abs(v - std::conj(q.exp_coeff(-l))) > tol)
            return false;
    for (const auto& [l, v] : q.cos_coeffs())
        if (std::abs(v.imag()) > tol)
            return false;
    return true;
}

} // namespace evenspec
