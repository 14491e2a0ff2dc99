#include "evenspec/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace evenspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Coefficients below this fraction of the largest one are treated as DFT
// round-off and dropped, so exact harmonics come back with exact support.
constexpr double kPruneRelative = 1e-13;

// (1/omega) * integral over [0, omega] of exp(i pi r t / omega).
cplx half_period_integral(long r)
{
    if (r == 0)
        return 1.0;
    if (r % 2 == 0)
        return 0.0;
    return {0.0, 2.0 / (kPi * static_cast<double>(r))};
}

void prune(std::map<int, cplx>& m)
{
    double top = 0.0;
    for (const auto& [l, v] : m)
        top = std::max(top, std::abs(v));
    std::erase_if(m, [&](const auto& kv) {
        return std::abs(kv.second) <= kPruneRelative * top;
    });
}

void require_finite(cplx v, const char* what)
{
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::invalid_argument(std::string("non-finite value in ") + what);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

std::string to_string(SmoothnessClass c)
{
    switch (c) {
    case SmoothnessClass::L2: return "l2";
    case SmoothnessClass::BoundedVariation: return "bv";
    case SmoothnessClass::Smooth: return "smooth";
    }
    return "l2";
}

SmoothnessClass smoothness_from_string(const std::string& s)
{
    if (s == "l2" || s == "L2")
        return SmoothnessClass::L2;
    if (s == "bv" || s == "BV")
        return SmoothnessClass::BoundedVariation;
    if (s == "smooth")
        return SmoothnessClass::Smooth;
    throw ConfigError("unknown potential class '" + s + "'");
}

void Potential::validate() const
{
    if (!(omega_ > 0.0) || !std::isfinite(omega_))
        throw std::invalid_argument("omega must be positive and finite");
    require_finite(mean_, "potential mean");
    for (const auto& [l, v] : exp_)
        require_finite(v, "exponential coefficients");
    for (const auto& [l, v] : cos_)
        require_finite(v, "cosine coefficients");
    if (class_ != SmoothnessClass::L2 && !check_bounded_variation(*this).passed)
        throw std::invalid_argument("coefficients decay too slowly for class '" +
                                    to_string(class_) + "'");
}

Potential Potential::from_samples(std::span<const cplx> samples, double omega,
                                  SmoothnessClass cls)
{
    const std::size_t M = samples.size();
    if (M < 4 || !is_power_of_two(M))
        throw std::invalid_argument("sample count must be a power of two and at least 4");
    if (!(omega > 0.0))
        throw std::invalid_argument("omega must be positive");
    for (cplx s : samples)
        require_finite(s, "samples");

    Eigen::FFT<double> fft;
    std::vector<cplx> in(samples.begin(), samples.end());
    std::vector<cplx> out;
    fft.fwd(out, in);

    Potential p;
    p.omega_ = omega;
    p.class_ = cls;
    const int half = static_cast<int>(M / 2);
    for (std::size_t j = 0; j < M; ++j) {
        // Frequencies taken in (-M/2, M/2].
        int l = static_cast<int>(j) <= half ? static_cast<int>(j) : static_cast<int>(j) - static_cast<int>(M);
        p.exp_[l] = out[j] / static_cast<double>(M);
    }
    p.mean_ = p.exp_[0];
    prune(p.exp_);

    // Even extension to a grid of 2M points on [-omega, omega].
    std::vector<cplx> ext(2 * M);
    for (std::size_t j = 0; j < M; ++j)
        ext[j] = samples[j];
    ext[M] = samples[0];
    for (std::size_t j = 1; j < M; ++j)
        ext[2 * M - j] = samples[j];
    std::vector<cplx> ext_out;
    fft.fwd(ext_out, ext);
    for (std::size_t l = 1; l <= M; ++l) {
        cplx c = ext_out[l] / static_cast<double>(2 * M);
        p.cos_[static_cast<int>(l)] = (l == M) ? c / kSqrt2 : c * kSqrt2;
    }
    // Relative pruning is measured against the mean too, so that a constant
    // input yields an empty cosine map.
    double top = std::abs(p.mean_);
    for (const auto& [l, v] : p.cos_)
        top = std::max(top, std::abs(v));
    std::erase_if(p.cos_, [&](const auto& kv) { return std::abs(kv.second) <= kPruneRelative * top; });

    p.validate();
    return p;
}

Potential Potential::from_exp_coeffs(const std::map<int, cplx>& coeffs, double omega,
                                     SmoothnessClass cls, int cos_limit)
{
    if (!(omega > 0.0))
        throw std::invalid_argument("omega must be positive");
    Potential p;
    p.omega_ = omega;
    p.class_ = cls;
    for (const auto& [l, v] : coeffs) {
        require_finite(v, "exponential coefficients");
        if (v != cplx(0.0))
            p.exp_[l] = v;
    }
    p.mean_ = p.exp_coeff(0);

    for (int l = 1; l <= cos_limit; ++l) {
        cplx acc = 0.0;
        if (l % 2 == 0) {
            acc = (p.exp_coeff(l / 2) + p.exp_coeff(-l / 2)) / kSqrt2;
        } else {
            // Terms s and -s share the weight 4s / (4s^2 - l^2) up to sign,
            // so an even potential contributes exactly zero.
            for (const auto& [s, v] : p.exp_) {
                if (s <= 0)
                    continue;
                const double two_s = 2.0 * s;
                const double w = 2.0 * two_s / (two_s * two_s - static_cast<double>(l) * l);
                acc += (v - p.exp_coeff(-s)) * w;
            }
            for (const auto& [s, v] : p.exp_)
                if (s < 0 && p.exp_.count(-s) == 0) {
                    const double two_s = -2.0 * s;
                    acc -= v * (2.0 * two_s / (two_s * two_s - static_cast<double>(l) * l));
                }
            acc *= cplx(0.0, kSqrt2 / kPi);
        }
        if (acc != cplx(0.0))
            p.cos_[l] = acc;
    }
    p.validate();
    return p;
}

Potential Potential::from_cos_coeffs(const std::map<int, cplx>& coeffs, cplx mean,
                                     double omega, SmoothnessClass cls, int exp_limit)
{
    if (!(omega > 0.0))
        throw std::invalid_argument("omega must be positive");
    Potential p;
    p.omega_ = omega;
    p.class_ = cls;
    p.mean_ = mean;
    for (const auto& [l, v] : coeffs) {
        if (l < 1)
            throw std::invalid_argument("cosine coefficient index must be >= 1");
        require_finite(v, "cosine coefficients");
        if (v != cplx(0.0))
            p.cos_[l] = v;
    }

    std::map<int, cplx> e;
    if (mean != cplx(0.0))
        e[0] = mean;
    for (const auto& [l, v] : p.cos_) {
        if (l % 2 == 0) {
            e[l / 2] += v / kSqrt2;
            e[-l / 2] += v / kSqrt2;
        } else {
            for (int s = -exp_limit; s <= exp_limit; ++s) {
                cplx c = v * kSqrt2 * 0.5 *
                         (half_period_integral(static_cast<long>(l) - 2L * s) +
                          half_period_integral(-static_cast<long>(l) - 2L * s));
                if (c != cplx(0.0))
                    e[s] += c;
            }
        }
    }
    for (const auto& [l, v] : e)
        if (v != cplx(0.0))
            p.exp_[l] = v;
    p.validate();
    return p;
}

cplx Potential::exp_coeff(int l) const
{
    auto it = exp_.find(l);
    return it == exp_.end() ? cplx(0.0) : it->second;
}

cplx Potential::cos_coeff(int l) const
{
    if (l <= 0)
        return 0.0;
    auto it = cos_.find(l);
    return it == cos_.end() ? cplx(0.0) : it->second;
}

int Potential::exp_support() const
{
    int s = 0;
    for (const auto& [l, v] : exp_)
        s = std::max(s, std::abs(l));
    return s;
}

int Potential::cos_support() const { return cos_.empty() ? 0 : cos_.rbegin()->first; }

double Potential::l2_norm() const
{
    double e = 0.0;
    for (const auto& [l, v] : exp_)
        e += std::norm(v);
    double c = std::norm(mean_);
    for (const auto& [l, v] : cos_)
        c += std::norm(v);
    return std::sqrt(std::max(e, c));
}

cplx Potential::value(double t) const
{
    cplx acc = 0.0;
    for (const auto& [l, v] : exp_)
        acc += v * std::exp(cplx(0.0, 2.0 * kPi * l * t / omega_));
    return acc;
}

cplx Potential::value_cos(double t) const
{
    cplx acc = mean_;
    for (const auto& [l, v] : cos_)
        acc += kSqrt2 * v * std::cos(kPi * l * t / omega_);
    return acc;
}

double Potential::reconstruction_mismatch(int grid_size) const
{
    double worst = 0.0;
    for (int j = 0; j < grid_size; ++j) {
        double t = omega_ * j / grid_size;
        worst = std::max(worst, std::abs(value(t) - value_cos(t)));
    }
    return worst;
}

Potential Potential::without_mean() const
{
    Potential p = *this;
    p.exp_.erase(0);
    p.mean_ = 0.0;
    return p;
}

nlohmann::json Potential::to_json() const
{
    nlohmann::json j;
    j["omega"] = omega_;
    j["class"] = to_string(class_);
    j["representation"] = "exp";
    auto arr = nlohmann::json::array();
    for (const auto& [l, v] : exp_)
        arr.push_back({l, v.real(), v.imag()});
    j["coeffs"] = arr;
    return j;
}

Potential Potential::from_json(const nlohmann::json& j)
{
    try {
        double omega = j.at("omega").get<double>();
        SmoothnessClass cls = smoothness_from_string(j.value("class", std::string("l2")));
        std::string rep = j.value("representation", std::string(j.contains("samples") ? "samples" : "exp"));
        if (rep == "samples") {
            std::vector<cplx> s;
            for (const auto& e : j.at("samples"))
                s.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
            return from_samples(s, omega, cls);
        }
        std::map<int, cplx> m;
        for (const auto& e : j.at("coeffs")) {
            int l = e.at(0).get<int>();
            cplx v(e.at(1).get<double>(), e.size() > 2 ? e.at(2).get<double>() : 0.0);
            m[l] += v;
        }
        if (rep == "exp")
            return from_exp_coeffs(m, omega, cls);
        if (rep == "cos") {
            // Index 0 of the cosine representation carries the mean.
            cplx mean = 0.0;
            if (auto it = m.find(0); it != m.end()) {
                mean = it->second;
                m.erase(it);
            }
            return from_cos_coeffs(m, mean, omega, cls);
        }
        throw ConfigError("unknown potential representation '" + rep + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed potential: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid potential: ") + e.what());
    }
}

Potential Potential::read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open potential file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return from_json(j);
}

double alpha_seq(const Potential& q, int n)
{
    if (n < 1)
        throw std::invalid_argument("alpha_seq needs n >= 1");
    const double norm = q.l2_norm();
    double acc = norm * norm / (static_cast<double>(n) * n);
    for (int p = -n; p <= n; ++p) {
        if (p == 0)
            continue;
        acc += std::norm(q.exp_coeff(p - n)) / (static_cast<double>(p) * p);
    }
    return std::sqrt(acc);
}

double beta_seq(const Potential& q, int n)
{
    if (n < 1)
        throw std::invalid_argument("beta_seq needs n >= 1");
    const double norm = q.l2_norm();
    double acc = norm * norm / (static_cast<double>(n) * n);
    for (int p = -n; p <= n; ++p) {
        if (p == 0)
            continue;
        double a = std::norm(q.cos_coeff(std::abs(p + n)));
        double b = std::norm(q.cos_coeff(std::abs(p - n)));
        acc += std::max(a, b) / (static_cast<double>(p) * p);
    }
    return std::sqrt(acc);
}

VariationCheck check_bounded_variation(const Potential& q, double min_decay)
{
    VariationCheck r;
    // Envelope of |q_l| over |l|, then a least-squares slope in log-log.
    std::map<int, double> env;
    for (const auto& [l, v] : q.exp_coeffs()) {
        r.proxy = std::max(r.proxy, std::abs(v) * (std::abs(l) + 1));
        if (l != 0)
            env[std::abs(l)] = std::max(env[std::abs(l)], std::abs(v));
    }
    if (env.size() < 8)
        return r;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double cnt = 0;
    for (const auto& [l, a] : env) {
        double x = std::log(static_cast<double>(l));
        double y = std::log(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1;
    }
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    r.decay = -slope;
    r.fitted = true;
    r.passed = r.decay >= min_decay;
    return r;
}

} // namespace evenspec
