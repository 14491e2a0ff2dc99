#pragma once

// Potentials shared by the unit and acceptance tests.  The JSON files under
// fixtures/ describe the same functions for the command-line tool.

#include <cmath>
#include <map>

#include "evenspec/potential.hpp"

namespace evenspec::fixtures {

/// q(t) = sum_{l=1}^{8} (1/l) 2 cos(2 pi l t), omega = 1.
inline Potential standard(SmoothnessClass cls = SmoothnessClass::Smooth)
{
    std::map<int, cplx> c;
    for (int l = 1; l <= 8; ++l) {
        c[l] = 1.0 / l;
        c[-l] = 1.0 / l;
    }
    return Potential::from_exp_coeffs(c, 1.0, cls);
}

/// Slowly decaying complex even coefficients: q_{+-l} = (1 + i/2) l^{-0.55}.
inline Potential rough(int support = 24)
{
    std::map<int, cplx> c;
    for (int l = 1; l <= support; ++l) {
        const cplx v = cplx(1.0, 0.5) * std::pow(static_cast<double>(l), -0.55);
        c[l] = v;
        c[-l] = v;
    }
    return Potential::from_exp_coeffs(c, 1.0, SmoothnessClass::L2);
}

/// Cosine coefficients qc_l = l^{-0.55} for l <= support, for Dirichlet runs.
inline Potential rough_cos(int support = 48)
{
    std::map<int, cplx> c;
    for (int l = 1; l <= support; ++l)
        c[l] = std::pow(static_cast<double>(l), -0.55);
    return Potential::from_cos_coeffs(c, 0.0, 1.0, SmoothnessClass::L2);
}

inline Potential constant(cplx c, double omega = 1.0)
{
    return Potential::from_exp_coeffs({{0, c}}, omega, SmoothnessClass::Smooth);
}

inline Potential zero(double omega = 1.0) { return Potential::from_exp_coeffs({}, omega, SmoothnessClass::Smooth); }

} // namespace evenspec::fixtures
