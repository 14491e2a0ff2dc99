#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace evenspec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised for malformed configuration or input files (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot deliver a trustworthy result
/// (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |a - b| / max(|b|, 1): relative error with an absolute floor near zero.
inline double relative_error(cplx a, cplx b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1.0);
}

} // namespace evenspec
