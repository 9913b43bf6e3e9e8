/**
 * @file types.hpp
 * @brief Scalar and matrix aliases, precoder tags and the error hierarchy
 * shared by every module.
 */
#ifndef XLRIS_TYPES_HPP
#define XLRIS_TYPES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace xlris {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Invalid argument supplied by the caller (index out of range, bad size).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a model (e.g. u_z <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scenario or assignment that violates a configuration invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gram matrix too ill-conditioned to invert.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure inside the conic solver or one of its callers.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Precoder { MRT, CZF, LZF };

inline std::string to_string(Precoder p)
{
    switch (p) {
    case Precoder::MRT: return "MRT";
    case Precoder::CZF: return "CZF";
    case Precoder::LZF: return "LZF";
    }
    return "?";
}

inline Precoder parse_precoder(const std::string &s)
{
    if (s == "MRT" || s == "mrt") return Precoder::MRT;
    if (s == "CZF" || s == "czf") return Precoder::CZF;
    if (s == "LZF" || s == "lzf") return Precoder::LZF;
    throw InputError("unknown precoder '" + s + "' (expected MRT, CZF or LZF)");
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace xlris

#endif
