#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace nrgap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Numerical tolerances shared by every module.
namespace tol {
inline constexpr double kStochastic = 1e-12;
inline constexpr double kStationary = 1e-10;
inline constexpr double kReversible = 1e-12;
inline constexpr double kNormal = 1e-10;
inline constexpr double kZeroSingularRel = 1e-8;
inline constexpr double kAuditMargin = 1e-9;
}  // namespace tol

/// Threshold below which a singular value is treated as zero.
inline double zero_threshold(double sigma_max) {
  return tol::kZeroSingularRel * std::max(1.0, sigma_max);
}

enum class ErrorCode {
  NotStochastic,
  NotSquare,
  NotIrreducible,
  MultipleInvariantMeasures,
  NotReversible,
  NotNormal,
  BadArgument,
  BadTestFunction,
  TooLargeForEnumeration,
  TooLarge,
  NoPathExists,
  MixingCapExceeded,
  InvalidSteps,
  InsufficientData,
  NotPrime,
  InvalidSpec,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nrgap
