#pragma once

#include <optional>
#include <vector>

#include "coopreg/linalg.hpp"

namespace coopreg {

/// Sign class of a leader eigenvalue.
///   kUnstable   Re > tol              (Q1)
///   kStable     Re < -tol             (Q2)
///   kOscillatory |Re| <= tol, |Im| > tol  (Q3)
///   kZero       |Re| <= tol, |Im| <= tol  (Q4)
enum class SpectrumClass { kUnstable, kStable, kOscillatory, kZero };

const char* to_string(SpectrumClass c);

struct LeaderModel {
  Matrix s;
};

struct LeaderEigenvalue {
  Complex raw;        // as returned by the eigensolver
  Complex value;      // real part snapped to 0 for Q3, fully snapped for Q4
  double theta = 0.0;  // principal argument of `value`
  SpectrumClass label = SpectrumClass::kZero;
};

struct SpectrumPartition {
  std::vector<LeaderEigenvalue> eigenvalues;  // with multiplicity
  double zero_tolerance = 0.0;

  bool only(SpectrumClass c) const;
};

/// Default tolerance: 1e-9 * max(1, ||S||_2).
double default_zero_tolerance(const Matrix& s);

/// Pass tol <= 0 to use default_zero_tolerance.
SpectrumPartition partition_spectrum(const LeaderModel& m, double tol = 0.0);

/// Sampled quantities of one leader eigenvalue at period h.
struct SampledEigenvalue {
  double u = 0.0;      // e^{Re h} - cos(Im h)
  double v = 0.0;      // sin(Im h)
  std::optional<double> phi;  // Arg(u + jv); empty when u + jv vanishes
  bool degenerate() const { return !phi.has_value(); }
};

/// |u + jv| below this is treated as the zero of the spectral mapping.
inline constexpr double kDegenerateMagnitude = 2e-9;

SampledEigenvalue sample_eigenvalue(Complex lambda_q, double h);

struct SampledQuantities {
  double h = 0.0;
  std::vector<SampledEigenvalue> per_q;
  /// psi[i][q] = theta_i + phi_q - theta_q; empty optional when phi_q is
  /// degenerate.
  std::vector<std::vector<std::optional<double>>> psi;
};

/// Throws kInvalidInput unless h > 0.
SampledQuantities sampled_quantities(const SpectrumPartition& p,
                                     const std::vector<double>& theta_i, double h);

}  // namespace coopreg
