#include "coopreg/spectra.hpp"

#include <cmath>

#include "coopreg/error.hpp"

namespace coopreg {

const char* to_string(SpectrumClass c) {
  switch (c) {
    case SpectrumClass::kUnstable:
      return "Q1";
    case SpectrumClass::kStable:
      return "Q2";
    case SpectrumClass::kOscillatory:
      return "Q3";
    case SpectrumClass::kZero:
      return "Q4";
  }
  return "?";
}

bool SpectrumPartition::only(SpectrumClass c) const {
  for (const auto& e : eigenvalues) {
    if (e.label != c) return false;
  }
  return true;
}

double default_zero_tolerance(const Matrix& s) {
  return 1e-9 * std::max(1.0, norm2(s));
}

SpectrumPartition partition_spectrum(const LeaderModel& m, double tol) {
  require_square(m.s, "S");
  require_finite(m.s, "S");
  SpectrumPartition p;
  p.zero_tolerance = tol > 0.0 ? tol : default_zero_tolerance(m.s);
  for (const Complex& z : eigenvalues(m.s)) {
    LeaderEigenvalue e;
    e.raw = z;
    e.value = z;
    if (z.real() > p.zero_tolerance) {
      e.label = SpectrumClass::kUnstable;
    } else if (z.real() < -p.zero_tolerance) {
      e.label = SpectrumClass::kStable;
    } else if (std::abs(z.imag()) > p.zero_tolerance) {
      e.label = SpectrumClass::kOscillatory;
      e.value = Complex(0.0, z.imag());
    } else {
      e.label = SpectrumClass::kZero;
      e.value = Complex(0.0, 0.0);
    }
    e.theta = principal_arg(e.value);
    p.eigenvalues.push_back(e);
  }
  return p;
}

SampledEigenvalue sample_eigenvalue(Complex lambda_q, double h) {
  SampledEigenvalue s;
  // e^{ah} - cos(bh) written without cancellation near the origin.
  const double half = std::sin(0.5 * lambda_q.imag() * h);
  s.u = std::expm1(lambda_q.real() * h) + 2.0 * half * half;
  s.v = std::sin(lambda_q.imag() * h);
  if (std::hypot(s.u, s.v) >= kDegenerateMagnitude) {
    s.phi = principal_arg(Complex(s.u, s.v));
  }
  return s;
}

SampledQuantities sampled_quantities(const SpectrumPartition& p,
                                     const std::vector<double>& theta_i, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::kInvalidInput, "sampling period must be positive");
  }
  SampledQuantities out;
  out.h = h;
  for (const auto& e : p.eigenvalues) out.per_q.push_back(sample_eigenvalue(e.value, h));
  out.psi.resize(theta_i.size());
  for (std::size_t i = 0; i < theta_i.size(); ++i) {
    for (std::size_t q = 0; q < p.eigenvalues.size(); ++q) {
      const auto& phi = out.per_q[q].phi;
      out.psi[i].push_back(phi ? std::optional(theta_i[i] + *phi - p.eigenvalues[q].theta)
                               : std::nullopt);
    }
  }
  return out;
}

}  // namespace coopreg
