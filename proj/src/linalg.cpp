#include "coopreg/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "coopreg/error.hpp"

namespace coopreg {

double principal_arg(Complex z) {
  const double a = std::atan2(z.imag(), z.real());
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " must be square, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidInput,
                std::string(what) + " has non-finite entries");
  }
}

Matrix expm(const Matrix& m) {
  require_square(m, "expm argument");
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNumerical, "expm of a non-finite matrix");
  }
  if (m.size() == 0) return m;
  Matrix out = m.exp();
  if (!out.allFinite()) {
    throw Error(ErrorCode::kNumerical, "expm overflow (norm " +
                                           std::to_string(m.norm()) + ")");
  }
  return out;
}

Discretized discretize(const Matrix& a, const Matrix& b, double t) {
  require_square(a, "state matrix");
  if (b.rows() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input matrix rows do not match state dimension");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, m) = b;
  const Matrix e = expm(aug * t);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

Matrix zoh_integral(const Matrix& s, double h) {
  require_square(s, "S");
  return discretize(s, Matrix::Identity(s.rows(), s.rows()), h).gamma;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

std::vector<Complex> eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalue argument");
  if (m.size() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    // The real QR iteration can stall on block-triangular matrices with
    // repeated diagonal blocks; the complex Schur form does not.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> fallback(m.cast<Complex>(), false);
    if (fallback.info() == Eigen::Success) {
      const auto& ev = fallback.eigenvalues();
      return std::vector<Complex>(ev.data(), ev.data() + ev.size());
    }
    throw Error(ErrorCode::kNumerical, "eigenvalue iteration did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_radius(const Matrix& m) {
  double r = 0.0;
  for (const Complex& z : eigenvalues(m)) r = std::max(r, std::abs(z));
  return r;
}

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // Largest eigenvalue of the Gram matrix; cheaper than a full SVD and
  // accurate enough for norm bounds.
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose())
                                           : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace coopreg
