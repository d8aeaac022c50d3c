#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace coopreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Principal argument in (-pi, pi]; atan2 returns -pi for a negative real
/// with a negative-zero imaginary part, which is folded back to +pi.
double principal_arg(Complex z);

/// Matrix exponential. Throws kNumerical on non-finite input or overflow.
Matrix expm(const Matrix& m);

/// Integral of exp(S*tau) over [0, h], read off the top-right block of
/// exp([[S, I], [0, 0]] * h). Valid for singular S.
Matrix zoh_integral(const Matrix& s, double h);

/// Exact one-step map of x' = A x + B u with u held over [0, t]:
/// returns (exp(A t), int_0^t exp(A tau) d tau * B).
struct Discretized {
  Matrix phi;
  Matrix gamma;
};
Discretized discretize(const Matrix& a, const Matrix& b, double t);

Matrix kron(const Matrix& a, const Matrix& b);

/// All eigenvalues of a real square matrix.
std::vector<Complex> eigenvalues(const Matrix& m);

double spectral_radius(const Matrix& m);

/// Largest singular value.
double norm2(const Matrix& m);

void require_square(const Matrix& m, const char* what);
void require_finite(const Matrix& m, const char* what);

}  // namespace coopreg
