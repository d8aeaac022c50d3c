#include "coopreg/regulation.hpp"

#include <cmath>
#include <string>

#include "coopreg/error.hpp"

namespace coopreg {

namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " must be " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
}

Matrix reshape(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace

void FollowerModel::validate(int n) const {
  const auto ni = a.rows();
  const auto mi = b.cols();
  const auto li = c.rows();
  require_shape(a, ni, ni, "A");
  require_shape(b, ni, mi, "B");
  require_shape(c, li, ni, "C");
  require_shape(d, li, mi, "D");
  require_shape(p, ni, n, "P");
  require_shape(f, li, n, "F");
  for (const Matrix* m : {&a, &b, &c, &d, &p, &f}) require_finite(*m, "follower model");
}

RegulatorSolution solve_regulator(const FollowerModel& m, const Matrix& s, double rel_tol) {
  require_square(s, "S");
  const auto n = s.rows();
  m.validate(static_cast<int>(n));
  const auto ni = m.a.rows();
  const auto mi = m.b.cols();
  const auto li = m.c.rows();
  const Matrix in = Matrix::Identity(n, n);
  const Matrix ini = Matrix::Identity(ni, ni);

  // vec(X S - A X - B U) = (S^T (x) I - I (x) A) vec X - (I (x) B) vec U
  const auto rows = ni * n + li * n;
  const auto cols = ni * n + mi * n;
  Matrix lhs = Matrix::Zero(rows, cols);
  lhs.topLeftCorner(ni * n, ni * n) = kron(s.transpose(), ini) - kron(in, m.a);
  lhs.topRightCorner(ni * n, mi * n) = -kron(in, m.b);
  lhs.bottomLeftCorner(li * n, ni * n) = kron(in, m.c);
  lhs.bottomRightCorner(li * n, mi * n) = kron(in, m.d);
  Vector rhs(rows);
  rhs.head(ni * n) = Eigen::Map<const Vector>(m.p.data(), ni * n);
  rhs.tail(li * n) = -Eigen::Map<const Vector>(m.f.data(), li * n);

  const Vector sol = lhs.completeOrthogonalDecomposition().solve(rhs);
  RegulatorSolution r;
  r.x = reshape(sol.head(ni * n), ni, n);
  r.u = reshape(sol.tail(mi * n), mi, n);
  r.residual_state = (r.x * s - m.a * r.x - m.b * r.u - m.p).norm();
  r.residual_output = (m.c * r.x + m.d * r.u + m.f).norm();

  const double scale = std::max({1.0, lhs.norm() * sol.norm(), rhs.norm()});
  if (!std::isfinite(r.residual_state) || !std::isfinite(r.residual_output) ||
      std::hypot(r.residual_state, r.residual_output) > rel_tol * scale) {
    throw Error(ErrorCode::kUnsolvable, "regulator equations have no solution (residual " +
                                            std::to_string(std::hypot(r.residual_state,
                                                                      r.residual_output)) +
                                            ")");
  }
  return r;
}

const char* to_string(ControlMode m) {
  return m == ControlMode::kContinuous ? "continuous" : "periodic_event";
}

Vector continuous_control(const Vector& x, const Vector& eta, const Matrix& l,
                          const RegulatorSolution& r) {
  return l * x + (r.u - l * r.x) * eta;
}

PeriodicDecision periodic_event_update(const Vector& x, const Vector& eta, double t_m,
                                       const ControllerConfig& cfg, const RegulatorSolution& r,
                                       Vector& delta_hat) {
  PeriodicDecision out;
  out.delta = x - r.x * eta;
  out.delta_error = delta_hat - out.delta;
  out.triggered = cfg.trigger.fires(out.delta_error.norm(), t_m);
  if (out.triggered) delta_hat = out.delta;
  return out;
}

Vector periodic_event_input(const Vector& delta_hat, const Vector& eta, const Matrix& k,
                            const RegulatorSolution& r) {
  return k * delta_hat + r.u * eta;
}

Discretized discretize_follower(const Matrix& a, const Matrix& b, double t) {
  require_square(a, "A");
  if (b.rows() != a.rows()) throw Error(ErrorCode::kDimensionMismatch, "B rows must match A");
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::kInvalidInput, "controller period must be positive");
  }
  return discretize(a, b, t);
}

bool is_hurwitz(const Matrix& m) {
  for (const Complex& z : eigenvalues(m)) {
    if (!(z.real() < 0.0)) return false;
  }
  return true;
}

bool is_schur(const Matrix& m) { return spectral_radius(m) < 1.0; }

int controllability_rank(const Matrix& a, const Matrix& b) {
  const auto n = a.rows();
  Matrix ctrb(n, n * b.cols());
  Matrix block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * b.cols(), b.cols()) = block;
    block = a * block;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(ctrb);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

void validate_controller(const FollowerModel& m, const ControllerConfig& cfg) {
  require_shape(cfg.gain, m.b.cols(), m.a.rows(), "controller gain");
  require_finite(cfg.gain, "controller gain");
  if (cfg.mode == ControlMode::kContinuous) {
    if (!is_hurwitz(m.a + m.b * cfg.gain)) {
      throw Error(ErrorCode::kInvalidInput, "A + B L is not Hurwitz");
    }
    return;
  }
  const Discretized d = discretize_follower(m.a, m.b, cfg.period);
  if (!is_schur(d.phi + d.gamma * cfg.gain)) {
    throw Error(ErrorCode::kInvalidInput, "A_d + B_d K is not Schur");
  }
  if (controllability_rank(d.phi, d.gamma) != controllability_rank(m.a, m.b)) {
    throw Error(ErrorCode::kInvalidInput, "controller period is pathological for (A, B)");
  }
}

}  // namespace coopreg
