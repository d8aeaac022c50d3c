#pragma once

#include "coopreg/linalg.hpp"
#include "coopreg/trigger.hpp"

namespace coopreg {

/// x' = A x + B u + P v,  e = C x + D u + F v.
struct FollowerModel {
  Matrix a, b, c, d, p, f;

  int state_dim() const { return static_cast<int>(a.rows()); }
  int input_dim() const { return static_cast<int>(b.cols()); }
  int output_dim() const { return static_cast<int>(c.rows()); }

  /// Throws kDimensionMismatch against leader dimension n.
  void validate(int n) const;
};

/// X S = A X + B U + P,  0 = C X + D U + F.
struct RegulatorSolution {
  Matrix x;
  Matrix u;
  double residual_state = 0.0;   // ||X S - A X - B U - P||_F
  double residual_output = 0.0;  // ||C X + D U + F||_F
};

/// Joint least-squares solve of the vectorized equations. Throws kUnsolvable
/// when the relative residual exceeds rel_tol.
RegulatorSolution solve_regulator(const FollowerModel& m, const Matrix& s, double rel_tol = 1e-10);

enum class ControlMode { kContinuous, kPeriodicEvent };
const char* to_string(ControlMode m);

struct ControllerConfig {
  ControlMode mode = ControlMode::kContinuous;
  Matrix gain;  // L (continuous) or K (periodic event)
  double period = 0.0;  // T, periodic event only
  TriggerFunction trigger = TriggerFunction::every_step();  // g, periodic event only
};

/// u = L x + (U - L X) eta.
Vector continuous_control(const Vector& x, const Vector& eta, const Matrix& l,
                          const RegulatorSolution& r);

struct PeriodicDecision {
  bool triggered = false;
  Vector delta;        // x(t_m) - X eta(t_m)
  Vector delta_error;  // delta_hat - delta, before the update
};

/// Controller sampling at t_m; updates delta_hat in place when
/// ||delta_hat - delta|| > g(t_m).
PeriodicDecision periodic_event_update(const Vector& x, const Vector& eta, double t_m,
                                       const ControllerConfig& cfg, const RegulatorSolution& r,
                                       Vector& delta_hat);

/// u(t) = K delta_hat + U eta(t).
Vector periodic_event_input(const Vector& delta_hat, const Vector& eta, const Matrix& k,
                            const RegulatorSolution& r);

/// (e^{A T}, int_0^T e^{A tau} d tau B).
Discretized discretize_follower(const Matrix& a, const Matrix& b, double t);

bool is_hurwitz(const Matrix& m);
bool is_schur(const Matrix& m);
/// Numerical rank of [B, AB, ..., A^{n-1}B].
int controllability_rank(const Matrix& a, const Matrix& b);

/// Rejects (kInvalidInput) non-stabilizing gains, wrong gain shapes and
/// pathological controller periods.
void validate_controller(const FollowerModel& m, const ControllerConfig& cfg);

}  // namespace coopreg
