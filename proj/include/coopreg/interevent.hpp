#pragma once

#include <optional>
#include <vector>

#include "coopreg/linalg.hpp"
#include "coopreg/trigger.hpp"

namespace coopreg {

/// ||F^k|| <= beta gamma^k for 0 <= k <= k_max.
struct ContractionEstimate {
  double gamma = 0.0;      // spectral radius of F
  double beta = 1.0;       // max_k ||F^k|| / gamma^k, or max_k ||F^k|| when nilpotent
  long k_max = 0;
  bool nilpotent = false;  // gamma == 0
  bool converged = false;  // running maximum settled before the iteration cap
};

/// Largest power of F examined when estimating beta.
inline constexpr long kDefaultPowerCap = 1'000'000;

/// Power iteration on F / gamma, checking the running maximum at every decade
/// of k and stopping once it changes by less than `rel_tol` over a decade.
ContractionEstimate contraction(const Matrix& f, long k_cap = kDefaultPowerCap,
                                double rel_tol = 1e-6);

/// Scalars entering the inter-event bounds.
struct BoundInputs {
  double mu = 0.0;
  double norm_h = 0.0;      // ||H||
  double norm_g = 0.0;      // ||G(mu)||
  double norm_s = 0.0;      // ||S||
  double beta = 1.0;
  double gamma = 0.0;
  double h = 0.0;
  double eta_err0 = 0.0;    // ||eta~(t_0)||, stacked
  int followers = 1;
  ExponentialEnvelope envelope;
};

/// Builds the inputs for an exponential-envelope trigger; any other kind
/// raises kUnsupportedEnvelope.
BoundInputs make_bound_inputs(const Matrix& s, const Matrix& h_matrix, double mu, double h,
                              const TriggerFunction& f, double eta_err0,
                              const ContractionEstimate& c, const Matrix& g);

class ChiConstants {
 public:
  explicit ChiConstants(const BoundInputs& in);

  double chi1() const noexcept { return chi1_; }
  /// Present only in the contractive regime gamma e^{alpha h} < 1.
  std::optional<double> chi2() const;
  /// mu ||H|| beta ||eta~0|| rho^k + chi1 beta ||G|| e^{alpha h} sum_{j<k} rho^j
  double chi3(long k) const;
  /// rho = gamma e^{alpha h}.
  double rho() const noexcept { return rho_; }
  bool contractive() const noexcept { return log_rho_ < 0.0; }

 private:
  double chi1_;
  double head_;   // mu ||H|| beta ||eta~0||
  double drive_;  // chi1 beta ||G|| e^{alpha h}
  double log_rho_;
  double rho_;
};

struct BoundProblem {
  BoundInputs inputs;
  ChiConstants chi;

  explicit BoundProblem(const BoundInputs& in) : inputs(in), chi(in) {}
};

/// Root s > 0 of (e^{||S|| s h} - 1)/||S|| = sigma_m / (gamma^{-s} chi3(k) + chi1 e^{alpha h s}).
/// The left side becomes s h when ||S|| = 0. Returns 0 when the right side
/// has underflowed to zero.
double solve_bound(const BoundProblem& p, long k);

/// Same equation with chi3 replaced by chi2; 0 outside the contractive regime.
double solve_asymptotic(const BoundProblem& p);

struct TimeBounds {
  double tau;       // tau_d(k, h)
  double tau_star;  // tau_d*(h)
};

/// Continuous-time counterparts: (e^{||S|| tau} - 1)/||S|| =
/// sigma_m / (gamma^{-tau/h} chi3 + chi1 e^{alpha tau}).
TimeBounds solve_time_bounds(const BoundProblem& p, long k);

/// LHS minus RHS of the step equation at s, with chi3(k) or chi2 (k < 0).
double bound_residual(const BoundProblem& p, long k, double s);
/// LHS minus RHS of the time equation at tau, with chi3(k) or chi2 (k < 0).
double time_bound_residual(const BoundProblem& p, long k, double tau);

}  // namespace coopreg
