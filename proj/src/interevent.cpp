#include "coopreg/interevent.hpp"

#include <cmath>
#include <limits>

#include "coopreg/error.hpp"

namespace coopreg {

ContractionEstimate contraction(const Matrix& f, long k_cap, double rel_tol) {
  require_square(f, "F");
  require_finite(f, "F");
  ContractionEstimate out;
  out.gamma = spectral_radius(f);
  const auto n = f.rows();
  if (n == 0) {
    out.converged = true;
    return out;
  }

  if (out.gamma == 0.0) {
    // Nilpotent: F^n = 0, so the maximum is attained within n steps.
    out.nilpotent = true;
    Matrix p = Matrix::Identity(n, n);
    for (long k = 1; k <= n; ++k) {
      p = p * f;
      out.beta = std::max(out.beta, norm2(p));
      out.k_max = k;
    }
    out.converged = true;
    return out;
  }

  const Matrix m = f / out.gamma;
  Matrix p = Matrix::Identity(n, n);
  double best = 1.0;
  double best_at_last_decade = 1.0;
  long next_decade = 10;
  long k = 0;
  while (k < k_cap) {
    ++k;
    p = p * m;
    best = std::max(best, norm2(p));
    if (k == next_decade) {
      if (best - best_at_last_decade <= rel_tol * best) {
        out.converged = true;
        break;
      }
      best_at_last_decade = best;
      next_decade = next_decade > k_cap / 10 ? k_cap : next_decade * 10;
    }
  }
  out.beta = best;
  out.k_max = k;
  return out;
}

BoundInputs make_bound_inputs(const Matrix& s, const Matrix& h_matrix, double mu, double h,
                              const TriggerFunction& f, double eta_err0,
                              const ContractionEstimate& c, const Matrix& g) {
  const auto env = f.envelope();
  if (!env) {
    throw Error(ErrorCode::kUnsupportedEnvelope,
                std::string("inter-event bounds need an exponential envelope, got ") +
                    to_string(f.kind()));
  }
  BoundInputs in;
  in.mu = mu;
  in.norm_h = norm2(h_matrix);
  in.norm_g = norm2(g);
  in.norm_s = norm2(s);
  in.beta = c.beta;
  in.gamma = c.gamma;
  in.h = h;
  in.eta_err0 = eta_err0;
  in.followers = static_cast<int>(h_matrix.rows());
  in.envelope = *env;
  return in;
}

ChiConstants::ChiConstants(const BoundInputs& in) {
  if (!(in.gamma > 0.0) || !(in.h > 0.0) || !(in.mu > 0.0) || in.followers < 1 ||
      !(in.envelope.sigma_min > 0.0) || !(in.envelope.sigma_max >= in.envelope.sigma_min) ||
      !(in.envelope.alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "bounds need gamma, h, mu, alpha > 0 and 0 < sigma_min <= sigma_max");
  }
  const double e_ah = std::exp(in.envelope.alpha * in.h);
  chi1_ = in.mu * in.norm_h * std::sqrt(static_cast<double>(in.followers)) * in.envelope.sigma_max;
  head_ = in.mu * in.norm_h * in.beta * in.eta_err0;
  drive_ = chi1_ * in.beta * in.norm_g * e_ah;
  log_rho_ = std::log(in.gamma) + in.envelope.alpha * in.h;
  rho_ = std::exp(log_rho_);
}

std::optional<double> ChiConstants::chi2() const {
  if (!contractive()) return std::nullopt;
  return drive_ / -std::expm1(log_rho_);
}

double ChiConstants::chi3(long k) const {
  const double kd = static_cast<double>(k);
  const double geometric = log_rho_ == 0.0 ? kd : std::expm1(kd * log_rho_) / std::expm1(log_rho_);
  return head_ * std::exp(kd * log_rho_) + drive_ * geometric;
}

namespace {

// LHS - RHS with the chosen chi3 value; x is s (steps) or tau (time).
double residual(const BoundInputs& in, const ChiConstants& chi, double chi3, double x,
                bool time_form) {
  const double span = time_form ? x : x * in.h;      // elapsed time
  const double steps = time_form ? x / in.h : x;     // exponent of gamma^{-1}
  const double lhs = in.norm_s > 0.0 ? std::expm1(in.norm_s * span) / in.norm_s : span;
  const double decay = steps == 0.0 ? 1.0 : std::exp(-steps * std::log(in.gamma));
  const double denom = decay * chi3 + chi.chi1() * std::exp(in.envelope.alpha * span);
  return lhs - in.envelope.sigma_min / denom;
}

double bisect(const BoundInputs& in, const ChiConstants& chi, double chi3, bool time_form) {
  auto f = [&](double x) { return residual(in, chi, chi3, x, time_form); };
  if (!(f(0.0) < 0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!(f(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100 || !std::isfinite(hi)) {
      throw Error(ErrorCode::kNumerical, "could not bracket the inter-event bound");
    }
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double chi3_or_chi2(const BoundProblem& p, long k) {
  if (k >= 0) return p.chi.chi3(k);
  const auto c2 = p.chi.chi2();
  if (!c2) throw Error(ErrorCode::kInvalidInput, "chi2 is undefined outside the contractive regime");
  return *c2;
}

}  // namespace

double bound_residual(const BoundProblem& p, long k, double s) {
  return residual(p.inputs, p.chi, chi3_or_chi2(p, k), s, false);
}

double time_bound_residual(const BoundProblem& p, long k, double tau) {
  return residual(p.inputs, p.chi, chi3_or_chi2(p, k), tau, true);
}

double solve_bound(const BoundProblem& p, long k) {
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "sampling index must be non-negative");
  return bisect(p.inputs, p.chi, p.chi.chi3(k), false);
}

double solve_asymptotic(const BoundProblem& p) {
  const auto c2 = p.chi.chi2();
  if (!c2) return 0.0;
  return bisect(p.inputs, p.chi, *c2, false);
}

TimeBounds solve_time_bounds(const BoundProblem& p, long k) {
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "sampling index must be non-negative");
  TimeBounds out{};
  out.tau = bisect(p.inputs, p.chi, p.chi.chi3(k), true);
  const auto c2 = p.chi.chi2();
  out.tau_star = c2 ? bisect(p.inputs, p.chi, *c2, true) : 0.0;
  return out;
}

}  // namespace coopreg
