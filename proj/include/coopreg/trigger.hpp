#pragma once

#include <optional>

namespace coopreg {

enum class TriggerKind {
  kEveryStep,    // f = 0+, fires at every sampling instant
  kExponential,  // sigma * exp(-alpha t)
  kRational,     // sigma / (alpha t + 1)
  kLogExp,       // sigma * ln(1 + exp(-alpha t))
};

const char* to_string(TriggerKind k);
std::optional<TriggerKind> trigger_kind_from_string(const char* s);

/// sigma_min e^{-alpha t} <= f(t) <= sigma_max e^{-alpha t}
struct ExponentialEnvelope {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double alpha = 0.0;
};

/// Positive, bounded threshold decreasing to zero; compared against the norm
/// of a local error with strict inequality.
class TriggerFunction {
 public:
  static TriggerFunction every_step();
  static TriggerFunction exponential(double sigma, double alpha);
  static TriggerFunction rational(double sigma, double alpha);
  static TriggerFunction log_exp(double sigma, double alpha);

  TriggerKind kind() const noexcept { return kind_; }
  double sigma() const noexcept { return sigma_; }
  double alpha() const noexcept { return alpha_; }

  double operator()(double t) const;

  /// True when an error of this norm fires an event at time t.
  bool fires(double error_norm, double t) const;

  /// Only the exponential kind declares an envelope.
  std::optional<ExponentialEnvelope> envelope() const;

  bool operator==(const TriggerFunction&) const = default;

 private:
  TriggerFunction(TriggerKind kind, double sigma, double alpha);

  TriggerKind kind_;
  double sigma_;
  double alpha_;
};

}  // namespace coopreg
