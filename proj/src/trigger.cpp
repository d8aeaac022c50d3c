#include "coopreg/trigger.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "coopreg/error.hpp"

namespace coopreg {

const char* to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::kEveryStep:
      return "every_step";
    case TriggerKind::kExponential:
      return "exponential";
    case TriggerKind::kRational:
      return "rational";
    case TriggerKind::kLogExp:
      return "log_exp";
  }
  return "?";
}

std::optional<TriggerKind> trigger_kind_from_string(const char* s) {
  for (TriggerKind k : {TriggerKind::kEveryStep, TriggerKind::kExponential,
                        TriggerKind::kRational, TriggerKind::kLogExp}) {
    if (std::strcmp(s, to_string(k)) == 0) return k;
  }
  return std::nullopt;
}

TriggerFunction::TriggerFunction(TriggerKind kind, double sigma, double alpha)
    : kind_(kind), sigma_(sigma), alpha_(alpha) {
  if (kind_ == TriggerKind::kEveryStep) return;
  if (!(sigma_ > 0.0) || !(alpha_ > 0.0) || !std::isfinite(sigma_) || !std::isfinite(alpha_)) {
    throw Error(ErrorCode::kInvalidInput,
                std::string(to_string(kind_)) + " trigger needs sigma > 0 and alpha > 0");
  }
}

TriggerFunction TriggerFunction::every_step() { return {TriggerKind::kEveryStep, 0.0, 0.0}; }
TriggerFunction TriggerFunction::exponential(double sigma, double alpha) {
  return {TriggerKind::kExponential, sigma, alpha};
}
TriggerFunction TriggerFunction::rational(double sigma, double alpha) {
  return {TriggerKind::kRational, sigma, alpha};
}
TriggerFunction TriggerFunction::log_exp(double sigma, double alpha) {
  return {TriggerKind::kLogExp, sigma, alpha};
}

double TriggerFunction::operator()(double t) const {
  switch (kind_) {
    case TriggerKind::kEveryStep:
      return 0.0;
    case TriggerKind::kExponential:
      return sigma_ * std::exp(-alpha_ * t);
    case TriggerKind::kRational:
      return sigma_ / (alpha_ * t + 1.0);
    case TriggerKind::kLogExp:
      return sigma_ * std::log1p(std::exp(-alpha_ * t));
  }
  return 0.0;
}

bool TriggerFunction::fires(double error_norm, double t) const {
  if (kind_ == TriggerKind::kEveryStep) return true;
  return error_norm > (*this)(t);
}

std::optional<ExponentialEnvelope> TriggerFunction::envelope() const {
  if (kind_ != TriggerKind::kExponential) return std::nullopt;
  return ExponentialEnvelope{sigma_, sigma_, alpha_};
}

}  // namespace coopreg
