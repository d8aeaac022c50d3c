#include "coopreg/observer.hpp"

#include <cmath>
#include <string>

#include "coopreg/error.hpp"

namespace coopreg {

ErrorDynamics build_error_dynamics(const Matrix& s, const Matrix& h_matrix, double mu, double h) {
  require_square(s, "S");
  require_square(h_matrix, "H");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::kInvalidInput, "observer gain must be non-negative");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::kInvalidInput, "sampling period must be positive");
  }
  const Discretized d = discretize(s, Matrix::Identity(s.rows(), s.rows()), h);
  const auto n_f = h_matrix.rows();
  ErrorDynamics out;
  out.g = mu * kron(h_matrix, d.gamma);
  out.f = kron(Matrix::Identity(n_f, n_f), d.phi) - out.g;
  return out;
}

ObserverBank::ObserverBank(const Digraph& g, Matrix s, double mu, double h,
                           std::vector<Vector> eta0, std::vector<TriggerFunction> triggers)
    : graph_(g), s_(std::move(s)), mu_(mu), h_(h), triggers_(std::move(triggers)) {
  require_square(s_, "S");
  require_finite(s_, "S");
  if (!(mu_ >= 0.0) || !std::isfinite(mu_)) {
    throw Error(ErrorCode::kInvalidInput, "observer gain must be non-negative");
  }
  if (!(h_ > 0.0) || !std::isfinite(h_)) {
    throw Error(ErrorCode::kInvalidInput, "sampling period must be positive");
  }
  const int n_f = graph_.follower_count();
  const auto n = s_.rows();
  if (eta0.empty()) eta0.assign(static_cast<std::size_t>(n_f), Vector::Zero(n));
  if (static_cast<int>(eta0.size()) != n_f) {
    throw Error(ErrorCode::kDimensionMismatch, "need one initial estimate per follower");
  }
  for (const auto& e : eta0) {
    if (e.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "initial estimate has the wrong dimension");
    }
  }
  if (triggers_.size() == 1) triggers_.assign(static_cast<std::size_t>(n_f), triggers_.front());
  if (static_cast<int>(triggers_.size()) != n_f) {
    throw Error(ErrorCode::kDimensionMismatch, "need one trigger function or one per follower");
  }
  eta_ = std::move(eta0);
  step_ = expm(s_ * h_);
  copies_.resize(static_cast<std::size_t>(n_f));
  for (int i = 1; i <= n_f; ++i) {
    auto& c = copies_[idx(i)];
    c.emplace(i, Vector::Zero(n));
    for (int j : graph_.neighbors(i)) c.emplace(j, Vector::Zero(n));
  }
  correction_.assign(static_cast<std::size_t>(n_f), Vector::Zero(n));
  last_event_k_.assign(static_cast<std::size_t>(n_f), 0);
  event_count_.assign(static_cast<std::size_t>(n_f), 0);
}

std::size_t ObserverBank::idx(int i) const {
  if (i < 1 || i > graph_.follower_count()) {
    throw Error(ErrorCode::kInvalidInput, "follower index out of range: " + std::to_string(i));
  }
  return static_cast<std::size_t>(i - 1);
}

std::vector<ObserverEvent> ObserverBank::sample(long k, const Vector& v_k) {
  if (k != next_k_) {
    throw Error(ErrorCode::kInvalidInput, "sampling instants must be processed in order");
  }
  if (v_k.size() != s_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "leader value has the wrong dimension");
  }
  const int n_f = graph_.follower_count();
  const double t = static_cast<double>(k) * h_;
  std::vector<int> fired;
  if (k == 0) {
    for (int i = 1; i <= n_f; ++i) fired.push_back(i);
  } else {
    for (auto& c : copies_) {
      for (auto& [p, value] : c) {
        if (p != 0) value = step_ * value;
      }
    }
    // All decisions read the pre-update copies.
    for (int i = 1; i <= n_f; ++i) {
      const double err = (eta_[idx(i)] - copies_[idx(i)].at(i)).norm();
      if (triggers_[idx(i)].fires(err, t)) fired.push_back(i);
    }
  }
  std::vector<ObserverEvent> out;
  for (int i : fired) {
    copies_[idx(i)][i] = eta_[idx(i)];
    for (int r : graph_.receivers(i)) copies_[idx(r)][i] = eta_[idx(i)];
    const std::size_t ii = idx(i);
    ObserverEvent ev{i, event_count_[ii]++, k, t, k == 0 ? 0 : k - last_event_k_[ii]};
    last_event_k_[ii] = k;
    out.push_back(ev);
    events_.push_back(ev);
  }
  for (int r : graph_.receivers(0)) copies_[idx(r)][0] = v_k;
  refresh_corrections();
  ++next_k_;
  return out;
}

void ObserverBank::refresh_corrections() {
  for (int i = 1; i <= graph_.follower_count(); ++i) {
    const auto& c = copies_[idx(i)];
    const Vector& own = c.at(i);
    Vector w = Vector::Zero(s_.rows());
    for (int j : graph_.neighbors(i)) w += c.at(j) - own;
    correction_[idx(i)] = mu_ * w;
  }
}

void ObserverBank::advance(double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorCode::kInvalidInput, "negative propagation time");
  if (tau == 0.0) return;
  auto it = segment_cache_.find(tau);
  if (it == segment_cache_.end()) {
    it = segment_cache_
             .emplace(tau, discretize(s_, Matrix::Identity(s_.rows(), s_.rows()), tau))
             .first;
  }
  const Discretized& d = it->second;
  for (std::size_t i = 0; i < eta_.size(); ++i) {
    eta_[i] = d.phi * eta_[i] + d.gamma * correction_[i];
  }
}

const Vector& ObserverBank::estimate(int i) const { return eta_[idx(i)]; }

void ObserverBank::set_estimate(int i, const Vector& eta) {
  if (eta.size() != s_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "estimate has the wrong dimension");
  }
  eta_[idx(i)] = eta;
}

const Vector& ObserverBank::correction(int i) const { return correction_[idx(i)]; }

const Vector& ObserverBank::copy(int i, int p) const {
  const auto& c = copies_[idx(i)];
  auto it = c.find(p);
  if (it == c.end()) {
    throw Error(ErrorCode::kInvalidInput, "follower " + std::to_string(i) +
                                              " holds no copy of vertex " + std::to_string(p));
  }
  return it->second;
}

const TriggerFunction& ObserverBank::trigger(int i) const { return triggers_[idx(i)]; }

Vector ObserverBank::absolute_aux_error() const {
  const auto n = s_.rows();
  Vector out(n * graph_.follower_count());
  for (int i = 1; i <= graph_.follower_count(); ++i) {
    out.segment(n * (i - 1), n) = eta_[idx(i)] - copies_[idx(i)].at(i);
  }
  return out;
}

Vector ObserverBank::relative_aux_error() const {
  const auto n = s_.rows();
  Vector out(n * graph_.follower_count());
  for (int i = 1; i <= graph_.follower_count(); ++i) {
    const auto& c = copies_[idx(i)];
    Vector acc = Vector::Zero(n);
    for (int j : graph_.neighbors(i)) acc += c.at(j) - c.at(i);
    out.segment(n * (i - 1), n) = acc;
  }
  return out;
}

Vector ObserverBank::stacked_estimates() const {
  const auto n = s_.rows();
  Vector out(n * graph_.follower_count());
  for (int i = 1; i <= graph_.follower_count(); ++i) out.segment(n * (i - 1), n) = eta_[idx(i)];
  return out;
}

bool ObserverBank::broadcast_consistent() const {
  for (int i = 1; i <= graph_.follower_count(); ++i) {
    for (const auto& [p, value] : copies_[idx(i)]) {
      if (p == 0 || p == i) continue;
      if (value != copies_[idx(p)].at(p)) return false;
    }
  }
  return true;
}

}  // namespace coopreg
