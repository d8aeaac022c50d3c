#pragma once

#include <map>
#include <vector>

#include "coopreg/linalg.hpp"
#include "coopreg/netgraph.hpp"
#include "coopreg/trigger.hpp"

namespace coopreg {

/// One-period error dynamics  eta~(k+1) = F eta~(k) + G eta-bar(k).
/// F + G = I_N (x) e^{Sh}.
struct ErrorDynamics {
  Matrix f;
  Matrix g;
};

/// Throws kDimensionMismatch unless S and H are square, kInvalidInput unless
/// mu >= 0 and h > 0.
ErrorDynamics build_error_dynamics(const Matrix& s, const Matrix& h_matrix, double mu, double h);

struct ObserverEvent {
  int follower = 0;        // 1-based
  long index = 0;          // l, counts from 0 at the initial broadcast
  long sample = 0;         // k with t_l = k h
  double time = 0.0;
  long steps = 0;          // k - k_previous; 0 for the initial broadcast

  bool operator==(const ObserverEvent&) const = default;
};

/// Distributed observers of all followers with their event-triggered
/// auxiliary copies.
///
/// Follower i keeps copies of eta_p for p in {i} U N_i. Copies of the same
/// follower held by different followers are bit-identical at every sampling
/// instant; the copy of the leader is v(t_k).
class ObserverBank {
 public:
  /// `triggers` holds one function per follower, or a single one shared by
  /// all. `eta0` may be empty (all zeros).
  ObserverBank(const Digraph& g, Matrix s, double mu, double h, std::vector<Vector> eta0,
               std::vector<TriggerFunction> triggers);

  int followers() const noexcept { return graph_.follower_count(); }
  int dim() const noexcept { return static_cast<int>(s_.rows()); }
  double mu() const noexcept { return mu_; }
  double period() const noexcept { return h_; }
  /// Index of the next sampling instant to be processed.
  long next_sample() const noexcept { return next_k_; }

  /// Processes sampling instant t_k = k h with leader value v(t_k). k must
  /// equal next_sample(); states must already be propagated to t_k.
  /// Returns the events fired at this instant (all followers at k = 0).
  std::vector<ObserverEvent> sample(long k, const Vector& v_k);

  /// Exact propagation of every eta_i over tau under the held corrections.
  void advance(double tau);

  const Vector& estimate(int i) const;
  void set_estimate(int i, const Vector& eta);
  /// mu * sum_{j in N_i} (copy_i(j) - copy_i(i)), held until the next sample.
  const Vector& correction(int i) const;
  /// Copy of eta_p held by follower i; p = 0 is the leader.
  const Vector& copy(int i, int p) const;

  /// Stacked eta_i - copy_i(i).
  Vector absolute_aux_error() const;
  /// Stacked sum_{j in N_i} (copy_i(j) - copy_i(i)).
  Vector relative_aux_error() const;
  /// Stacked eta_i.
  Vector stacked_estimates() const;

  /// Every copy of eta_p agrees with the copy held by p itself.
  bool broadcast_consistent() const;

  const std::vector<ObserverEvent>& events() const noexcept { return events_; }
  const TriggerFunction& trigger(int i) const;

 private:
  void refresh_corrections();
  std::size_t idx(int i) const;

  Digraph graph_;
  Matrix s_;
  Matrix step_;  // e^{Sh}
  double mu_;
  double h_;
  long next_k_ = 0;
  std::vector<Vector> eta_;
  std::vector<std::map<int, Vector>> copies_;
  std::vector<Vector> correction_;
  std::vector<TriggerFunction> triggers_;
  std::vector<long> last_event_k_;
  std::vector<long> event_count_;
  std::vector<ObserverEvent> events_;
  std::map<double, Discretized> segment_cache_;
};

}  // namespace coopreg
