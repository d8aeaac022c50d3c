#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "coopreg/netgraph.hpp"
#include "coopreg/spectra.hpp"

namespace coopreg {

/// Everything the sampling/gain design needs: the labelled leader spectrum,
/// the spectrum of H and whether the leader roots a spanning tree.
struct ObserverSystem {
  SpectrumPartition leader;
  std::vector<GraphEigenvalue> graph;
  bool spanning_tree = false;
};

ObserverSystem make_observer_system(const Matrix& s, const Digraph& g);

struct OpenInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  double width() const { return hi - lo; }
  double midpoint() const;
  bool contains(double x) const { return lo < x && x < hi; }
};

/// Intervals narrower than this are treated as empty.
inline constexpr double kMinIntervalWidth = 1e-9;
/// |sin(Im(lambda_q) h / 2)| below this counts as a zero of the spectral map.
inline constexpr double kSpectralZeroTolerance = 1e-9;

/// |e^{lambda_q h} - mu lambda_i int_0^h e^{lambda_q tau} dtau|^2 - 1
///   = alpha mu^2 + beta mu + gamma
struct PairCoefficients {
  int i = 0;  // index into ObserverSystem::graph
  int q = 0;  // index into ObserverSystem::leader.eigenvalues
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  double evaluate(double mu) const { return (alpha * mu + beta) * mu + gamma; }
};

struct QuadraticCoefficients {
  double h = 0.0;
  std::vector<PairCoefficients> pairs;  // i-major order
};

QuadraticCoefficients coefficients(const SpectrumPartition& p,
                                   const std::vector<GraphEigenvalue>& graph, double h);

/// { mu > 0 : alpha mu^2 + beta mu + gamma < 0 } as an open interval, or empty.
std::optional<OpenInterval> admissible_gains(const PairCoefficients& c);

struct GainInterval {
  std::vector<std::optional<OpenInterval>> per_pair;  // aligned with pairs
  std::optional<OpenInterval> intersection;
};

GainInterval mu_interval(const QuadraticCoefficients& c);

enum class Verdict { kSatisfied, kViolated, kNotApplicable };
const char* to_string(Verdict v);

struct PairReport {
  PairCoefficients coeffs;
  SpectrumClass label = SpectrumClass::kZero;
  std::optional<double> psi;
  Verdict phase = Verdict::kNotApplicable;
  Verdict magnitude = Verdict::kNotApplicable;
  Verdict spectral_mapping = Verdict::kNotApplicable;
  std::optional<OpenInterval> interval;
};

struct FeasibilityReport {
  double h = 0.0;
  std::vector<PairReport> pairs;
  bool conditions_hold = false;  // phase, magnitude and spectral mapping
  std::optional<OpenInterval> intersection;
  bool feasible = false;
  std::optional<double> suggested_mu;
};

/// Throws kAssumptionViolated when the leader does not root a spanning tree.
FeasibilityReport feasibility(const ObserverSystem& sys, double h);

/// max_q Re(lambda_q) / min_i Re(lambda_i): the lower end of the admissible
/// gains as h -> 0 (the upper end diverges).
double small_period_gain_limit(const ObserverSystem& sys);

/// Admissible sampling periods in (0, h_max) for purely oscillatory leaders.
/// Throws kWrongSpectrum if any leader eigenvalue is not oscillatory.
std::vector<OpenInterval> sinusoidal_intervals(const SpectrumPartition& p,
                                               const std::vector<double>& theta_i,
                                               double h_max);

bool contains(const std::vector<OpenInterval>& set, double x);

struct SweepRow {
  double h = 0.0;
  bool feasible = false;
  std::optional<OpenInterval> interval;
};

std::vector<SweepRow> sweep_h(const ObserverSystem& sys, std::vector<double> h_grid);

/// Inclusive grid from..to with the given step, computed as from + k*step.
std::vector<double> make_grid(double from, double to, double step);

}  // namespace coopreg
