#include "coopreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coopreg/error.hpp"

namespace coopreg {

namespace {

constexpr double kPi = std::numbers::pi;

void require_period(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::kInvalidInput, "sampling period must be positive and finite");
  }
}

std::vector<OpenInterval> intersect(const std::vector<OpenInterval>& a,
                                    const std::vector<OpenInterval>& b) {
  std::vector<OpenInterval> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

// Sorted, disjoint union of possibly overlapping intervals.
std::vector<OpenInterval> normalize(std::vector<OpenInterval> v) {
  std::sort(v.begin(), v.end(),
            [](const OpenInterval& a, const OpenInterval& b) { return a.lo < b.lo; });
  std::vector<OpenInterval> out;
  for (const auto& iv : v) {
    if (!(iv.hi > iv.lo)) continue;
    if (!out.empty() && iv.lo < out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

double OpenInterval::midpoint() const {
  if (std::isinf(hi)) return lo > 0.0 ? 2.0 * lo : 1.0;
  return 0.5 * (lo + hi);
}

ObserverSystem make_observer_system(const Matrix& s, const Digraph& g) {
  ObserverSystem sys;
  sys.leader = partition_spectrum(LeaderModel{s});
  sys.graph = eigs_h(build_laplacian_and_h(g));
  sys.spanning_tree = check_spanning_tree(g).has_root_spanning_tree;
  return sys;
}

QuadraticCoefficients coefficients(const SpectrumPartition& p,
                                   const std::vector<GraphEigenvalue>& graph, double h) {
  require_period(h);
  QuadraticCoefficients out;
  out.h = h;
  std::vector<SampledEigenvalue> sampled;
  for (const auto& e : p.eigenvalues) sampled.push_back(sample_eigenvalue(e.value, h));

  for (std::size_t i = 0; i < graph.size(); ++i) {
    const Complex li = graph[i].value;
    const double mod_i = std::abs(li);
    for (std::size_t q = 0; q < p.eigenvalues.size(); ++q) {
      const LeaderEigenvalue& e = p.eigenvalues[q];
      PairCoefficients c;
      c.i = static_cast<int>(i);
      c.q = static_cast<int>(q);
      if (e.label == SpectrumClass::kZero) {
        c.alpha = mod_i * mod_i * h * h;
        c.beta = -2.0 * h * li.real();
        c.gamma = 0.0;
      } else {
        const SampledEigenvalue& sq = sampled[q];
        const double ratio = mod_i / std::abs(e.value);
        const double r = std::hypot(sq.u, sq.v);
        const double re_h = e.value.real() * h;
        c.alpha = ratio * ratio * r * r;
        if (sq.phi) {
          const double psi = graph[i].theta + *sq.phi - e.theta;
          c.beta = -2.0 * ratio * std::exp(re_h) * r * std::cos(psi);
        }
        c.gamma = std::expm1(2.0 * re_h);
      }
      out.pairs.push_back(c);
    }
  }
  return out;
}

std::optional<OpenInterval> admissible_gains(const PairCoefficients& c) {
  double lo = 0.0;
  double hi = 0.0;
  if (c.alpha > 0.0) {
    const double disc = c.beta * c.beta - 4.0 * c.alpha * c.gamma;
    if (!(disc > 0.0)) return std::nullopt;
    // Cancellation-free roots.
    const double t = -0.5 * (c.beta + std::copysign(std::sqrt(disc), c.beta));
    const double r1 = t / c.alpha;
    const double r2 = c.gamma / t;
    lo = std::min(r1, r2);
    hi = std::max(r1, r2);
  } else if (c.beta < 0.0) {
    lo = -c.gamma / c.beta;
    hi = std::numeric_limits<double>::infinity();
  } else if (c.beta > 0.0 && c.gamma < 0.0) {
    lo = -std::numeric_limits<double>::infinity();
    hi = -c.gamma / c.beta;
  } else if (c.beta == 0.0 && c.gamma < 0.0) {
    lo = -std::numeric_limits<double>::infinity();
    hi = std::numeric_limits<double>::infinity();
  } else {
    return std::nullopt;
  }
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return std::nullopt;
  return OpenInterval{lo, hi};
}

GainInterval mu_interval(const QuadraticCoefficients& c) {
  GainInterval out;
  OpenInterval acc{0.0, std::numeric_limits<double>::infinity()};
  bool empty = c.pairs.empty();
  for (const auto& pair : c.pairs) {
    auto iv = admissible_gains(pair);
    out.per_pair.push_back(iv);
    if (!iv) {
      empty = true;
      continue;
    }
    acc.lo = std::max(acc.lo, iv->lo);
    acc.hi = std::min(acc.hi, iv->hi);
  }
  if (!empty && acc.width() > kMinIntervalWidth) out.intersection = acc;
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kSatisfied:
      return "ok";
    case Verdict::kViolated:
      return "VIOLATED";
    case Verdict::kNotApplicable:
      return "-";
  }
  return "?";
}

FeasibilityReport feasibility(const ObserverSystem& sys, double h) {
  if (!sys.spanning_tree) {
    throw Error(ErrorCode::kAssumptionViolated,
                "the leader does not root a spanning tree of the digraph");
  }
  const QuadraticCoefficients coeffs = coefficients(sys.leader, sys.graph, h);
  const GainInterval gains = mu_interval(coeffs);

  FeasibilityReport report;
  report.h = h;
  report.conditions_hold = true;
  for (std::size_t k = 0; k < coeffs.pairs.size(); ++k) {
    const PairCoefficients& c = coeffs.pairs[k];
    const LeaderEigenvalue& e = sys.leader.eigenvalues[static_cast<std::size_t>(c.q)];
    const double theta_i = sys.graph[static_cast<std::size_t>(c.i)].theta;
    PairReport pr;
    pr.coeffs = c;
    pr.label = e.label;
    pr.interval = gains.per_pair[k];
    const SampledEigenvalue sq = sample_eigenvalue(e.value, h);
    if (sq.phi) pr.psi = theta_i + *sq.phi - e.theta;

    const bool phase_applies =
        e.label == SpectrumClass::kUnstable || e.label == SpectrumClass::kOscillatory;
    if (phase_applies && pr.psi) {
      pr.phase = std::abs(*pr.psi) < 0.5 * kPi ? Verdict::kSatisfied : Verdict::kViolated;
    }
    if (e.label == SpectrumClass::kUnstable && pr.psi) {
      // e^{2 Re h} < csc^2(psi), written without the division.
      const double s = std::sin(*pr.psi);
      pr.magnitude = std::exp(2.0 * e.value.real() * h) * s * s < 1.0 ? Verdict::kSatisfied
                                                                       : Verdict::kViolated;
    }
    if (e.label == SpectrumClass::kOscillatory) {
      pr.spectral_mapping = std::abs(std::sin(0.5 * e.value.imag() * h)) < kSpectralZeroTolerance
                                ? Verdict::kViolated
                                : Verdict::kSatisfied;
    }
    if (pr.phase == Verdict::kViolated || pr.magnitude == Verdict::kViolated ||
        pr.spectral_mapping == Verdict::kViolated) {
      report.conditions_hold = false;
    }
    report.pairs.push_back(pr);
  }
  report.intersection = gains.intersection;
  report.feasible = report.conditions_hold && report.intersection.has_value();
  if (report.feasible) report.suggested_mu = report.intersection->midpoint();
  return report;
}

double small_period_gain_limit(const ObserverSystem& sys) {
  double max_q = -std::numeric_limits<double>::infinity();
  for (const auto& e : sys.leader.eigenvalues) max_q = std::max(max_q, e.value.real());
  double min_i = std::numeric_limits<double>::infinity();
  for (const auto& g : sys.graph) min_i = std::min(min_i, g.value.real());
  if (!(min_i > 0.0)) {
    throw Error(ErrorCode::kAssumptionViolated, "H has an eigenvalue with Re <= 0");
  }
  return max_q / min_i;
}

std::vector<OpenInterval> sinusoidal_intervals(const SpectrumPartition& p,
                                               const std::vector<double>& theta_i,
                                               double h_max) {
  require_period(h_max);
  if (p.eigenvalues.empty() || !p.only(SpectrumClass::kOscillatory)) {
    throw Error(ErrorCode::kWrongSpectrum,
                "sinusoidal intervals need a purely oscillatory leader spectrum");
  }
  std::vector<OpenInterval> result{{0.0, h_max}};
  for (const auto& e : p.eigenvalues) {
    const double w = std::abs(e.value.imag());
    const int kappa_max = static_cast<int>(std::ceil(w * h_max / (2.0 * kPi))) + 1;
    for (double theta : theta_i) {
      std::vector<OpenInterval> allowed;
      for (int kappa = 1; kappa <= kappa_max; ++kappa) {
        const double base = 2.0 * kappa * kPi;
        // Bounds on |Im(lambda_q)| h.
        const double lo = std::max({base - 2.0 * kPi, base - 3.0 * kPi + 2.0 * theta,
                                    base - 3.0 * kPi - 2.0 * theta});
        const double hi =
            std::min({base, base - kPi + 2.0 * theta, base - kPi - 2.0 * theta});
        if (hi > lo) allowed.push_back({lo / w, hi / w});
      }
      result = intersect(result, normalize(std::move(allowed)));
    }
  }
  std::erase_if(result, [](const OpenInterval& iv) { return iv.width() <= kMinIntervalWidth; });
  return result;
}

bool contains(const std::vector<OpenInterval>& set, double x) {
  return std::any_of(set.begin(), set.end(), [x](const OpenInterval& iv) { return iv.contains(x); });
}

std::vector<SweepRow> sweep_h(const ObserverSystem& sys, std::vector<double> h_grid) {
  for (double h : h_grid) require_period(h);
  std::sort(h_grid.begin(), h_grid.end());
  std::vector<SweepRow> rows;
  rows.reserve(h_grid.size());
  for (double h : h_grid) {
    const FeasibilityReport r = feasibility(sys, h);
    rows.push_back({h, r.feasible, r.intersection});
  }
  return rows;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !std::isfinite(from) || !std::isfinite(to)) {
    throw Error(ErrorCode::kInvalidInput, "grid needs finite bounds and a positive step");
  }
  std::vector<double> grid;
  const double slack = 1e-9 * step;
  for (long k = 0;; ++k) {
    const double x = from + static_cast<double>(k) * step;
    if (x > to + slack) break;
    grid.push_back(x);
  }
  return grid;
}

}  // namespace coopreg
