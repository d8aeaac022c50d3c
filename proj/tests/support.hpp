#pragma once
// Independent numerical oracles and random instance generators for tests.

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "coopreg/design.hpp"
#include "coopreg/linalg.hpp"
#include "coopreg/netgraph.hpp"
#include "coopreg/spectra.hpp"

namespace oracle {

using coopreg::Complex;
using coopreg::Matrix;
using coopreg::Vector;

/// Classical RK4 on X' = M X, X(0) = I, over [0, t].
inline Matrix rk4_expm(const Matrix& m, double t, int steps = 4000) {
  const double dt = t / steps;
  Matrix x = Matrix::Identity(m.rows(), m.cols());
  for (int s = 0; s < steps; ++s) {
    const Matrix k1 = m * x;
    const Matrix k2 = m * (x + 0.5 * dt * k1);
    const Matrix k3 = m * (x + 0.5 * dt * k2);
    const Matrix k4 = m * (x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// RK4 on the pair X' = S X, Y' = X with X(0) = I, Y(0) = 0; returns Y(h).
inline Matrix rk4_zoh(const Matrix& s, double h, int steps = 4000) {
  const auto n = s.rows();
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = s;
  m.bottomLeftCorner(n, n).setIdentity();
  const Matrix z = rk4_expm(m, h, steps);
  return z.bottomLeftCorner(n, n);
}

/// Composite Simpson rule for a complex integrand on [a, b].
template <class F>
Complex simpson(F f, double a, double b, int intervals = 2000) {
  const double dx = (b - a) / intervals;
  Complex acc = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * dx);
  return acc * (dx / 3.0);
}

/// Exact-arithmetic-free check that two complex multisets agree: greedy
/// nearest matching, returns the worst distance.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return 1e300;
  double worst = 0.0;
  for (const Complex& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const Complex& p, const Complex& q) {
      return std::abs(p - z) < std::abs(q - z);
    });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

/// Random digraph on N followers in which the leader roots a spanning tree:
/// a random tree hanging off vertex 0 plus extra random edges.
inline coopreg::Digraph random_rooted_graph(std::mt19937_64& rng, int n_followers,
                                            double extra_edge_prob = 0.3) {
  std::vector<coopreg::Digraph::Edge> edges;
  std::vector<int> order(n_followers);
  for (int i = 0; i < n_followers; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> placed{0};
  for (int v : order) {
    std::uniform_int_distribution<std::size_t> pick(0, placed.size() - 1);
    edges.emplace_back(placed[pick(rng)], v);
    placed.push_back(v);
  }
  std::bernoulli_distribution coin(extra_edge_prob);
  for (int from = 0; from <= n_followers; ++from) {
    for (int to = 1; to <= n_followers; ++to) {
      if (from == to) continue;
      const bool exists = std::find(edges.begin(), edges.end(),
                                    coopreg::Digraph::Edge{from, to}) != edges.end();
      if (!exists && coin(rng)) edges.emplace_back(from, to);
    }
  }
  return coopreg::Digraph(n_followers, edges);
}

/// Real matrix with a prescribed spectrum: real entries and conjugate pairs
/// (given once, positive imaginary part) in 2x2 rotation blocks, then a
/// random similarity.
inline Matrix with_spectrum(std::mt19937_64& rng, const std::vector<double>& reals,
                            const std::vector<Complex>& pairs) {
  const int n = static_cast<int>(reals.size() + 2 * pairs.size());
  Matrix d = Matrix::Zero(n, n);
  int k = 0;
  for (double r : reals) d(k, k) = r, ++k;
  for (const Complex& z : pairs) {
    d(k, k) = z.real();
    d(k + 1, k + 1) = z.real();
    d(k, k + 1) = z.imag();
    d(k + 1, k) = -z.imag();
    k += 2;
  }
  Matrix t = random_matrix(rng, n, n);
  t += 2.0 * Matrix::Identity(n, n);
  return t * d * t.inverse();
}

/// Coefficients of |e^{lq h} - mu li I|^2 - 1 in mu, with
/// I = int_0^h e^{lq tau} dtau evaluated by Simpson quadrature.
struct Quadratic {
  double a, b, c;
};

inline Quadratic quadrature_coefficients(Complex li, Complex lq, double h) {
  const Complex integral = simpson([&](double t) { return std::exp(lq * t); }, 0.0, h);
  const Complex a = std::exp(lq * h);
  const Complex b = li * integral;
  return {std::norm(b), -2.0 * (a * std::conj(b)).real(), std::norm(a) - 1.0};
}

/// Library coefficients for one (li, lq) pair, obtained through a leader
/// whose spectrum is {lq, conj(lq)}.
inline coopreg::PairCoefficients library_coefficients(Complex li, Complex lq, double h) {
  Matrix s;
  if (lq.imag() != 0.0) {
    s = Matrix(2, 2);
    s << lq.real(), lq.imag(), -lq.imag(), lq.real();
  } else {
    s = Matrix::Constant(1, 1, lq.real());
  }
  const coopreg::SpectrumPartition p = coopreg::partition_spectrum(coopreg::LeaderModel{s});
  std::size_t q = 0;
  while (q + 1 < p.eigenvalues.size() && std::abs(p.eigenvalues[q].value - lq) > 1e-9) ++q;
  const std::vector<coopreg::GraphEigenvalue> g{{li, coopreg::principal_arg(li)}};
  return coopreg::coefficients(p, g, h).pairs[q];
}

/// Leader of dimension n mixing stable, unstable, zero and oscillatory
/// eigenvalues; `unstable_pairs` picks the sign of complex-pair real parts.
inline Matrix random_mixed_leader(std::mt19937_64& rng, int n, bool unstable_pairs) {
  std::uniform_real_distribution<double> pos(0.05, 0.6), neg(-0.8, -0.05), w(0.5, 2.5);
  std::uniform_int_distribution<int> kind(0, 4);
  std::vector<double> reals;
  std::vector<Complex> pairs;
  while (static_cast<int>(reals.size() + 2 * pairs.size()) < n) {
    const int k = kind(rng);
    if (k <= 1 && static_cast<int>(reals.size() + 2 * pairs.size()) + 2 <= n) {
      pairs.emplace_back(k == 0 ? 0.0 : (unstable_pairs ? pos(rng) : neg(rng)), w(rng));
    } else if (k == 2) {
      reals.push_back(pos(rng));
    } else if (k == 3 && std::count(reals.begin(), reals.end(), 0.0) == 0) {
      reals.push_back(0.0);
    } else {
      reals.push_back(neg(rng));
    }
  }
  return with_spectrum(rng, reals, pairs);
}

/// Counts gains on the grid {step, 2 step, ...} up to twice the largest finite
/// pairwise endpoint where the verdict and the Schur test of F disagree,
/// skipping a band of width `band` around the interval endpoints.
inline int gain_grid_disagreements(const Matrix& s, const coopreg::Digraph& g, double h,
                                   double step = 1e-3, double band = 1e-3) {
  const Matrix hm = coopreg::build_laplacian_and_h(g).h;
  const coopreg::FeasibilityReport r =
      coopreg::feasibility(coopreg::make_observer_system(s, g), h);
  double mu_max = 0.0;
  for (const auto& p : r.pairs) {
    if (p.interval && std::isfinite(p.interval->hi)) mu_max = std::max(mu_max, p.interval->hi);
  }
  if (mu_max == 0.0) mu_max = 2.0;
  int disagreements = 0;
  const long points = static_cast<long>(std::floor(2.0 * mu_max / step));
  for (long j = 1; j <= points; ++j) {
    const double mu = static_cast<double>(j) * step;
    if (r.intersection && (std::abs(mu - r.intersection->lo) < band ||
                           std::abs(mu - r.intersection->hi) < band)) {
      continue;
    }
    const bool predicted = r.feasible && r.intersection->contains(mu);
    const Matrix f = coopreg::kron(Matrix::Identity(hm.rows(), hm.rows()), coopreg::expm(s * h)) -
                     mu * coopreg::kron(hm, coopreg::zoh_integral(s, h));
    const bool schur = coopreg::spectral_radius(f) < 1.0;
    if (predicted != schur) ++disagreements;
  }
  return disagreements;
}

}  // namespace oracle
