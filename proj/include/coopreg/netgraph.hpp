#pragma once

#include <utility>
#include <vector>

#include "coopreg/linalg.hpp"

namespace coopreg {

/// Communication digraph over vertices {0, ..., N}; vertex 0 is the leader.
/// An edge (from, to) means `to` receives data from `from`.
class Digraph {
 public:
  using Edge = std::pair<int, int>;

  /// Throws kInvalidInput on self-loops, edges into the leader, out-of-range
  /// vertices or duplicate edges.
  Digraph(int follower_count, std::vector<Edge> edges);

  int follower_count() const noexcept { return followers_; }
  int vertex_count() const noexcept { return followers_ + 1; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// In-neighbours N_i = { j : (j, i) in E }, ascending.
  const std::vector<int>& neighbors(int vertex) const;
  /// Followers that receive from `vertex`, ascending.
  const std::vector<int>& receivers(int vertex) const;

  bool has_edge(int from, int to) const;

 private:
  int followers_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
};

struct LeaderFollowerMatrix {
  Matrix laplacian;  // (N+1) x (N+1)
  Matrix h;          // N x N, laplacian without the leader row/column
};

struct SpanningTreeCertificate {
  bool has_root_spanning_tree = false;
  std::vector<int> reachable;  // ascending, always contains 0
};

LeaderFollowerMatrix build_laplacian_and_h(const Digraph& g);

/// Breadth-first search from the leader along edge direction.
SpanningTreeCertificate check_spanning_tree(const Digraph& g);

struct GraphEigenvalue {
  Complex value;
  double theta;  // principal argument
};

/// Eigenvalues of H sorted by (Re, Im) descending.
std::vector<GraphEigenvalue> eigs_h(const LeaderFollowerMatrix& m);
std::vector<GraphEigenvalue> eigs_h(const Matrix& h);

}  // namespace coopreg
