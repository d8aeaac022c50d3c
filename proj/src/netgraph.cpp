#include "coopreg/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "coopreg/error.hpp"

namespace coopreg {

namespace {

std::string edge_str(const Digraph::Edge& e) {
  return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
}

}  // namespace

Digraph::Digraph(int follower_count, std::vector<Edge> edges)
    : followers_(follower_count), edges_(std::move(edges)) {
  if (followers_ < 1) {
    throw Error(ErrorCode::kInvalidInput, "a digraph needs at least one follower");
  }
  in_.resize(vertex_count());
  out_.resize(vertex_count());
  for (const Edge& e : edges_) {
    const auto [from, to] = e;
    if (from < 0 || from > followers_ || to < 0 || to > followers_) {
      throw Error(ErrorCode::kInvalidInput, "edge " + edge_str(e) + " out of range");
    }
    if (from == to) {
      throw Error(ErrorCode::kInvalidInput, "self-loop " + edge_str(e));
    }
    if (to == 0) {
      throw Error(ErrorCode::kInvalidInput,
                  "edge " + edge_str(e) + " points into the leader");
    }
    if (std::find(in_[to].begin(), in_[to].end(), from) != in_[to].end()) {
      throw Error(ErrorCode::kInvalidInput, "duplicate edge " + edge_str(e));
    }
    in_[to].push_back(from);
    out_[from].push_back(to);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  for (auto& v : out_) std::sort(v.begin(), v.end());
}

const std::vector<int>& Digraph::neighbors(int vertex) const {
  return in_.at(static_cast<std::size_t>(vertex));
}

const std::vector<int>& Digraph::receivers(int vertex) const {
  return out_.at(static_cast<std::size_t>(vertex));
}

bool Digraph::has_edge(int from, int to) const {
  if (to < 0 || to > followers_) return false;
  const auto& n = in_[static_cast<std::size_t>(to)];
  return std::find(n.begin(), n.end(), from) != n.end();
}

LeaderFollowerMatrix build_laplacian_and_h(const Digraph& g) {
  const int v = g.vertex_count();
  Matrix l = Matrix::Zero(v, v);
  for (const auto& [from, to] : g.edges()) l(to, from) = -1.0;
  for (int i = 0; i < v; ++i) l(i, i) = -l.row(i).sum();
  const int n = g.follower_count();
  return {l, l.bottomRightCorner(n, n)};
}

SpanningTreeCertificate check_spanning_tree(const Digraph& g) {
  std::vector<bool> seen(static_cast<std::size_t>(g.vertex_count()), false);
  std::deque<int> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : g.receivers(u)) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  SpanningTreeCertificate cert;
  for (int i = 0; i < g.vertex_count(); ++i) {
    if (seen[static_cast<std::size_t>(i)]) cert.reachable.push_back(i);
  }
  cert.has_root_spanning_tree =
      static_cast<int>(cert.reachable.size()) == g.vertex_count();
  return cert;
}

std::vector<GraphEigenvalue> eigs_h(const Matrix& h) {
  std::vector<GraphEigenvalue> out;
  for (const Complex& z : eigenvalues(h)) out.push_back({z, principal_arg(z)});
  std::sort(out.begin(), out.end(), [](const GraphEigenvalue& a, const GraphEigenvalue& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return out;
}

std::vector<GraphEigenvalue> eigs_h(const LeaderFollowerMatrix& m) { return eigs_h(m.h); }

}  // namespace coopreg
