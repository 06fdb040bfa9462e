#ifndef DECGP_GRAPH_HPP
#define DECGP_GRAPH_HPP

#include "decgp/types.hpp"

#include <algorithm>
#include <queue>

namespace decgp {

// Static undirected communication topology. Construction rejects asymmetric
// or disconnected adjacency; degree, max degree, and diameter are derived
// eagerly so algorithms can read them for free.
class Graph {
 public:
  static Graph path(int m) {
    check_m(m);
    MatrixXd a = MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
    return Graph(a);
  }

  static Graph complete(int m) {
    check_m(m);
    MatrixXd a = MatrixXd::Ones(m, m);
    a.diagonal().setZero();
    return Graph(a);
  }

  static Graph custom(const MatrixXd& adjacency) { return Graph(adjacency); }

  int size() const { return m_; }
  const std::vector<int>& neighbors(int i) const { return nbrs_.at(i); }
  int degree(int i) const { return static_cast<int>(nbrs_.at(i).size()); }
  int max_degree() const { return max_degree_; }
  int diameter() const { return diameter_; }
  bool has_edge(int i, int j) const { return adjacency_(i, j) != 0.0; }
  const MatrixXd& adjacency() const { return adjacency_; }

  MatrixXd laplacian() const {
    MatrixXd l = -adjacency_;
    for (int i = 0; i < m_; ++i) l(i, i) = degree(i);
    return l;
  }

  // D + A, the matrix whose smallest eigenvalue enters the kappa bound.
  MatrixXd degree_plus_adjacency() const {
    MatrixXd l = adjacency_;
    for (int i = 0; i < m_; ++i) l(i, i) = degree(i);
    return l;
  }

  // Induced subgraph on the given agent subset; node k of the result is
  // members[k]. May be disconnected; callers must check.
  static MatrixXd induced_adjacency(const Graph& g, const std::vector<int>& members) {
    const int k = static_cast<int>(members.size());
    MatrixXd a = MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && g.has_edge(members[i], members[j])) a(i, j) = 1.0;
    return a;
  }

  static bool is_connected(const MatrixXd& adjacency) {
    const int m = static_cast<int>(adjacency.rows());
    if (m == 0) return false;
    std::vector<char> seen(m, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < m; ++v) {
        if (!seen[v] && adjacency(u, v) != 0.0) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    return count == m;
  }

 private:
  explicit Graph(const MatrixXd& adjacency) : adjacency_(adjacency) {
    m_ = static_cast<int>(adjacency.rows());
    check_m(m_);
    if (adjacency.cols() != m_) throw ContractError("Graph: adjacency must be square");
    for (int i = 0; i < m_; ++i) {
      if (adjacency(i, i) != 0.0) throw ContractError("Graph: nonzero diagonal");
      for (int j = 0; j < m_; ++j) {
        const double a = adjacency(i, j);
        if (a != 0.0 && a != 1.0) throw ContractError("Graph: adjacency entries must be 0/1");
        if (a != adjacency(j, i)) throw ContractError("Graph: adjacency must be symmetric");
      }
    }
    if (!is_connected(adjacency)) throw ContractError("Graph: adjacency is disconnected");

    nbrs_.resize(m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        if (adjacency(i, j) != 0.0) nbrs_[i].push_back(j);
    max_degree_ = 0;
    for (int i = 0; i < m_; ++i) max_degree_ = std::max(max_degree_, degree(i));
    diameter_ = compute_diameter();
  }

  static void check_m(int m) {
    if (m < 1) throw ContractError("Graph: M >= 1 required");
  }

  int compute_diameter() const {
    int diam = 0;
    for (int s = 0; s < m_; ++s) {
      std::vector<int> dist(m_, -1);
      std::queue<int> q;
      q.push(s);
      dist[s] = 0;
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : nbrs_[u]) {
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            q.push(v);
          }
        }
      }
      diam = std::max(diam, *std::max_element(dist.begin(), dist.end()));
    }
    return diam;
  }

  MatrixXd adjacency_;
  int m_ = 0;
  std::vector<std::vector<int>> nbrs_;
  int max_degree_ = 0;
  int diameter_ = 0;
};

inline Graph build_graph(const std::string& kind, int m, const MatrixXd* adjacency = nullptr) {
  if (kind == "path") return Graph::path(m);
  if (kind == "complete") return Graph::complete(m);
  if (kind == "custom") {
    if (adjacency == nullptr) throw ContractError("build_graph: custom topology needs adjacency");
    return Graph::custom(*adjacency);
  }
  throw ContractError("build_graph: unknown topology '" + kind + "'");
}

// Consensus step size strictly inside the convergent open interval (0, 1/Delta);
// a single agent has no neighbors and gets 1 by convention.
inline double perron_epsilon(const Graph& g) {
  if (g.max_degree() == 0) return 1.0;
  return 1.0 / (g.max_degree() + 1);
}

}  // namespace decgp

#endif  // DECGP_GRAPH_HPP
