#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <set>
#include <string>
#include <utility>

namespace kgtmm {

enum class GraphKind { kComplete, kRing, kStar, kPath, kErdosRenyi };

GraphKind graph_kind_from_string(const std::string& name);
std::string to_string(GraphKind kind);

// Undirected, connected communication graph. Edges are stored with i < j;
// self-loops are excluded (self-weights come from the mixing rule).
struct Graph {
  int n = 0;
  std::set<std::pair<int, int>> edges;

  bool has_edge(int i, int j) const;
  int degree(int i) const;
  bool connected() const;
};

// Symmetric doubly stochastic gossip matrix together with its certified
// contraction parameter p: for any X, ||XW - Xbar||_F^2 <= (1-p)||X - Xbar||_F^2.
struct MixingMatrix {
  Eigen::MatrixXd W;
  double p = 0.0;

  int n() const { return static_cast<int>(W.rows()); }
};

Graph build_graph(GraphKind kind, int n, std::uint64_t seed,
                  double er_prob = 0.5);

// Metropolis-Hastings weights: w_ij = 1/(1 + max(deg i, deg j)) on edges,
// diagonal fills the remaining mass. Doubly stochastic on any graph.
MixingMatrix metropolis_weights(const Graph& graph);

// Largest p satisfying the contraction inequality for symmetric W:
// p = 1 - rho^2 with rho the spectral norm of W restricted to the
// complement of the all-ones direction.
double spectral_gap(const Eigen::MatrixXd& W);

// Wraps an externally supplied W (config override); validates symmetry and
// double stochasticity, certifies p.
MixingMatrix mixing_from_matrix(const Eigen::MatrixXd& W);

}  // namespace kgtmm
