#include "kgtmm/topology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "kgtmm/errors.hpp"
#include "kgtmm/rng.hpp"

namespace kgtmm {

GraphKind graph_kind_from_string(const std::string& name) {
  if (name == "complete") return GraphKind::kComplete;
  if (name == "ring") return GraphKind::kRing;
  if (name == "star") return GraphKind::kStar;
  if (name == "path") return GraphKind::kPath;
  if (name == "erdos_renyi") return GraphKind::kErdosRenyi;
  throw ConfigError("unknown graph kind: " + name);
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kComplete: return "complete";
    case GraphKind::kRing: return "ring";
    case GraphKind::kStar: return "star";
    case GraphKind::kPath: return "path";
    case GraphKind::kErdosRenyi: return "erdos_renyi";
  }
  return "?";
}

bool Graph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return edges.count({i, j}) > 0;
}

int Graph::degree(int i) const {
  int d = 0;
  for (const auto& [a, b] : edges)
    if (a == i || b == i) ++d;
  return d;
}

bool Graph::connected() const {
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

static void add_edge(Graph& g, int i, int j) {
  if (i == j) return;
  if (i > j) std::swap(i, j);
  g.edges.insert({i, j});
}

Graph build_graph(GraphKind kind, int n, std::uint64_t seed, double er_prob) {
  if (n < 1) throw ConfigError("graph: n must be >= 1");
  Graph g;
  g.n = n;
  switch (kind) {
    case GraphKind::kComplete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) add_edge(g, i, j);
      return g;
    case GraphKind::kRing:
      if (n == 1) return g;
      if (n == 2) {
        add_edge(g, 0, 1);
        return g;
      }
      for (int i = 0; i < n; ++i) add_edge(g, i, (i + 1) % n);
      return g;
    case GraphKind::kStar:
      for (int i = 1; i < n; ++i) add_edge(g, 0, i);
      return g;
    case GraphKind::kPath:
      for (int i = 0; i + 1 < n; ++i) add_edge(g, i, i + 1);
      return g;
    case GraphKind::kErdosRenyi: {
      if (er_prob <= 0.0 || er_prob > 1.0)
        throw ConfigError("erdos_renyi: probability must be in (0, 1]");
      for (int attempt = 0; attempt < 1000; ++attempt) {
        g.edges.clear();
        RngStream rng(seed, StreamPurpose::kProblemGen, /*client=*/0,
                      /*round=*/static_cast<std::uint64_t>(attempt));
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < er_prob) add_edge(g, i, j);
        if (g.connected()) return g;
      }
      throw ConfigError("erdos_renyi: no connected sample in 1000 attempts");
    }
  }
  throw ConfigError("graph: unreachable kind");
}

MixingMatrix metropolis_weights(const Graph& graph) {
  if (!graph.connected())
    throw ConfigError("metropolis_weights: graph must be connected");
  const int n = graph.n;
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = graph.degree(i);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : graph.edges) {
    const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < n; ++i) W(i, i) = 1.0 - W.row(i).sum();

  MixingMatrix m;
  m.W = std::move(W);
  m.p = spectral_gap(m.W);
  return m;
}

double spectral_gap(const Eigen::MatrixXd& W) {
  const auto n = W.rows();
  if (n == 1) return 1.0;
  // Deflate the all-ones eigenvector: the spectral norm of W - J is
  // rho = max(|lambda_2|, |lambda_n|).
  Eigen::MatrixXd deflated =
      W - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(deflated,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_gap: eigensolver failed");
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  return std::clamp(1.0 - rho * rho, 0.0, 1.0);
}

MixingMatrix mixing_from_matrix(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols()) throw ConfigError("mixing matrix must be square");
  const double tol = 1e-12;
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > tol)
    throw ConfigError("mixing matrix must be symmetric");
  if (W.minCoeff() < -tol)
    throw ConfigError("mixing matrix must be entrywise nonnegative");
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    if (std::abs(W.row(i).sum() - 1.0) > 1e-10)
      throw ConfigError("mixing matrix rows must sum to 1");
  MixingMatrix m;
  m.W = W;
  m.p = spectral_gap(W);
  return m;
}

}  // namespace kgtmm
