#include "resalloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

Graph Graph::build(int node_count, const std::vector<Edge>& edges) {
  if (node_count < 1) {
    throw InvalidEdge("graph needs at least one node");
  }
  Graph g;
  g.node_count_ = node_count;
  g.adjacency_.resize(node_count);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      std::ostringstream os;
      os << "edge (" << a + 1 << ", " << b + 1 << ") out of range 1.."
         << node_count;
      throw InvalidEdge(os.str());
    }
    if (a == b) {
      throw InvalidEdge("self-loop at node " + std::to_string(a + 1));
    }
    g.edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end());
  if (dup != g.edges_.end()) {
    std::ostringstream os;
    os << "duplicate edge (" << dup->first + 1 << ", " << dup->second + 1
       << ")";
    throw InvalidEdge(os.str());
  }
  for (auto [a, b] : g.edges_) {
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());

  // Connectivity by depth-first traversal from node 0.
  std::vector<char> seen(node_count, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : g.adjacency_[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  if (reached != node_count) {
    auto it = std::find(seen.begin(), seen.end(), 0);
    throw DisconnectedGraph("graph is disconnected: node " +
                            std::to_string(it - seen.begin() + 1) +
                            " is unreachable from node 1");
  }
  return g;
}

bool Graph::has_edge(int i, int j) const { return edge_index(i, j) >= 0; }

int Graph::edge_index(int i, int j) const {
  Edge e{std::min(i, j), std::max(i, j)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return -1;
  return static_cast<int>(it - edges_.begin());
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  os << "zero row/col sums: " << (zero_sums_ok ? "pass" : "FAIL")
     << " (max |row sum| " << max_abs_row_sum << ", max |col sum| "
     << max_abs_col_sum << ")\n";
  os << "unique zero eigenvalue: " << (unique_zero_ok ? "pass" : "FAIL")
     << " (min eig of W+W^T+11^T/N " << min_eig_shifted << ")\n";
  os << "sparsity pattern: " << (sparsity_ok ? "pass" : "FAIL");
  if (!sparsity_mismatches.empty()) {
    os << " (off-pattern entries:";
    for (auto [i, j] : sparsity_mismatches) {
      os << " (" << i + 1 << "," << j + 1 << ")";
    }
    os << ")";
  }
  os << "\n";
  return os.str();
}

ValidationReport validate_weight_matrix(const Mat& w, const Graph& g,
                                        double tol) {
  const int n = g.node_count();
  if (w.rows() != n || w.cols() != n) {
    std::ostringstream os;
    os << "weight matrix is " << w.rows() << "x" << w.cols()
       << " but the graph has " << n << " nodes";
    throw DimensionMismatch(os.str());
  }
  ValidationReport r;
  const double scale = w.cwiseAbs().maxCoeff();
  r.tolerance = tol * scale;

  r.max_abs_row_sum = w.rowwise().sum().cwiseAbs().maxCoeff();
  r.max_abs_col_sum = w.colwise().sum().cwiseAbs().maxCoeff();
  r.zero_sums_ok =
      r.max_abs_row_sum <= r.tolerance && r.max_abs_col_sum <= r.tolerance;

  Mat shifted = w + w.transpose() + Mat::Constant(n, n, 1.0 / n);
  Eigen::SelfAdjointEigenSolver<Mat> eig(shifted, Eigen::EigenvaluesOnly);
  r.min_eig_shifted = eig.eigenvalues()(0);
  r.unique_zero_ok = r.min_eig_shifted > r.tolerance;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && std::abs(w(i, j)) > r.tolerance && !g.has_edge(i, j)) {
        r.sparsity_mismatches.emplace_back(i, j);
      }
    }
  }
  r.sparsity_ok = r.sparsity_mismatches.empty();
  return r;
}

SpectralSummary spectral_summary(const Mat& w) {
  SpectralSummary s;
  const double scale = std::max(w.cwiseAbs().maxCoeff(), 1e-300);
  s.symmetric = (w - w.transpose()).cwiseAbs().maxCoeff() <=
                kWeightTolerance * scale;
  Mat sym = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  const Vec& ev = eig.eigenvalues();
  s.lambda2 = ev.size() > 1 ? ev(1) : ev(0);
  s.lambda_max = ev(ev.size() - 1);
  Eigen::JacobiSVD<Mat> svd(w);
  s.sigma_max = svd.singularValues()(0);
  return s;
}

WeightMatrix::WeightMatrix(Mat entries, const Graph& g, double tol)
    : entries_(std::move(entries)) {
  ValidationReport report = validate_weight_matrix(entries_, g, tol);
  if (!report.ok()) {
    throw InvalidWeightMatrix("weight matrix rejected:\n" + report.describe());
  }
  spectral_ = spectral_summary(entries_);
  const int n = g.node_count();
  rows_.resize(n);
  for (int i = 0; i < n; ++i) {
    // Ascending column order, diagonal included in place.
    std::vector<int> cols = g.neighbors(i);
    cols.insert(std::lower_bound(cols.begin(), cols.end(), i), i);
    for (int j : cols) rows_[i].emplace_back(j, entries_(i, j));
  }
}

Mat laplacian_matrix(const Graph& g) {
  const int n = g.node_count();
  Mat l = Mat::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
    l(a, a) += 1.0;
    l(b, b) += 1.0;
  }
  return l;
}

WeightMatrix laplacian(const Graph& g) {
  return WeightMatrix(laplacian_matrix(g), g);
}

WeightStrategy parse_weight_strategy(const std::string& name) {
  if (name == "laplacian") return WeightStrategy::laplacian;
  if (name == "scaled_laplacian") return WeightStrategy::scaled_laplacian;
  throw InvalidArgument("unknown weight strategy '" + name + "'");
}

std::string to_string(WeightStrategy s) {
  return s == WeightStrategy::laplacian ? "laplacian" : "scaled_laplacian";
}

WeightMatrix design_weights(const Graph& g, WeightStrategy strategy) {
  Mat l = laplacian_matrix(g);
  if (strategy == WeightStrategy::scaled_laplacian) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(l, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues()(l.rows() - 1);
    if (top <= 0.0) {
      throw InvalidArgument("scaled_laplacian needs at least one edge");
    }
    l /= top;
  }
  return WeightMatrix(std::move(l), g);
}

Graph seven_node_graph() {
  // 1-based: (1,2) (2,3) (3,4) (1,4) (4,5) (5,6) (6,7) (1,7)
  return Graph::build(7, {{0, 1}, {1, 2}, {2, 3}, {0, 3},
                          {3, 4}, {4, 5}, {5, 6}, {0, 6}});
}

}  // namespace resalloc
