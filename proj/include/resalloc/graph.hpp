#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resalloc/types.hpp"

namespace resalloc {

// Unordered edge stored as (lo, hi) with lo < hi, 0-based.
using Edge = std::pair<int, int>;

// Connected, simple, undirected communication graph. Nodes are 0-based
// internally; all file formats use 1-based indices.
class Graph {
 public:
  // Validates and builds the graph. Edges may be given in either
  // orientation. Throws InvalidEdge or DisconnectedGraph.
  static Graph build(int node_count, const std::vector<Edge>& edges);

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  // Edges sorted lexicographically by (lo, hi).
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbors of `node` in ascending order.
  const std::vector<int>& neighbors(int node) const { return adjacency_[node]; }

  bool has_edge(int i, int j) const;

  // Position of edge {i, j} in edges(), or -1.
  int edge_index(int i, int j) const;

 private:
  Graph() = default;

  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

struct SpectralSummary {
  double lambda2 = 0.0;     // second-smallest eigenvalue of (W + W^T)/2
  double lambda_max = 0.0;  // largest eigenvalue of (W + W^T)/2
  double sigma_max = 0.0;   // largest singular value of W
  bool symmetric = true;
};

// Per-property outcome of checking a candidate weight matrix against the
// zero-row/column-sum, unique-zero-eigenvalue and sparsity requirements.
struct ValidationReport {
  double tolerance = 0.0;  // absolute threshold actually applied
  double max_abs_row_sum = 0.0;
  double max_abs_col_sum = 0.0;
  double min_eig_shifted = 0.0;  // min eigenvalue of W + W^T + (1/N) 1 1^T
  std::vector<Edge> sparsity_mismatches;  // ordered (i, j), 0-based

  bool zero_sums_ok = false;
  bool unique_zero_ok = false;
  bool sparsity_ok = false;

  bool ok() const { return zero_sums_ok && unique_zero_ok && sparsity_ok; }
  std::string describe() const;
};

// Default relative tolerance for weight-matrix checks.
inline constexpr double kWeightTolerance = 1e-10;

// `tol` is relative to the largest entry magnitude of `w`.
ValidationReport validate_weight_matrix(const Mat& w, const Graph& g,
                                        double tol = kWeightTolerance);

SpectralSummary spectral_summary(const Mat& w);

// Validated information-exchange matrix. Immutable after construction.
class WeightMatrix {
 public:
  // Throws InvalidWeightMatrix when validation fails.
  WeightMatrix(Mat entries, const Graph& g, double tol = kWeightTolerance);

  const Mat& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  int size() const { return static_cast<int>(entries_.rows()); }
  bool symmetric() const { return spectral_.symmetric; }
  const SpectralSummary& spectral() const { return spectral_; }

  // Row i restricted to N_i ∪ {i}, ascending column order.
  const std::vector<std::pair<int, double>>& row_support(int i) const {
    return rows_[i];
  }

 private:
  Mat entries_;
  SpectralSummary spectral_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

Mat laplacian_matrix(const Graph& g);
WeightMatrix laplacian(const Graph& g);

enum class WeightStrategy { laplacian, scaled_laplacian };

WeightStrategy parse_weight_strategy(const std::string& name);
std::string to_string(WeightStrategy s);

// `scaled_laplacian` divides L by lambda_max(L).
WeightMatrix design_weights(const Graph& g, WeightStrategy strategy);

// The seven-node graph used in the robot tracking example.
Graph seven_node_graph();

}  // namespace resalloc
