#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "resalloc/graph.hpp"
#include "resalloc/problem.hpp"

namespace testing {

using namespace resalloc;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vec random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = uniform(rng, lo, hi);
  return v;
}

// Random spanning tree over a shuffled node order plus extra edges.
inline Graph random_connected_graph(Rng& rng, int nodes, double extra = 0.3) {
  std::vector<int> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (int k = 1; k < nodes; ++k) {
    edges.emplace_back(order[k], order[uniform_int(rng, 0, k - 1)]);
  }
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      const bool present = std::any_of(edges.begin(), edges.end(), [&](Edge e) {
        return (e.first == i && e.second == j) || (e.first == j && e.second == i);
      });
      if (!present && uniform(rng, 0.0, 1.0) < extra) edges.emplace_back(i, j);
    }
  }
  return Graph::build(nodes, edges);
}

inline Graph complete_graph(int nodes) {
  std::vector<Edge> edges;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) edges.emplace_back(i, j);
  }
  return Graph::build(nodes, edges);
}

inline Mat random_spd(Rng& rng, int n, double floor) {
  Mat b(n, n);
  for (int r = 0; r < n; ++r) b.row(r) = random_vec(rng, n).transpose();
  return 0.5 * b * b.transpose() + floor * Mat::Identity(n, n);
}

struct InstanceShape {
  int nodes = 4;
  int n = 2;
  bool edge_constraints = true;
  bool node_constraints = true;
  bool linear = false;  // linear edge rows instead of range rows, no balls
};

// Quadratic costs with range (or linear) edge rows on about half the edges
// and balls on about half the nodes. The balls contain a feasible split so
// the resource set meets every constraint.
inline ProblemInstance random_instance(Rng& rng, const InstanceShape& s) {
  Graph g = random_connected_graph(rng, s.nodes);
  const int n = s.n;
  std::vector<NodeFunction> costs;
  std::vector<Vec> anchor;
  for (int i = 0; i < s.nodes; ++i) {
    costs.push_back(quadratic({random_spd(rng, n, 0.2), random_vec(rng, n), 0.0}));
    anchor.push_back(random_vec(rng, n, -0.5, 0.5));
  }
  std::vector<std::optional<EdgeFunction>> edge_fns(g.edge_count());
  if (s.edge_constraints) {
    for (int e = 0; e < g.edge_count(); ++e) {
      if (uniform(rng, 0.0, 1.0) < 0.5) continue;
      if (s.linear) {
        edge_fns[e] = linear_edge_constraint(random_vec(rng, n), uniform(rng, 0.1, 0.5));
      } else {
        edge_fns[e] = distance_constraint(uniform(rng, 1.5, 2.5));
      }
    }
  }
  std::vector<std::optional<NodeFunction>> node_fns(s.nodes);
  if (s.node_constraints && !s.linear) {
    for (int i = 0; i < s.nodes; ++i) {
      if (uniform(rng, 0.0, 1.0) < 0.5) continue;
      node_fns[i] = ball_constraint(anchor[i], uniform(rng, 0.5, 1.0));
    }
  }
  Vec x_tot = Vec::Zero(n);
  for (const Vec& a : anchor) x_tot += a;
  return ProblemInstance(std::move(g), n, std::move(costs), std::move(edge_fns),
                         std::move(node_fns), x_tot, uniform(rng, 0.5, 2.0),
                         uniform(rng, 0.1, 0.5));
}

inline StackedPoint random_point(Rng& rng, const ProblemInstance& p,
                                 double mu_hi = 1.0) {
  return {random_vec(rng, p.primal_size(), -1.5, 1.5),
          random_vec(rng, p.constraint_count(), 0.0, mu_hi)};
}

// Instance from the frozen reference: path 1-2-3, n = 1,
// f = (x1^2 - x1) + 2 x2^2 + (0.5 x3^2 + x3), rows x_lo - x_hi - 0.2 on both
// edges, x3^2 - 1 <= 0, x_tot = 1.5, nu = 0.1, epsilon = 0.05.
inline ProblemInstance reference_instance() {
  Graph g = Graph::build(3, {{0, 1}, {1, 2}});
  auto q1 = [](double qq, double lin) {
    return quadratic({Mat::Constant(1, 1, qq), Vec::Constant(1, lin), 0.0});
  };
  std::vector<NodeFunction> costs{q1(1.0, -1.0), q1(2.0, 0.0), q1(0.5, 1.0)};
  std::vector<std::optional<EdgeFunction>> edges{
      linear_edge_constraint(Vec::Ones(1), 0.2),
      linear_edge_constraint(Vec::Ones(1), 0.2)};
  std::vector<std::optional<NodeFunction>> nodes{
      std::nullopt, std::nullopt, ball_constraint(Vec::Zero(1), 1.0)};
  return ProblemInstance(std::move(g), 1, std::move(costs), std::move(edges),
                         std::move(nodes), Vec::Constant(1, 1.5), 0.1, 0.05);
}

// Quadratic costs and linear edge rows, so Phi(z) = M z + c is affine and
// F_Phi = ||M||_2 exactly.
struct LinearQuadratic {
  ProblemInstance p;
  Mat m;

  double lipschitz() const {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
  }
};

inline LinearQuadratic linear_quadratic_instance(Rng& rng, const Graph& g,
                                                 int n, double nu,
                                                 double epsilon) {
  const int nodes = g.node_count();
  const int size = n * nodes;
  const int rows = g.edge_count();
  Mat m = Mat::Zero(size + rows, size + rows);
  std::vector<NodeFunction> costs;
  for (int i = 0; i < nodes; ++i) {
    Mat q = random_spd(rng, n, 0.2);
    m.block(i * n, i * n, n, n) = 2.0 * q + nu * Mat::Identity(n, n);
    costs.push_back(quadratic({q, random_vec(rng, n), 0.0}));
  }
  std::vector<std::optional<EdgeFunction>> edge_fns;
  for (int e = 0; e < rows; ++e) {
    auto [lo, hi] = g.edges()[e];
    Vec a = random_vec(rng, n);
    // Row e of A holds a at block lo and -a at block hi.
    m.block(size + e, lo * n, 1, n) = -a.transpose();
    m.block(size + e, hi * n, 1, n) = a.transpose();
    m.block(lo * n, size + e, n, 1) = a;
    m.block(hi * n, size + e, n, 1) = -a;
    m(size + e, size + e) = epsilon;
    edge_fns.push_back(linear_edge_constraint(a, uniform(rng, -0.2, 0.2)));
  }
  ProblemInstance p(g, n, std::move(costs), std::move(edge_fns), {},
                    random_vec(rng, n), nu, epsilon);
  return {std::move(p), std::move(m)};
}

}  // namespace testing
