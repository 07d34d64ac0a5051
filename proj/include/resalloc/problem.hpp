#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "resalloc/graph.hpp"
#include "resalloc/types.hpp"

namespace resalloc {

// Smooth convex scalar function over R^n with its analytic gradient.
struct NodeFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

// Smooth convex scalar function of an edge's endpoint pair (x_lo, x_hi),
// lo < hi. The gradient is the stacked 2n vector [d/dx_lo; d/dx_hi].
struct EdgeFunction {
  std::function<double(const Vec&, const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> gradient;
};

// x^T Q x + q^T x + c.
struct QuadraticForm {
  Mat Q;
  Vec q;
  double c = 0.0;
};

NodeFunction quadratic(QuadraticForm form);
NodeFunction zero_function(int n);
// ||x - center||^2 - radius^2
NodeFunction ball_constraint(Vec center, double radius);
// a^T x - b
NodeFunction linear_constraint(Vec a, double b);
// ||x_lo - x_hi||^2 - range^2
EdgeFunction distance_constraint(double range);
// a^T (x_lo - x_hi) - b
EdgeFunction linear_edge_constraint(Vec a, double b);

enum class ConstraintKind { edge, node };

// One row of the stacked constraint vector g(x). For edge rows (i, j) is
// the sorted edge; node rows carry j = -1.
struct ConstraintSlot {
  ConstraintKind kind;
  int i;
  int j;
};

// Where a constraint row touches one node's block.
struct Incidence {
  int row;   // index into the stacked constraint vector
  int side;  // 0: lo endpoint, 1: hi endpoint, -1: node constraint
  int edge;  // position in graph().edges(), -1 for node constraints
};

// Separable problem: minimize sum_i f_i(x_i) subject to g_ij(x_i, x_j) <= 0
// on edges, h_i(x_i) <= 0 on nodes, and sum_i x_i = x_tot; regularized by
// nu (primal) and epsilon (dual). Immutable once built.
//
// Constraint rows are stacked edges first, in the graph's sorted edge order,
// then node rows by index. Absent constraints (std::nullopt) are omitted, so
// m may be smaller than E + N.
class ProblemInstance {
 public:
  ProblemInstance(Graph graph, int n, std::vector<NodeFunction> costs,
                  std::vector<std::optional<EdgeFunction>> edge_constraints,
                  std::vector<std::optional<NodeFunction>> node_constraints,
                  Vec x_tot, double nu, double epsilon);

  const Graph& graph() const { return graph_; }
  int dim() const { return n_; }
  int node_count() const { return graph_.node_count(); }
  int primal_size() const { return n_ * graph_.node_count(); }
  int constraint_count() const { return static_cast<int>(slots_.size()); }
  const Vec& x_tot() const { return x_tot_; }
  double nu() const { return nu_; }
  double epsilon() const { return epsilon_; }

  const NodeFunction& cost(int i) const { return costs_[i]; }
  // Indexed by position in graph().edges().
  const std::optional<EdgeFunction>& edge_constraint(int e) const {
    return edge_constraints_[e];
  }
  const std::optional<NodeFunction>& node_constraint(int i) const {
    return node_constraints_[i];
  }

  const std::vector<ConstraintSlot>& constraints() const { return slots_; }
  // Rows touching node i, in stacked order.
  const std::vector<Incidence>& incidence(int i) const { return incidence_[i]; }
  // Row of the constraint on edge e (graph order), or -1 if none.
  int edge_row(int e) const { return edge_rows_[e]; }
  // Row of node i's constraint, or -1 if none.
  int node_row(int i) const { return node_rows_[i]; }

  auto block(const Vec& x, int i) const { return x.segment(i * n_, n_); }

 private:
  Graph graph_;
  int n_;
  std::vector<NodeFunction> costs_;
  std::vector<std::optional<EdgeFunction>> edge_constraints_;
  std::vector<std::optional<NodeFunction>> node_constraints_;
  Vec x_tot_;
  double nu_;
  double epsilon_;

  std::vector<ConstraintSlot> slots_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<int> edge_rows_;
  std::vector<int> node_rows_;
};

// Primal iterate x in R^{nN} and dual iterate mu in R^m.
struct StackedPoint {
  Vec x;
  Vec mu;

  Vec stacked() const;
  static StackedPoint split(const Vec& z, int primal_size);
};

// Per-node ball radii and barrier parameter t for the log-barrier variant.
struct BarrierConfig {
  std::vector<double> radii;
  double t = 1e6;
};

double eval_cost(const ProblemInstance& p, const Vec& x);
Vec eval_constraints(const ProblemInstance& p, const Vec& x);
double eval_constraint(const ProblemInstance& p, int row, const Vec& x);
// Full-length (nN) gradient of one constraint row.
Vec constraint_gradient(const ProblemInstance& p, int row, const Vec& x);
// Gradient of the separable cost only.
Vec cost_gradient(const ProblemInstance& p, const Vec& x);

// f(x) + (nu/2)||x||^2 + mu^T g(x) - (epsilon/2)||mu||^2
double reg_lagrangian(const ProblemInstance& p, const StackedPoint& z);
Vec grad_x(const ProblemInstance& p, const StackedPoint& z);
// Block i of grad_x. Rows with mu_q == 0 contribute nothing and are skipped.
Vec grad_x_block(const ProblemInstance& p, int i, const Vec& x, const Vec& mu);
Vec grad_mu(const ProblemInstance& p, const StackedPoint& z);

// reg_lagrangian - (1/t) sum_i log(radius_i - ||x_i||). Throws OutsideBall.
double barrier_lagrangian(const ProblemInstance& p, const StackedPoint& z,
                          const BarrierConfig& b);
Vec barrier_grad_x(const ProblemInstance& p, const StackedPoint& z,
                   const BarrierConfig& b);
// Barrier contribution to one block; zero at the ball center.
Vec barrier_block_gradient(const Vec& xi, double radius, double t);

// ||sum_i x_i - x_tot||
double feasibility_residual(const ProblemInstance& p, const Vec& x);
// x_i = x_tot / N for every node.
Vec uniform_split(const ProblemInstance& p);
// Orthogonal projection onto {x : sum_i x_i = x_tot}.
Vec project_to_resource_set(const ProblemInstance& p, const Vec& x);

void check_point(const ProblemInstance& p, const StackedPoint& z);
void check_primal(const ProblemInstance& p, const Vec& x);

}  // namespace resalloc
