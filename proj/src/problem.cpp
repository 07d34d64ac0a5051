#include "resalloc/problem.hpp"

#include <cmath>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

NodeFunction quadratic(QuadraticForm form) {
  Mat sym = form.Q + form.Q.transpose();
  return NodeFunction{
      [form](const Vec& x) { return x.dot(form.Q * x) + form.q.dot(x) + form.c; },
      [sym, q = form.q](const Vec& x) -> Vec { return sym * x + q; }};
}

NodeFunction zero_function(int n) {
  return NodeFunction{[](const Vec&) { return 0.0; },
                      [n](const Vec&) -> Vec { return Vec::Zero(n); }};
}

NodeFunction ball_constraint(Vec center, double radius) {
  const double r2 = radius * radius;
  return NodeFunction{
      [center, r2](const Vec& x) { return (x - center).squaredNorm() - r2; },
      [center](const Vec& x) -> Vec { return 2.0 * (x - center); }};
}

NodeFunction linear_constraint(Vec a, double b) {
  return NodeFunction{[a, b](const Vec& x) { return a.dot(x) - b; },
                      [a](const Vec&) -> Vec { return a; }};
}

EdgeFunction distance_constraint(double range) {
  const double r2 = range * range;
  return EdgeFunction{
      [r2](const Vec& lo, const Vec& hi) {
        return (lo - hi).squaredNorm() - r2;
      },
      [](const Vec& lo, const Vec& hi) -> Vec {
        Vec g(2 * lo.size());
        g << 2.0 * (lo - hi), 2.0 * (hi - lo);
        return g;
      }};
}

EdgeFunction linear_edge_constraint(Vec a, double b) {
  return EdgeFunction{
      [a, b](const Vec& lo, const Vec& hi) { return a.dot(lo - hi) - b; },
      [a](const Vec&, const Vec&) -> Vec {
        Vec g(2 * a.size());
        g << a, -a;
        return g;
      }};
}

ProblemInstance::ProblemInstance(
    Graph graph, int n, std::vector<NodeFunction> costs,
    std::vector<std::optional<EdgeFunction>> edge_constraints,
    std::vector<std::optional<NodeFunction>> node_constraints, Vec x_tot,
    double nu, double epsilon)
    : graph_(std::move(graph)),
      n_(n),
      costs_(std::move(costs)),
      edge_constraints_(std::move(edge_constraints)),
      node_constraints_(std::move(node_constraints)),
      x_tot_(std::move(x_tot)),
      nu_(nu),
      epsilon_(epsilon) {
  const int nodes = graph_.node_count();
  if (n_ < 1) throw InvalidArgument("per-node dimension must be positive");
  if (!(nu_ > 0.0) || !(epsilon_ > 0.0)) {
    throw InvalidArgument("nu and epsilon must be strictly positive");
  }
  if (static_cast<int>(costs_.size()) != nodes) {
    throw DimensionMismatch("need one cost function per node");
  }
  if (edge_constraints_.empty()) edge_constraints_.resize(graph_.edge_count());
  if (node_constraints_.empty()) node_constraints_.resize(nodes);
  if (static_cast<int>(edge_constraints_.size()) != graph_.edge_count()) {
    throw DimensionMismatch("edge constraint list must match the edge count");
  }
  if (static_cast<int>(node_constraints_.size()) != nodes) {
    throw DimensionMismatch("node constraint list must match the node count");
  }
  if (x_tot_.size() != n_) {
    throw DimensionMismatch("x_tot must have the per-node dimension");
  }

  incidence_.resize(nodes);
  edge_rows_.assign(graph_.edge_count(), -1);
  node_rows_.assign(nodes, -1);
  const auto& edges = graph_.edges();
  for (int e = 0; e < graph_.edge_count(); ++e) {
    if (!edge_constraints_[e]) continue;
    auto [lo, hi] = edges[e];
    const int row = static_cast<int>(slots_.size());
    slots_.push_back({ConstraintKind::edge, lo, hi});
    edge_rows_[e] = row;
    incidence_[lo].push_back({row, 0, e});
    incidence_[hi].push_back({row, 1, e});
  }
  for (int i = 0; i < nodes; ++i) {
    if (!node_constraints_[i]) continue;
    const int row = static_cast<int>(slots_.size());
    slots_.push_back({ConstraintKind::node, i, -1});
    node_rows_[i] = row;
    incidence_[i].push_back({row, -1, -1});
  }
}

Vec StackedPoint::stacked() const {
  Vec z(x.size() + mu.size());
  z << x, mu;
  return z;
}

StackedPoint StackedPoint::split(const Vec& z, int primal_size) {
  return {z.head(primal_size), z.tail(z.size() - primal_size)};
}

void check_primal(const ProblemInstance& p, const Vec& x) {
  if (x.size() != p.primal_size()) {
    std::ostringstream os;
    os << "primal vector has length " << x.size() << ", expected "
       << p.primal_size();
    throw DimensionMismatch(os.str());
  }
}

void check_point(const ProblemInstance& p, const StackedPoint& z) {
  check_primal(p, z.x);
  if (z.mu.size() != p.constraint_count()) {
    std::ostringstream os;
    os << "dual vector has length " << z.mu.size() << ", expected "
       << p.constraint_count();
    throw DimensionMismatch(os.str());
  }
}

double eval_cost(const ProblemInstance& p, const Vec& x) {
  check_primal(p, x);
  double total = 0.0;
  for (int i = 0; i < p.node_count(); ++i) {
    total += p.cost(i).value(p.block(x, i));
  }
  return total;
}

double eval_constraint(const ProblemInstance& p, int row, const Vec& x) {
  const ConstraintSlot& s = p.constraints()[row];
  if (s.kind == ConstraintKind::node) {
    return p.node_constraint(s.i)->value(p.block(x, s.i));
  }
  const int e = p.graph().edge_index(s.i, s.j);
  return p.edge_constraint(e)->value(p.block(x, s.i), p.block(x, s.j));
}

Vec eval_constraints(const ProblemInstance& p, const Vec& x) {
  check_primal(p, x);
  Vec g(p.constraint_count());
  for (int q = 0; q < p.constraint_count(); ++q) g(q) = eval_constraint(p, q, x);
  return g;
}

Vec constraint_gradient(const ProblemInstance& p, int row, const Vec& x) {
  check_primal(p, x);
  const int n = p.dim();
  Vec out = Vec::Zero(p.primal_size());
  const ConstraintSlot& s = p.constraints()[row];
  if (s.kind == ConstraintKind::node) {
    out.segment(s.i * n, n) = p.node_constraint(s.i)->gradient(p.block(x, s.i));
    return out;
  }
  const int e = p.graph().edge_index(s.i, s.j);
  Vec g = p.edge_constraint(e)->gradient(p.block(x, s.i), p.block(x, s.j));
  out.segment(s.i * n, n) = g.head(n);
  out.segment(s.j * n, n) = g.tail(n);
  return out;
}

Vec cost_gradient(const ProblemInstance& p, const Vec& x) {
  check_primal(p, x);
  Vec out(p.primal_size());
  for (int i = 0; i < p.node_count(); ++i) {
    out.segment(i * p.dim(), p.dim()) = p.cost(i).gradient(p.block(x, i));
  }
  return out;
}

double reg_lagrangian(const ProblemInstance& p, const StackedPoint& z) {
  check_point(p, z);
  return eval_cost(p, z.x) + 0.5 * p.nu() * z.x.squaredNorm() +
         z.mu.dot(eval_constraints(p, z.x)) -
         0.5 * p.epsilon() * z.mu.squaredNorm();
}

Vec grad_x_block(const ProblemInstance& p, int i, const Vec& x, const Vec& mu) {
  const int n = p.dim();
  Vec xi = p.block(x, i);
  Vec g = p.cost(i).gradient(xi) + p.nu() * xi;
  for (const Incidence& inc : p.incidence(i)) {
    const double m = mu(inc.row);
    if (m == 0.0) continue;
    if (inc.side < 0) {
      g += m * p.node_constraint(i)->gradient(xi);
    } else {
      const ConstraintSlot& s = p.constraints()[inc.row];
      Vec ge = p.edge_constraint(inc.edge)->gradient(p.block(x, s.i),
                                                     p.block(x, s.j));
      g += m * ge.segment(inc.side * n, n);
    }
  }
  return g;
}

Vec grad_x(const ProblemInstance& p, const StackedPoint& z) {
  check_point(p, z);
  Vec out(p.primal_size());
  for (int i = 0; i < p.node_count(); ++i) {
    out.segment(i * p.dim(), p.dim()) = grad_x_block(p, i, z.x, z.mu);
  }
  return out;
}

Vec grad_mu(const ProblemInstance& p, const StackedPoint& z) {
  check_point(p, z);
  return eval_constraints(p, z.x) - p.epsilon() * z.mu;
}

namespace {

void check_barrier(const ProblemInstance& p, const StackedPoint& z,
                   const BarrierConfig& b) {
  check_point(p, z);
  if (static_cast<int>(b.radii.size()) != p.node_count()) {
    throw DimensionMismatch("barrier needs one radius per node");
  }
  if (!(b.t > 0.0)) throw InvalidArgument("barrier parameter t must be > 0");
  for (int i = 0; i < p.node_count(); ++i) {
    const double r = p.block(z.x, i).norm();
    if (!(r < b.radii[i])) {
      std::ostringstream os;
      os << "node " << i + 1 << " at radius " << r << " is outside its ball "
         << b.radii[i];
      throw OutsideBall(os.str());
    }
  }
}

}  // namespace

double barrier_lagrangian(const ProblemInstance& p, const StackedPoint& z,
                          const BarrierConfig& b) {
  check_barrier(p, z, b);
  double barrier = 0.0;
  for (int i = 0; i < p.node_count(); ++i) {
    barrier += std::log(b.radii[i] - p.block(z.x, i).norm());
  }
  return reg_lagrangian(p, z) - barrier / b.t;
}

Vec barrier_block_gradient(const Vec& xi, double radius, double t) {
  const double r = xi.norm();
  if (r == 0.0) return Vec::Zero(xi.size());
  return xi * (1.0 / (t * r * (radius - r)));
}

Vec barrier_grad_x(const ProblemInstance& p, const StackedPoint& z,
                   const BarrierConfig& b) {
  check_barrier(p, z, b);
  Vec g = grad_x(p, z);
  for (int i = 0; i < p.node_count(); ++i) {
    g.segment(i * p.dim(), p.dim()) +=
        barrier_block_gradient(p.block(z.x, i), b.radii[i], b.t);
  }
  return g;
}

double feasibility_residual(const ProblemInstance& p, const Vec& x) {
  check_primal(p, x);
  Vec sum = -p.x_tot();
  for (int i = 0; i < p.node_count(); ++i) sum += p.block(x, i);
  return sum.norm();
}

Vec uniform_split(const ProblemInstance& p) {
  return p.x_tot().replicate(p.node_count(), 1) / p.node_count();
}

Vec project_to_resource_set(const ProblemInstance& p, const Vec& x) {
  check_primal(p, x);
  Vec excess = -p.x_tot();
  for (int i = 0; i < p.node_count(); ++i) excess += p.block(x, i);
  excess /= p.node_count();
  Vec out = x;
  for (int i = 0; i < p.node_count(); ++i) {
    out.segment(i * p.dim(), p.dim()) -= excess;
  }
  return out;
}

}  // namespace resalloc
