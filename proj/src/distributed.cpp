#include "resalloc/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

NodeProgram::NodeProgram(int id, int n, double nu, double epsilon,
                         const StepSizes& s, Vec x, NodeFunction cost,
                         std::optional<NodeFunction> constraint,
                         int constraint_row, double constraint_dual,
                         std::vector<LocalEdge> edges,
                         std::vector<std::pair<int, double>> weights)
    : id_(id),
      n_(n),
      nu_(nu),
      epsilon_(epsilon),
      alpha_(s.alpha),
      beta_(s.beta),
      x_(std::move(x)),
      cost_(std::move(cost)),
      node_constraint_(std::move(constraint)),
      node_row_(constraint_row),
      node_dual_(constraint_dual),
      edges_(std::move(edges)),
      weights_(std::move(weights)) {
  if (x_.size() != n_) throw DimensionMismatch("node state has wrong length");
  std::sort(edges_.begin(), edges_.end(),
            [](const LocalEdge& a, const LocalEdge& b) {
              return a.neighbor < b.neighbor;
            });
}

void NodeProgram::seed_neighbor(int neighbor, Vec x,
                                std::optional<double> mirrored_dual) {
  auto it = std::find_if(edges_.begin(), edges_.end(), [&](const LocalEdge& e) {
    return e.neighbor == neighbor;
  });
  if (it == edges_.end()) {
    throw ProtocolError("node " + std::to_string(id_) +
                        " has no edge to " + std::to_string(neighbor));
  }
  if (x.size() != n_) throw DimensionMismatch("neighbor state has wrong length");
  neighbor_x_[neighbor] = std::move(x);
  neighbor_round_[neighbor] = 0;
  if (mirrored_dual && !it->owned) it->dual = *mirrored_dual;
}

void NodeProgram::receive_state(const RoundMessage& m) {
  if (m.to != id_ || m.phase != Phase::state) {
    throw ProtocolError("state message delivered to the wrong node or phase");
  }
  auto it = std::find_if(edges_.begin(), edges_.end(), [&](const LocalEdge& e) {
    return e.neighbor == m.from;
  });
  if (it == edges_.end()) {
    throw ProtocolError("node " + std::to_string(id_) +
                        " received state from non-neighbor " +
                        std::to_string(m.from));
  }
  if (m.block.size() != n_) throw ProtocolError("state block has wrong length");
  neighbor_x_[m.from] = m.block;
  neighbor_round_[m.from] = m.round;
  if (m.edge_dual) {
    if (it->owned) {
      throw ProtocolError("node " + std::to_string(m.from) +
                          " sent a dual it does not own");
    }
    it->dual = *m.edge_dual;
  }
}

const Vec& NodeProgram::neighbor_x(int j) const {
  auto it = neighbor_x_.find(j);
  if (it == neighbor_x_.end()) {
    throw MissingMessage("node " + std::to_string(id_) + " has no state for " +
                         std::to_string(j));
  }
  return it->second;
}

Vec NodeProgram::gradient_block() const {
  // Same arithmetic, in the same order, as grad_x_block.
  Vec g = cost_.gradient(x_) + nu_ * x_;
  for (const LocalEdge& e : edges_) {
    if (!e.constraint) continue;
    const double m = e.dual;
    if (m == 0.0) continue;
    const bool lo = id_ < e.neighbor;
    const Vec& other = neighbor_x(e.neighbor);
    Vec ge = lo ? e.constraint->gradient(x_, other)
                : e.constraint->gradient(other, x_);
    g += m * ge.segment(lo ? 0 : n_, n_);
  }
  if (node_constraint_ && node_dual_ != 0.0) {
    g += node_dual_ * node_constraint_->gradient(x_);
  }
  return g;
}

std::vector<RoundMessage> NodeProgram::gradient_phase(int round) {
  for (const LocalEdge& e : edges_) {
    auto it = neighbor_round_.find(e.neighbor);
    if (it == neighbor_round_.end() || it->second != round - 1) {
      throw MissingMessage("node " + std::to_string(id_) +
                           " is missing the round " + std::to_string(round - 1) +
                           " state of node " + std::to_string(e.neighbor));
    }
  }
  grad_ = gradient_block();
  std::vector<RoundMessage> out;
  out.reserve(edges_.size());
  for (const LocalEdge& e : edges_) {
    out.push_back({id_, e.neighbor, Phase::gradient, round, grad_, {}});
  }
  return out;
}

std::vector<RoundMessage> NodeProgram::update_phase(
    int round, std::span<const RoundMessage> grads) {
  std::map<int, const Vec*> by_sender;
  for (const RoundMessage& m : grads) {
    if (m.to != id_ || m.phase != Phase::gradient || m.round != round) {
      throw ProtocolError("gradient message with wrong addressee or round");
    }
    by_sender[m.from] = &m.block;
  }

  Vec acc = Vec::Zero(n_);
  for (auto [j, wij] : weights_) {
    if (j == id_) {
      acc += wij * grad_;
      continue;
    }
    auto it = by_sender.find(j);
    if (it == by_sender.end()) {
      throw MissingMessage("node " + std::to_string(id_) +
                           " is missing the round " + std::to_string(round) +
                           " gradient of node " + std::to_string(j));
    }
    acc += wij * *it->second;
  }
  Vec dx = (alpha_ * beta_) * acc;
  Vec x_next = x_ - dx;

  auto ascend = [&](double mu, double g) {
    return std::max(0.0, mu + alpha_ * (g - epsilon_ * mu));
  };
  std::vector<double> duals_next(edges_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const LocalEdge& e = edges_[k];
    duals_next[k] = e.dual;
    if (!e.owned || !e.constraint) continue;
    const double g = e.constraint->value(x_, neighbor_x(e.neighbor));
    duals_next[k] = ascend(e.dual, g);
  }
  const double node_dual_next =
      node_constraint_ ? ascend(node_dual_, node_constraint_->value(x_))
                       : node_dual_;

  x_ = std::move(x_next);
  for (std::size_t k = 0; k < edges_.size(); ++k) edges_[k].dual = duals_next[k];
  node_dual_ = node_dual_next;

  std::vector<RoundMessage> out;
  out.reserve(edges_.size());
  for (const LocalEdge& e : edges_) {
    std::optional<double> d;
    if (e.owned && e.constraint) d = e.dual;
    out.push_back({id_, e.neighbor, Phase::state, round, x_, d});
  }
  return out;
}

void NodeProgram::overwrite_owned_dual(int neighbor, double value) {
  for (LocalEdge& e : edges_) {
    if (e.neighbor == neighbor && e.owned) {
      e.dual = value;
      return;
    }
  }
  throw InvalidArgument("node does not own a dual on that edge");
}

std::vector<NodeProgram> partition(const ProblemInstance& p,
                                   const WeightMatrix& w, const StepSizes& s,
                                   const StackedPoint& z0) {
  check_point(p, z0);
  if (w.size() != p.node_count()) {
    throw DimensionMismatch("weight matrix size does not match node count");
  }
  const Graph& g = p.graph();
  const int n = p.dim();
  std::vector<std::vector<LocalEdge>> local(p.node_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [a, b] = g.edges()[e];
    const int row = p.edge_row(e);
    const double dual = row >= 0 ? z0.mu(row) : 0.0;
    local[a].push_back({b, row, true, p.edge_constraint(e), dual});
    local[b].push_back({a, row, false, p.edge_constraint(e), dual});
  }

  std::vector<NodeProgram> nodes;
  nodes.reserve(p.node_count());
  for (int i = 0; i < p.node_count(); ++i) {
    const int row = p.node_row(i);
    nodes.emplace_back(i, n, p.nu(), p.epsilon(), s, Vec(p.block(z0.x, i)),
                       p.cost(i), p.node_constraint(i), row,
                       row >= 0 ? z0.mu(row) : 0.0, std::move(local[i]),
                       w.row_support(i));
    for (int j : g.neighbors(i)) {
      nodes.back().seed_neighbor(j, p.block(z0.x, j), std::nullopt);
    }
  }
  return nodes;
}

StackedPoint reassemble(const ProblemInstance& p,
                        std::span<const NodeProgram> nodes) {
  if (static_cast<int>(nodes.size()) != p.node_count()) {
    throw DimensionMismatch("one node program per node expected");
  }
  const int n = p.dim();
  StackedPoint z{Vec(p.primal_size()), Vec::Zero(p.constraint_count())};
  std::vector<int> seen(p.constraint_count(), 0);
  for (const NodeProgram& node : nodes) {
    z.x.segment(node.id() * n, n) = node.x();
    for (const LocalEdge& e : node.edges()) {
      if (!e.owned || e.row < 0) continue;
      z.mu(e.row) = e.dual;
      ++seen[e.row];
    }
    if (node.has_node_constraint()) {
      z.mu(node.node_row()) = node.node_dual();
      ++seen[node.node_row()];
    }
  }
  for (int q = 0; q < p.constraint_count(); ++q) {
    if (seen[q] != 1) {
      throw ProtocolError("constraint row " + std::to_string(q) +
                          " is owned by " + std::to_string(seen[q]) + " nodes");
    }
  }
  return z;
}

namespace {

void deliver(const Graph& g, const RoundMessage& m, MessageStats& stats,
             const MessageObserver& observer) {
  if (!g.has_edge(m.from, m.to)) {
    throw ProtocolError("message " + std::to_string(m.from) + " -> " +
                        std::to_string(m.to) + " does not follow an edge");
  }
  ++stats.messages_total;
  stats.scalars_transferred += m.scalar_count();
  if (observer) observer(m);
}

}  // namespace

std::vector<RoundMessage> run_round(std::span<NodeProgram> nodes,
                                    const Graph& g,
                                    std::span<const RoundMessage> inbox,
                                    int round, MessageStats& stats,
                                    const MessageObserver& observer) {
  for (const RoundMessage& m : inbox) {
    if (m.to < 0 || m.to >= static_cast<int>(nodes.size())) {
      throw ProtocolError("message addressed to an unknown node");
    }
    nodes[m.to].receive_state(m);
  }

  std::vector<std::vector<RoundMessage>> grads(nodes.size());
  for (NodeProgram& node : nodes) {
    for (RoundMessage& m : node.gradient_phase(round)) {
      deliver(g, m, stats, observer);
      grads[m.to].push_back(std::move(m));
    }
  }

  std::vector<RoundMessage> outbox;
  for (NodeProgram& node : nodes) {
    for (RoundMessage& m : node.update_phase(round, grads[node.id()])) {
      deliver(g, m, stats, observer);
      outbox.push_back(std::move(m));
    }
  }
  ++stats.rounds;
  return outbox;
}

NetworkRun run_network(const ProblemInstance& p, const WeightMatrix& w,
                       const StepSizes& s, const RunOptions& opts,
                       std::vector<MessageLogEntry>* log) {
  if (opts.barrier) {
    throw InvalidArgument("the distributed simulator does not run barriers");
  }
  if (opts.max_iter < 0) throw InvalidArgument("max_iter must be >= 0");
  StackedPoint z = initial_point(p, opts);
  std::vector<NodeProgram> nodes = partition(p, w, s, z);

  MessageObserver observer;
  if (log) {
    observer = [log](const RoundMessage& m) {
      log->push_back({m.round, m.from, m.to, m.phase, m.scalar_count()});
    };
  }

  NetworkRun out;
  Trace& trace = out.trace;
  trace.feasibility.push_back(feasibility_residual(p, z.x));
  trace.snapshots.push_back(make_snapshot(p, 0, z, opts));

  std::vector<RoundMessage> inbox;
  int tau = 0;
  while (tau < opts.max_iter) {
    inbox = run_round(nodes, p.graph(), inbox, tau + 1, out.stats, observer);
    StackedPoint next = reassemble(p, nodes);
    const double step = std::sqrt((next.x - z.x).squaredNorm() +
                                  (next.mu - z.mu).squaredNorm());
    z = std::move(next);
    ++tau;

    trace.feasibility.push_back(feasibility_residual(p, z.x));
    const bool converged = opts.residual_tol > 0.0 && step <= opts.residual_tol;
    if (snapshot_due(tau, opts.max_iter, opts) || converged) {
      trace.snapshots.push_back(make_snapshot(p, tau, z, opts));
    }
    if (converged) {
      trace.termination = Termination::residual_threshold;
      break;
    }
  }
  trace.iterations = tau;
  trace.final_point = std::move(z);
  return out;
}

Equivalence equivalence_check(const Trace& central, const Trace& distributed) {
  if (central.snapshots.size() != distributed.snapshots.size()) {
    throw ScheduleMismatch("traces hold different numbers of snapshots");
  }
  Equivalence eq;
  for (std::size_t k = 0; k < central.snapshots.size(); ++k) {
    const Snapshot& a = central.snapshots[k];
    const Snapshot& b = distributed.snapshots[k];
    if (a.tau != b.tau) {
      std::ostringstream os;
      os << "snapshot " << k << " is tau=" << a.tau << " vs tau=" << b.tau;
      throw ScheduleMismatch(os.str());
    }
    if (!a.z || !b.z) throw ScheduleMismatch("snapshots carry no states");
    if (a.z->x.size() != b.z->x.size() || a.z->mu.size() != b.z->mu.size()) {
      throw ScheduleMismatch("snapshot states differ in size");
    }
    double dev = 0.0;
    if (a.z->x.size() > 0) {
      dev = (a.z->x - b.z->x).lpNorm<Eigen::Infinity>();
    }
    if (a.z->mu.size() > 0) {
      dev = std::max(dev, (a.z->mu - b.z->mu).lpNorm<Eigen::Infinity>());
    }
    if (dev > 0.0 && !eq.first_divergent_tau) eq.first_divergent_tau = a.tau;
    eq.max_deviation = std::max(eq.max_deviation, dev);
  }
  return eq;
}

}  // namespace resalloc
