#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "resalloc/problem.hpp"
#include "resalloc/solver.hpp"

namespace resalloc {

enum class Phase { gradient = 1, state = 2 };

// Message along a directed edge. Phase 1 carries the sender's gradient
// block; phase 2 carries its new x block and, when the sender owns the edge
// dual of this link, that dual value.
struct RoundMessage {
  int from = 0;
  int to = 0;
  Phase phase = Phase::gradient;
  int round = 0;
  Vec block;
  std::optional<double> edge_dual;

  int scalar_count() const {
    return static_cast<int>(block.size()) + (edge_dual ? 1 : 0);
  }
};

// An incident edge as seen from one node.
struct LocalEdge {
  int neighbor = 0;
  int row = -1;          // global constraint row, -1 when unconstrained
  bool owned = false;    // the dual lives at the smaller endpoint
  std::optional<EdgeFunction> constraint;
  double dual = 0.0;     // authoritative if owned, mirror copy otherwise
};

// The program running on one node. It stores only data indexed by itself or
// an incident edge; everything else arrives by message.
class NodeProgram {
 public:
  NodeProgram(int id, int n, double nu, double epsilon, const StepSizes& s,
              Vec x, NodeFunction cost, std::optional<NodeFunction> constraint,
              int constraint_row, double constraint_dual,
              std::vector<LocalEdge> edges,
              std::vector<std::pair<int, double>> weights);

  int id() const { return id_; }
  const Vec& x() const { return x_; }
  const std::vector<LocalEdge>& edges() const { return edges_; }
  const std::vector<std::pair<int, double>>& weights() const { return weights_; }
  bool has_node_constraint() const { return node_constraint_.has_value(); }
  int node_row() const { return node_row_; }
  double node_dual() const { return node_dual_; }

  // Neighbor x blocks currently cached, keyed by neighbor id.
  const std::map<int, Vec>& neighbor_states() const { return neighbor_x_; }

  // Seeds the neighbor cache with the agreed initial state (round 0).
  void seed_neighbor(int neighbor, Vec x, std::optional<double> mirrored_dual);

  // Ingests phase-2 messages of the previous round.
  void receive_state(const RoundMessage& m);

  // Phase 1: computes grad_{x_i} L at the current state and addresses it to
  // every neighbor. Throws MissingMessage if a neighbor state is stale.
  std::vector<RoundMessage> gradient_phase(int round);

  // Phase 2: combines the neighbor gradient blocks with row i of W, updates
  // x_i and the owned duals, and returns the state broadcast.
  std::vector<RoundMessage> update_phase(int round,
                                         std::span<const RoundMessage> grads);

  // Fault injection for tests.
  void overwrite_owned_dual(int neighbor, double value);

 private:
  Vec gradient_block() const;
  const Vec& neighbor_x(int j) const;

  int id_;
  int n_;
  double nu_;
  double epsilon_;
  double alpha_;
  double beta_;
  Vec x_;
  NodeFunction cost_;
  std::optional<NodeFunction> node_constraint_;
  int node_row_;
  double node_dual_;
  std::vector<LocalEdge> edges_;  // ascending neighbor order
  std::vector<std::pair<int, double>> weights_;
  std::map<int, Vec> neighbor_x_;
  std::map<int, int> neighbor_round_;
  Vec grad_;
};

// Splits the instance into node programs: edge duals go to the smaller
// endpoint, h_i to node i, and node i keeps row i of W on N_i ∪ {i}.
std::vector<NodeProgram> partition(const ProblemInstance& p,
                                   const WeightMatrix& w, const StepSizes& s,
                                   const StackedPoint& z0);

// Global state assembled from the node programs.
StackedPoint reassemble(const ProblemInstance& p,
                        std::span<const NodeProgram> nodes);

struct MessageStats {
  long rounds = 0;
  long messages_total = 0;
  long scalars_transferred = 0;
};

struct MessageLogEntry {
  int round;
  int from;
  int to;
  Phase phase;
  int size;
};

// Hook invoked for every delivered message.
using MessageObserver = std::function<void(const RoundMessage&)>;

// One synchronous two-phase round. `inbox` holds the previous round's
// phase-2 messages; the return value is this round's phase-2 outbox. Every
// message must travel along an edge of `g` (ProtocolError otherwise).
std::vector<RoundMessage> run_round(std::span<NodeProgram> nodes,
                                    const Graph& g,
                                    std::span<const RoundMessage> inbox,
                                    int round, MessageStats& stats,
                                    const MessageObserver& observer = {});

struct NetworkRun {
  Trace trace;
  MessageStats stats;
};

// Same options and trace schema as the centralized run; barriers are not
// supported here.
NetworkRun run_network(const ProblemInstance& p, const WeightMatrix& w,
                       const StepSizes& s, const RunOptions& opts,
                       std::vector<MessageLogEntry>* log = nullptr);

struct Equivalence {
  double max_deviation = 0.0;
  std::optional<int> first_divergent_tau;
};

// Max over snapshots of ||z_central - z_distributed||_inf. Throws
// ScheduleMismatch when the snapshot schedules differ or states are absent.
Equivalence equivalence_check(const Trace& central, const Trace& distributed);

}  // namespace resalloc
