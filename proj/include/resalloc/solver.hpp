#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resalloc/graph.hpp"
#include "resalloc/problem.hpp"

namespace resalloc {

struct StepSizes {
  double alpha;
  double beta;

  // Throws InvalidArgument unless both are strictly positive.
  StepSizes(double alpha, double beta);
};

// x - alpha * beta * (W ⊗ I_n) grad_x L(x, mu). Node i combines gradient
// blocks over N_i ∪ {i} in ascending index order.
Vec primal_step(const ProblemInstance& p, const WeightMatrix& w,
                const StepSizes& s, const StackedPoint& z);

// max(0, mu + alpha * (g(x) - epsilon * mu)), componentwise.
Vec dual_step(const ProblemInstance& p, const StepSizes& s,
              const StackedPoint& z);

// (W ⊗ I_n) v with the same per-node summation order as primal_step.
Vec apply_weights(const WeightMatrix& w, int n, const Vec& v);

struct Snapshot {
  int tau = 0;
  std::optional<StackedPoint> z;
  double feasibility_residual = 0.0;
  double grad_x_norm = 0.0;
  double grad_mu_norm = 0.0;
  std::optional<double> dist_to_reference;
};

struct BacktrackEvent {
  int tau;       // iteration whose primal step was shortened
  double gamma;  // accepted step factor
};

enum class Termination { max_iter, residual_threshold, barrier_backtrack_floor };

std::string to_string(Termination t);

struct Trace {
  std::vector<Snapshot> snapshots;
  // ||sum_i x_i - x_tot|| for tau = 0..iterations.
  std::vector<double> feasibility;
  std::vector<BacktrackEvent> backtracks;
  Termination termination = Termination::max_iter;
  int iterations = 0;
  StackedPoint final_point;
  std::string message;
};

struct RunOptions {
  int max_iter = 2000;
  // Stop once ||z^(tau+1) - z^(tau)|| <= residual_tol; 0 disables.
  double residual_tol = 0.0;
  // Snapshot every k iterations (plus tau = 0 and the final iterate);
  // 0 records only the first and last.
  int snapshot_every = 1;
  bool store_states = true;
  std::optional<BarrierConfig> barrier;
  std::optional<StackedPoint> reference;
  // Defaults to the uniform split with mu = 0.
  std::optional<StackedPoint> initial;
  // On barrier breakdown, return the trace (termination set) instead of
  // throwing.
  bool throw_on_breakdown = true;
};

inline constexpr double kFeasibleStartTol = 1e-9;
inline constexpr double kBacktrackFloor = 1e-12;
inline constexpr double kBallMargin = 1e-12;

// Jacobi iteration: both steps read z^(tau). Throws InfeasibleStart, and
// BarrierBreakdown when the step factor would fall below kBacktrackFloor.
Trace run(const ProblemInstance& p, const WeightMatrix& w, const StepSizes& s,
          const RunOptions& opts = {});

// Snapshot bookkeeping shared with the distributed simulator.
Snapshot make_snapshot(const ProblemInstance& p, int tau,
                       const StackedPoint& z, const RunOptions& opts);
bool snapshot_due(int tau, int max_iter, const RunOptions& opts);
StackedPoint initial_point(const ProblemInstance& p, const RunOptions& opts);

}  // namespace resalloc
