#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resalloc/graph.hpp"
#include "resalloc/oracle.hpp"
#include "resalloc/problem.hpp"
#include "resalloc/solver.hpp"

namespace resalloc {

struct SolverParams {
  double nu = 10.0;
  double epsilon = 0.01;
  double alpha = 0.01;
  double beta = 0.2;
  int iters_per_step = 2000;
};

// Robots on a communication graph keep a moving target y(k) at their
// barycenter while paying Q_i ||x_i - x_i(k-1)||^2 for moving, staying
// within range R of their neighbors and under a per-robot speed limit.
struct Scenario {
  Graph graph = Graph::build(1, {});
  std::vector<double> q_weights;
  double range_r = 1.2;
  std::vector<std::optional<double>> v_max;  // nullopt: unbounded
  std::vector<Vec> target_path;              // y(0..K)
  std::optional<std::vector<Vec>> initial_positions;  // nullopt: "auto"
  SolverParams solver;
  WeightStrategy weight_strategy = WeightStrategy::laplacian;

  int robots() const { return graph.node_count(); }
  int steps() const { return static_cast<int>(target_path.size()) - 1; }
  int dim() const { return static_cast<int>(target_path.front().size()); }

  // Throws InvalidArgument / DimensionMismatch.
  void validate() const;
};

inline constexpr int kDefaultSteps = 150;
inline constexpr double kAutoRadius = 0.6;

// y(k) = (0.02 k, 0.5 sin(0.04 k)) for k = 0..steps.
std::vector<Vec> synthetic_path(int steps);

// The seven-robot setting: R = 1.2, Q_6 = 0, v_max,6 = 0.5, nu = 10,
// epsilon = 0.01, W = L, alpha = 0.01, beta = 0.2, 2000 iterations per step.
Scenario default_scenario(int steps = kDefaultSteps);

// Regular N-gon of the given circumradius centered at `center`, first
// vertex along +x. Its barycenter is exactly the center in exact arithmetic.
std::vector<Vec> polygon_positions(int robots, const Vec& center,
                                   double radius = kAutoRadius);

// x_i(0) after shifting so the barycenter is y(0).
std::vector<Vec> initial_positions(const Scenario& s);

// Instance for step k >= 1 around the previous positions.
ProblemInstance step_problem(const Scenario& s, int k,
                             const std::vector<Vec>& prev);

// k = 0: every robot at y(0). Otherwise x_i(k-1) + (y(k) - y(k-1)).
std::vector<Vec> warm_start(const Scenario& s, int k,
                            const std::vector<Vec>& prev);

Vec stack_positions(const std::vector<Vec>& blocks);
std::vector<Vec> split_positions(const Vec& x, int robots);

enum class TrackingMode { centralized, distributed };

TrackingMode parse_tracking_mode(const std::string& name);
std::string to_string(TrackingMode m);

struct TrackingOptions {
  TrackingMode mode = TrackingMode::centralized;
  bool oracle_check = false;
  double oracle_tol = 1e-10;
  int oracle_max_iter = 1'000'000;
  // Also compute the unregularized optimum when the instance is small enough.
  bool original_check = true;
};

struct StepRecord {
  int k = 0;
  Vec y;
  std::vector<Vec> x;
  double barycenter_residual = 0.0;  // ||(1/N) sum x_i - y||
  double feasibility_residual = 0.0;
  double max_edge_distance = 0.0;
  int iterations = 0;
  double wall_time = 0.0;  // seconds; not exported
  std::optional<double> oracle_deviation;   // ||x_solver - x*||
  std::optional<double> original_deviation;  // ||x* - x_opt||
};

struct TrajectoryLog {
  TrackingMode mode = TrackingMode::centralized;
  Vec y0;
  std::vector<Vec> x0;
  std::vector<StepRecord> steps;
  std::optional<double> max_oracle_deviation;
  std::optional<double> max_original_deviation;
};

// Runs k = 1..K in order. Any error in a step is rethrown as StepFailure.
TrajectoryLog run_tracking(const Scenario& s, const TrackingOptions& opts = {});

}  // namespace resalloc
