#include "resalloc/tracker.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "resalloc/distributed.hpp"
#include "resalloc/errors.hpp"

namespace resalloc {

void Scenario::validate() const {
  const int n_nodes = graph.node_count();
  if (n_nodes < 1) throw InvalidArgument("scenario needs at least one robot");
  if (static_cast<int>(q_weights.size()) != n_nodes) {
    throw DimensionMismatch("q_weights needs one entry per robot");
  }
  for (double q : q_weights) {
    if (!(q >= 0.0)) throw InvalidArgument("q_weights must be nonnegative");
  }
  if (!(range_r > 0.0)) throw InvalidArgument("range_r must be > 0");
  if (static_cast<int>(v_max.size()) != n_nodes) {
    throw DimensionMismatch("v_max needs one entry per robot");
  }
  for (const auto& v : v_max) {
    if (v && !(*v > 0.0)) throw InvalidArgument("v_max entries must be > 0");
  }
  if (target_path.size() < 2) {
    throw InvalidArgument("target path needs K >= 1 steps");
  }
  const auto n = target_path.front().size();
  if (n < 1) throw InvalidArgument("target points must be non-empty");
  for (const Vec& y : target_path) {
    if (y.size() != n) throw DimensionMismatch("target points differ in size");
  }
  if (initial_positions) {
    if (static_cast<int>(initial_positions->size()) != n_nodes) {
      throw DimensionMismatch("initial_positions needs one point per robot");
    }
    for (const Vec& x : *initial_positions) {
      if (x.size() != n) {
        throw DimensionMismatch("initial position has the wrong dimension");
      }
    }
  }
  const SolverParams& p = solver;
  if (!(p.nu > 0.0) || !(p.epsilon > 0.0)) {
    throw InvalidArgument("nu and epsilon must be > 0");
  }
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) {
    throw InvalidArgument("alpha and beta must be > 0");
  }
  if (p.iters_per_step < 0) throw InvalidArgument("iters_per_step must be >= 0");
}

std::vector<Vec> synthetic_path(int steps) {
  if (steps < 1) throw InvalidArgument("synthetic path needs steps >= 1");
  std::vector<Vec> path;
  path.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    Vec y(2);
    y << 0.02 * k, 0.5 * std::sin(0.04 * k);
    path.push_back(y);
  }
  return path;
}

Scenario default_scenario(int steps) {
  Scenario s;
  s.graph = seven_node_graph();
  s.q_weights.assign(7, 1.0);
  s.q_weights[5] = 0.0;
  s.range_r = 1.2;
  s.v_max.assign(7, std::nullopt);
  s.v_max[5] = 0.5;
  s.target_path = synthetic_path(steps);
  return s;
}

std::vector<Vec> polygon_positions(int robots, const Vec& center,
                                   double radius) {
  std::vector<Vec> out;
  out.reserve(robots);
  for (int i = 0; i < robots; ++i) {
    Vec x = center;
    if (robots > 1 && x.size() >= 2) {
      const double t = 2.0 * std::numbers::pi * i / robots;
      x(0) += radius * std::cos(t);
      x(1) += radius * std::sin(t);
    } else if (robots > 1) {
      x(0) += radius * (2.0 * i / (robots - 1) - 1.0);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Vec> initial_positions(const Scenario& s) {
  const Vec& y0 = s.target_path.front();
  std::vector<Vec> x = s.initial_positions
                           ? *s.initial_positions
                           : polygon_positions(s.robots(), y0, kAutoRadius);
  Vec mean = Vec::Zero(y0.size());
  for (const Vec& xi : x) mean += xi;
  mean /= s.robots();
  const Vec shift = y0 - mean;
  for (Vec& xi : x) xi += shift;
  return x;
}

Vec stack_positions(const std::vector<Vec>& blocks) {
  if (blocks.empty()) return Vec();
  const auto n = blocks.front().size();
  Vec x(n * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    x.segment(static_cast<Eigen::Index>(i) * n, n) = blocks[i];
  }
  return x;
}

std::vector<Vec> split_positions(const Vec& x, int robots) {
  if (robots < 1 || x.size() % robots != 0) {
    throw DimensionMismatch("stacked length is not a multiple of the robots");
  }
  const auto n = x.size() / robots;
  std::vector<Vec> out;
  out.reserve(robots);
  for (int i = 0; i < robots; ++i) out.push_back(x.segment(i * n, n));
  return out;
}

ProblemInstance step_problem(const Scenario& s, int k,
                             const std::vector<Vec>& prev) {
  if (k < 1 || k > s.steps()) throw InvalidArgument("step index out of range");
  if (static_cast<int>(prev.size()) != s.robots()) {
    throw DimensionMismatch("need one previous position per robot");
  }
  const int n = s.dim();
  std::vector<NodeFunction> costs;
  std::vector<std::optional<NodeFunction>> speed;
  for (int i = 0; i < s.robots(); ++i) {
    const double q = s.q_weights[i];
    const Vec& p = prev[i];
    if (p.size() != n) throw DimensionMismatch("previous position dimension");
    costs.push_back(quadratic({q * Mat::Identity(n, n), -2.0 * q * p,
                               q * p.squaredNorm()}));
    if (s.v_max[i]) {
      speed.push_back(ball_constraint(p, *s.v_max[i]));
    } else {
      speed.push_back(std::nullopt);
    }
  }
  std::vector<std::optional<EdgeFunction>> range(
      s.graph.edge_count(), distance_constraint(s.range_r));
  return ProblemInstance(s.graph, n, std::move(costs), std::move(range),
                         std::move(speed), s.robots() * s.target_path[k],
                         s.solver.nu, s.solver.epsilon);
}

std::vector<Vec> warm_start(const Scenario& s, int k,
                            const std::vector<Vec>& prev) {
  if (k < 0 || k > s.steps()) throw InvalidArgument("step index out of range");
  if (k == 0) return std::vector<Vec>(s.robots(), s.target_path.front());
  if (static_cast<int>(prev.size()) != s.robots()) {
    throw DimensionMismatch("need one previous position per robot");
  }
  const Vec shift = s.target_path[k] - s.target_path[k - 1];
  std::vector<Vec> out = prev;
  for (Vec& x : out) x += shift;
  return out;
}

TrackingMode parse_tracking_mode(const std::string& name) {
  if (name == "centralized") return TrackingMode::centralized;
  if (name == "distributed") return TrackingMode::distributed;
  throw InvalidArgument("unknown mode '" + name + "'");
}

std::string to_string(TrackingMode m) {
  return m == TrackingMode::centralized ? "centralized" : "distributed";
}

namespace {

double max_edge_distance(const Graph& g, const std::vector<Vec>& x) {
  double best = 0.0;
  for (auto [i, j] : g.edges()) best = std::max(best, (x[i] - x[j]).norm());
  return best;
}

}  // namespace

TrajectoryLog run_tracking(const Scenario& s, const TrackingOptions& opts) {
  s.validate();
  const WeightMatrix w = design_weights(s.graph, s.weight_strategy);
  const StepSizes sizes(s.solver.alpha, s.solver.beta);
  const int robots = s.robots();

  TrajectoryLog log;
  log.mode = opts.mode;
  log.y0 = s.target_path.front();
  log.x0 = initial_positions(s);

  std::vector<Vec> prev = log.x0;
  Vec mu;
  for (int k = 1; k <= s.steps(); ++k) {
    try {
      const auto start = std::chrono::steady_clock::now();
      ProblemInstance p = step_problem(s, k, prev);
      if (mu.size() != p.constraint_count()) mu = Vec::Zero(p.constraint_count());

      RunOptions ro;
      ro.max_iter = s.solver.iters_per_step;
      ro.snapshot_every = 0;
      ro.store_states = false;
      ro.initial = StackedPoint{stack_positions(warm_start(s, k, prev)), mu};
      Trace trace = opts.mode == TrackingMode::centralized
                        ? run(p, w, sizes, ro)
                        : run_network(p, w, sizes, ro).trace;
      const double elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();

      StepRecord rec;
      rec.k = k;
      rec.y = s.target_path[k];
      rec.x = split_positions(trace.final_point.x, robots);
      Vec mean = Vec::Zero(s.dim());
      for (const Vec& xi : rec.x) mean += xi;
      mean /= robots;
      rec.barycenter_residual = (mean - rec.y).norm();
      rec.feasibility_residual = feasibility_residual(p, trace.final_point.x);
      rec.max_edge_distance = max_edge_distance(s.graph, rec.x);
      rec.iterations = trace.iterations;
      rec.wall_time = elapsed;

      if (opts.oracle_check) {
        OracleOptions oo;
        oo.tol = opts.oracle_tol;
        oo.max_iter = opts.oracle_max_iter;
        oo.start = StackedPoint{
            project_to_resource_set(p, trace.final_point.x),
            trace.final_point.mu.cwiseMax(0.0)};
        OracleSolution sol = solve_regularized_centralized(p, oo);
        rec.oracle_deviation = (trace.final_point.x - sol.x_star).norm();
        log.max_oracle_deviation =
            std::max(log.max_oracle_deviation.value_or(0.0),
                     *rec.oracle_deviation);
        if (opts.original_check && p.primal_size() <= kPenaltyMaxPrimal) {
          OriginalSolution orig = solve_original_small(p, {}, sol.x_star);
          rec.original_deviation = (sol.x_star - orig.x_opt).norm();
          log.max_original_deviation =
              std::max(log.max_original_deviation.value_or(0.0),
                       *rec.original_deviation);
        }
      }

      prev = rec.x;
      mu = trace.final_point.mu;
      log.steps.push_back(std::move(rec));
    } catch (const StepFailure&) {
      throw;
    } catch (const Error& e) {
      throw StepFailure(k, e.what());
    }
  }
  return log;
}

}  // namespace resalloc
