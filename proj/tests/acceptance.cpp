// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "resalloc/certificate.hpp"
#include "resalloc/distributed.hpp"
#include "resalloc/errors.hpp"
#include "resalloc/oracle.hpp"
#include "resalloc/solver.hpp"
#include "resalloc/tracker.hpp"
#include "support.hpp"

using namespace resalloc;
using testing::Rng;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StepSizes safe_steps(const WeightMatrix& w) {
  return StepSizes(0.05, 1.0 / w.spectral().lambda_max);
}

// The random suite shared by the first two criteria.
std::vector<ProblemInstance> suite() {
  Rng rng(1001);
  std::vector<ProblemInstance> out;
  for (int k = 0; k < 50; ++k) {
    out.push_back(testing::random_instance(
        rng, {testing::uniform_int(rng, 2, 10), testing::uniform_int(rng, 1, 3)}));
  }
  return out;
}

Outcome feasibility() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (const ProblemInstance& p : suite()) {
    WeightMatrix w = laplacian(p.graph());
    RunOptions ro;
    ro.max_iter = 2000;
    ro.snapshot_every = 0;
    Trace t = run(p, w, safe_steps(w), ro);
    const double tol = 1e-9 * (1.0 + p.x_tot().norm());
    for (double r : t.feasibility) {
      ok = ok && r <= tol;
      worst = std::max(worst, r / (1.0 + p.x_tot().norm()));
    }
    ok = ok && t.feasibility.size() == 2001;
  }
  const double elapsed = seconds_since(t0);
  return {ok && elapsed < 30.0,
          fmt("50 instances x 2000 iterations, max residual/(1+|x_tot|) = %.2e, %.2f s",
              worst, elapsed)};
}

Outcome fixed_point() {
  double worst = 0.0;
  bool ok = true;
  for (const ProblemInstance& p : suite()) {
    OracleSolution sol = solve_regularized_centralized(p, {1e-12, 1'000'000, {}});
    WeightMatrix w = laplacian(p.graph());
    RunOptions ro;
    ro.max_iter = 1;
    ro.initial = sol.point();
    Trace t = run(p, w, safe_steps(w), ro);
    const Vec star = sol.point().stacked();
    const double rel = (t.final_point.stacked() - star).norm() / (1.0 + star.norm());
    ok = ok && rel <= 1e-8;
    worst = std::max(worst, rel);
  }
  return {ok, fmt("50 instances, max ||z+ - z*||/(1+||z*||) = %.2e", worst)};
}

Outcome contraction() {
  // Quadratic costs with linear edge rows on K_N, where beta = 1/lambda_max
  // makes beta L the projector onto the resource directions.
  Rng rng(1003);
  double worst_margin = -1.0, worst_tail = 0.0, max_rate = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    const int nodes = testing::uniform_int(rng, 3, 7);
    Graph g = testing::complete_graph(nodes);
    testing::LinearQuadratic lq = testing::linear_quadratic_instance(
        rng, g, testing::uniform_int(rng, 1, 3), testing::uniform(rng, 0.5, 2.0),
        testing::uniform(rng, 0.2, 1.0));
    WeightMatrix w = laplacian(g);
    const double f = lq.lipschitz();
    const double phi = strong_monotonicity(lq.p);
    StepSizes s(testing::uniform(rng, 0.3, 1.0) * phi / (f * f),
                1.0 / w.spectral().lambda_max);
    Certificate c = certify(w.spectral(), std::nullopt, phi, {f}, s);
    if (!c.certified) return {false, fmt("trial %d not certified", trial)};
    max_rate = std::max(max_rate, c.rate);

    OracleSolution sol = solve_regularized_centralized(lq.p, {1e-13, 1'000'000, {}});
    RunOptions ro;
    ro.max_iter = 3000;
    Trace t = run(lq.p, w, s, ro);
    const Vec star = sol.point().stacked();
    std::vector<double> d;
    for (const Snapshot& snap : t.snapshots) {
      const double dk = (snap.z->stacked() - star).squaredNorm();
      if (dk < 1e-20) break;
      d.push_back(dk);
    }
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
      const double ratio = d[k + 1] / d[k];
      ok = ok && ratio <= c.rate + 1e-9;
      worst_margin = std::max(worst_margin, ratio - c.rate);
    }
    // Asymptotic ratio: geometric mean over the last 50 recorded steps.
    if (d.size() < 60) return {false, fmt("trial %d converged too fast to measure", trial)};
    const std::size_t last = d.size() - 1;
    const double tail = std::pow(d[last] / d[last - 50], 1.0 / 50.0);
    ok = ok && tail <= c.rate;
    worst_tail = std::max(worst_tail, tail / c.rate);
  }
  return {ok, fmt("10 instances on K_N, max(ratio - r) = %.2e, max tail/r = %.4f, max r = %.6f",
                  worst_margin, worst_tail, max_rate)};
}

Outcome step_size_logic() {
  Rng rng(1004);
  int counterexamples = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double phi = testing::uniform(rng, 1e-3, 1.0);
    const double f = phi * testing::uniform(rng, 1.0, 100.0);
    const double lmax = testing::uniform(rng, 0.1, 20.0);
    StepSizes s(testing::uniform(rng, 0.01, 0.999) * 2.0 * phi / (f * f),
                testing::uniform(rng, 0.01, 0.999) / lmax);
    SpectralSummary spec{0.0, lmax, lmax, true};
    if (!certify(spec, std::nullopt, phi, {f}, s).certified) ++counterexamples;
  }
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = testing::random_connected_graph(rng, testing::uniform_int(rng, 3, 9));
    Mat l = laplacian_matrix(g);
    SpectralSummary s = spectral_summary(l);
    // Ratios for which the feasible interval is non-empty.
    const double cap = (s.lambda_max - s.lambda2) / (s.lambda_max + s.lambda2);
    const double ratio = cap + testing::uniform(rng, 0.01, 0.9) * (1.0 - cap);
    const double closed = (1.0 + ratio) / s.lambda_max;
    const double got = max_beta_nonsymmetric(l, ratio, 1.0);
    worst = std::max(worst, std::abs(got - closed) / closed);
    ++compared;
  }
  return {counterexamples == 0 && worst <= 1e-8,
          fmt("%d counterexamples in 1000 draws, bisection vs closed form max rel. err %.2e over %d graphs",
              counterexamples, worst, compared)};
}

// Tiny instance with ball rows around a Slater anchor and range rows on
// every edge, nN <= 4.
ProblemInstance tiny_instance(Rng& rng, int nodes, int n) {
  std::vector<Edge> edges;
  for (int i = 1; i < nodes; ++i) edges.emplace_back(i - 1, i);
  Graph g = Graph::build(nodes, edges);
  std::vector<NodeFunction> costs;
  std::vector<std::optional<NodeFunction>> balls;
  Vec x_tot = Vec::Zero(n);
  for (int i = 0; i < nodes; ++i) {
    // Cost minimizers far from the anchor so the constraints bind.
    Vec target = testing::random_vec(rng, n, -2.0, 2.0);
    Mat q = testing::random_spd(rng, n, 0.5);
    costs.push_back(quadratic({q, -2.0 * q * target, target.dot(q * target)}));
    Vec anchor = testing::random_vec(rng, n, -0.4, 0.4);
    x_tot += anchor;
    balls.push_back(ball_constraint(anchor, testing::uniform(rng, 0.3, 0.8)));
  }
  std::vector<std::optional<EdgeFunction>> edge_rows;
  for (int e = 0; e < g.edge_count(); ++e) {
    edge_rows.push_back(distance_constraint(testing::uniform(rng, 1.2, 2.0)));
  }
  return ProblemInstance(std::move(g), n, std::move(costs), std::move(edge_rows),
                         std::move(balls), x_tot, testing::uniform(rng, 0.05, 1.0),
                         testing::uniform(rng, 0.001, 0.05));
}

Outcome regularization_bounds() {
  Rng rng(1005);
  const int shapes[][2] = {{2, 1}, {2, 2}, {3, 1}, {4, 1}};
  int violations = 0;
  double worst_sub = 0.0, worst_viol = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto [nodes, n] = shapes[trial % 4];
    ProblemInstance p = tiny_instance(rng, nodes, n);
    const int size = p.primal_size();
    GridBox box{Vec::Constant(size, -3.0), Vec::Constant(size, 3.0)};
    OriginalSolution orig = solve_original_small(p, box);
    if (!orig.grid || std::abs(orig.grid->f - orig.f_opt) > 1e-3) {
      return {false, fmt("trial %d: grid does not confirm f_opt", trial)};
    }
    OracleSolution sol = solve_regularized_centralized(p, {1e-12, 1'000'000, {}});

    // Iterate cloud: a solver run from the uniform split, plus both optima.
    WeightMatrix w = laplacian(p.graph());
    RunOptions ro;
    ro.max_iter = 2000;
    ro.snapshot_every = 10;
    Trace t = run(p, w, StepSizes(0.01, 1.0 / w.spectral().lambda_max), ro);
    std::vector<StackedPoint> cloud{sol.point(),
                                    {orig.x_opt, Vec::Zero(p.constraint_count())}};
    for (const Snapshot& s : t.snapshots) cloud.push_back(*s.z);
    EmpiricalConstants c = empirical_constants(p, cloud);

    const double sub = suboptimality_bound(c.m_f, c.m_mu, c.d, p.nu(), p.epsilon());
    const double gap = std::abs(sol.f_star - orig.f_opt);
    if (gap > sub) ++violations;
    worst_sub = std::max(worst_sub, gap / sub);
    std::vector<double> vb = violation_bound(c.md, c.m_mu, p.nu(), p.epsilon());
    Vec g = eval_constraints(p, sol.x_star);
    for (int q = 0; q < p.constraint_count(); ++q) {
      const double v = std::max(0.0, g(q));
      if (v > vb[q]) ++violations;
      worst_viol = std::max(worst_viol, v / vb[q]);
    }
  }
  return {violations == 0,
          fmt("20 tiny instances, %d bound violations, max gap/bound = %.3f, max violation/bound = %.3f",
              violations, worst_sub, worst_viol)};
}

Outcome distributed_equivalence() {
  double worst = 0.0;
  bool ok = true;
  auto check = [&](const ProblemInstance& p, const WeightMatrix& w, const StepSizes& s,
                   int iters) {
    RunOptions ro;
    ro.max_iter = iters;
    Trace c = run(p, w, s, ro);
    NetworkRun d = run_network(p, w, s, ro);
    Equivalence eq = equivalence_check(c, d.trace);
    worst = std::max(worst, eq.max_deviation);
    ok = ok && eq.max_deviation <= 1e-12 && !eq.first_divergent_tau;
    ok = ok && d.stats.messages_total == 4L * p.graph().edge_count() * iters;
  };
  Scenario sc = default_scenario(1);
  ProblemInstance step = step_problem(sc, 1, initial_positions(sc));
  check(step, laplacian(sc.graph), StepSizes(sc.solver.alpha, sc.solver.beta),
        sc.solver.iters_per_step);
  Rng rng(1006);
  for (int trial = 0; trial < 20; ++trial) {
    ProblemInstance p = testing::random_instance(
        rng, {testing::uniform_int(rng, 2, 10), testing::uniform_int(rng, 1, 3)});
    WeightMatrix w = laplacian(p.graph());
    check(p, w, safe_steps(w), 300);
  }
  return {ok, fmt("tracking step (2000 rounds) + 20 random instances, max deviation %.2e, 4E messages per round",
                  worst)};
}

Outcome tracking_reproduction() {
  Scenario sc = default_scenario();
  TrackingOptions opts;
  opts.oracle_check = true;
  auto t0 = std::chrono::steady_clock::now();
  TrajectoryLog log = run_tracking(sc, opts);
  const double elapsed = seconds_since(t0);
  double bary = 0.0;
  for (const StepRecord& r : log.steps) {
    bary = std::max(bary, r.barycenter_residual / (1.0 + r.y.norm()));
  }
  const double dev = log.max_oracle_deviation.value_or(1e300);
  const bool ok = log.steps.size() == 150 && dev <= 0.05 && bary <= 1e-9 && elapsed < 60.0;
  std::string extra;
  if (log.max_original_deviation) {
    extra = fmt(", max ||x* - x_opt|| = %.3f (informational)", *log.max_original_deviation);
  }
  return {ok, fmt("150 steps, max ||x_solver - x*|| = %.4f, barycenter residual %.2e, %.2f s with oracle%s",
                  dev, bary, elapsed, extra.c_str())};
}

Outcome gradients() {
  Rng rng(1008);
  double worst_x = 0.0, worst_mu = 0.0, worst_b = 0.0;
  int rows = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ProblemInstance p = testing::random_instance(
        rng, {testing::uniform_int(rng, 2, 6), testing::uniform_int(rng, 1, 3)});
    StackedPoint z = testing::random_point(rng, p);
    worst_x = std::max(worst_x, finite_diff_check(
                                    [&](const Vec& x) { return reg_lagrangian(p, {x, z.mu}); },
                                    [&](const Vec& x) { return grad_x(p, {x, z.mu}); }, z.x));
    if (p.constraint_count() > 0) {
      ++rows;
      worst_mu = std::max(worst_mu,
                          finite_diff_check(
                              [&](const Vec& mu) { return reg_lagrangian(p, {z.x, mu}); },
                              [&](const Vec& mu) { return grad_mu(p, {z.x, mu}); }, z.mu));
    }
    // Barrier balls large enough to contain the point.
    std::vector<double> radii;
    for (int i = 0; i < p.node_count(); ++i) {
      radii.push_back(p.block(z.x, i).norm() + testing::uniform(rng, 0.2, 1.0));
    }
    BarrierConfig b{radii, testing::uniform(rng, 1.0, 100.0)};
    worst_b = std::max(worst_b, finite_diff_check(
                                    [&](const Vec& x) { return barrier_lagrangian(p, {x, z.mu}, b); },
                                    [&](const Vec& x) { return barrier_grad_x(p, {x, z.mu}, b); },
                                    z.x));
  }
  return {worst_x <= 1e-6 && worst_mu <= 1e-6 && worst_b <= 1e-6 && rows > 0,
          fmt("100 points, max rel. error grad_x %.2e, grad_mu %.2e (%d points), barrier %.2e",
              worst_x, worst_mu, rows, worst_b)};
}

Outcome barrier_containment() {
  Rng rng(1009);
  int escapes = 0, breakdowns = 0, contained = 0;
  double min_slack = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const int nodes = testing::uniform_int(rng, 3, 6);
    Graph g = testing::complete_graph(nodes);
    testing::LinearQuadratic lq = testing::linear_quadratic_instance(rng, g, 2, 1.0, 0.5);
    WeightMatrix w = laplacian(g);
    const double f = lq.lipschitz();
    const double phi = strong_monotonicity(lq.p);
    const double beta = 1.0 / w.spectral().lambda_max;
    Certificate c = certify(w.spectral(), std::nullopt, phi, {f}, StepSizes(1e-6, beta));
    StepSizes s(10.0 * c.alpha_bound, beta);

    RunOptions ro;
    ro.max_iter = 500;
    ro.throw_on_breakdown = false;
    const Vec x0 = uniform_split(lq.p);
    std::vector<double> radii(nodes, lq.p.block(x0, 0).norm() + testing::uniform(rng, 0.05, 0.5));
    ro.barrier = BarrierConfig{radii, testing::uniform(rng, 10.0, 1e4)};
    Trace t = run(lq.p, w, s, ro);
    bool inside = true;
    for (const Snapshot& snap : t.snapshots) {
      for (int i = 0; i < nodes; ++i) {
        const double slack = radii[i] - lq.p.block(snap.z->x, i).norm();
        min_slack = std::min(min_slack, slack);
        inside = inside && slack > 0.0;
      }
    }
    if (!inside) {
      ++escapes;
    } else if (t.termination == Termination::barrier_backtrack_floor) {
      ++breakdowns;
    } else {
      ++contained;
    }
  }
  return {escapes == 0,
          fmt("20 runs at 10x the certified alpha: %d contained, %d reported breakdowns, %d escapes, min slack %.2e",
              contained, breakdowns, escapes, min_slack)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"feasibility preservation", feasibility},
      {"saddle point is a fixed point", fixed_point},
      {"geometric contraction rate", contraction},
      {"step-size logic", step_size_logic},
      {"regularization bounds", regularization_bounds},
      {"distributed equals centralized", distributed_equivalence},
      {"barycenter tracking reproduction", tracking_reproduction},
      {"gradient correctness", gradients},
      {"barrier containment", barrier_containment},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("[%s] %d. %s: %s\n", out.pass ? "PASS" : "FAIL", index, name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
