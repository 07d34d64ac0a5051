// Command-line front end: barycenter tracking runs, step-size certificates,
// weight-matrix checks, and one-shot solves of problem files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "resalloc/certificate.hpp"
#include "resalloc/distributed.hpp"
#include "resalloc/errors.hpp"
#include "resalloc/io.hpp"
#include "resalloc/oracle.hpp"
#include "resalloc/tracker.hpp"

namespace {

using namespace resalloc;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUncertified = 2;
constexpr int kExitSolver = 3;

struct RunArgs {
  std::string scenario;
  std::string mode = "centralized";
  bool oracle_check = false;
  double oracle_tol = 1e-10;
  std::string out;
  std::string format = "csv";
};

struct CertifyArgs {
  std::string scenario;
  std::optional<double> f_phi;
  int samples = 2000;
  std::uint64_t seed = 1;
  double mu_radius = 1.0;
};

struct SolveArgs {
  std::string problem;
  double alpha = 0.01;
  double beta = 0.2;
  int iters = 2000;
  std::string mode = "centralized";
  std::string trace;
  std::string messages;
};

int cmd_run(const RunArgs& a) {
  Scenario s = scenario_from_json(read_json(a.scenario));
  TrackingOptions opts;
  opts.mode = parse_tracking_mode(a.mode);
  opts.oracle_check = a.oracle_check;
  opts.oracle_tol = a.oracle_tol;
  TrajectoryLog log = run_tracking(s, opts);

  double worst_bary = 0.0, wall = 0.0;
  for (const StepRecord& r : log.steps) {
    worst_bary = std::max(worst_bary, r.barycenter_residual);
    wall += r.wall_time;
  }
  std::printf("steps: %zu  mode: %s\n", log.steps.size(),
              to_string(log.mode).c_str());
  std::printf("max barycenter residual: %.3e\n", worst_bary);
  if (log.max_oracle_deviation) {
    std::printf("max ||x_solver(k) - x*(k)||: %.6g\n", *log.max_oracle_deviation);
  }
  if (log.max_original_deviation) {
    std::printf("max ||x*(k) - x_opt(k)||: %.6g\n", *log.max_original_deviation);
  }
  std::printf("solver wall time: %.3f s\n", wall);

  if (!a.out.empty()) {
    if (a.format == "csv") {
      export_csv(log, a.out);
    } else {
      export_json(log, a.out);
    }
    std::printf("wrote %s output to %s\n", a.format.c_str(), a.out.c_str());
  }
  return kExitOk;
}

int cmd_certify(const CertifyArgs& a) {
  Scenario s = scenario_from_json(read_json(a.scenario));
  const std::vector<Vec> x0 = initial_positions(s);
  ProblemInstance p = step_problem(s, 1, x0);
  const WeightMatrix w = design_weights(s.graph, s.weight_strategy);

  LipschitzConstant f{0.0, ConstantSource::analytic};
  if (a.f_phi) {
    f.value = *a.f_phi;
  } else {
    // Any configuration meeting the range constraints with barycenter on the
    // path lies within this radius.
    double reach = 0.0;
    for (const Vec& y : s.target_path) reach = std::max(reach, y.norm());
    reach += s.robots() * s.range_r;
    std::vector<double> radius(s.robots(), reach);
    LipschitzEstimate est =
        estimate_lipschitz(p, radius, a.samples, a.seed, a.mu_radius);
    f = {est.value, ConstantSource::estimated};
  }
  Certificate c = certify(w.spectral(), w.entries(), strong_monotonicity(p), f,
                          StepSizes(s.solver.alpha, s.solver.beta));
  std::cout << certificate_to_json(c).dump(2) << '\n';
  return c.certified ? kExitOk : kExitUncertified;
}

int cmd_validate(const std::string& graph_file) {
  WeightSpec spec = weight_spec_from_json(read_json(graph_file));
  const Mat w = spec.matrix();
  ValidationReport r = validate_weight_matrix(w, spec.graph);
  Json out = validation_to_json(r);
  out["spectral"] = spectral_to_json(spectral_summary(w));
  std::cout << out.dump(2) << '\n';
  if (!r.ok()) std::cerr << r.describe() << '\n';
  return r.ok() ? kExitOk : kExitUncertified;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

int cmd_solve(const SolveArgs& a) {
  ProblemInstance p = problem_from_json(read_json(a.problem));
  const WeightMatrix w = laplacian(p.graph());
  const StepSizes s(a.alpha, a.beta);
  RunOptions ro;
  ro.max_iter = a.iters;
  ro.snapshot_every = std::max(1, a.iters / 100);

  Trace t;
  Json out;
  std::vector<MessageLogEntry> messages;
  if (parse_tracking_mode(a.mode) == TrackingMode::centralized) {
    t = run(p, w, s, ro);
  } else {
    NetworkRun nr = run_network(p, w, s, ro, a.messages.empty() ? nullptr : &messages);
    t = std::move(nr.trace);
    out["messages"] = stats_to_json(nr.stats);
  }
  out["iterations"] = t.iterations;
  out["termination"] = to_string(t.termination);
  out["final"] = point_to_json(t.final_point);
  out["feasibility_residual"] = feasibility_residual(p, t.final_point.x);
  out["kkt"] = kkt_to_json(kkt_residual(p, t.final_point.x, t.final_point.mu));
  std::cout << out.dump(2) << '\n';
  if (!a.trace.empty()) write_text(a.trace, trace_to_jsonl(t));
  if (!a.messages.empty()) write_text(a.messages, message_log_to_jsonl(messages));
  return kExitOk;
}

int cmd_oracle(const std::string& problem, double tol) {
  ProblemInstance p = problem_from_json(read_json(problem));
  OracleOptions oo;
  oo.tol = tol;
  OracleSolution sol = solve_regularized_centralized(p, oo);
  if (p.primal_size() <= kPenaltyMaxPrimal) {
    OriginalSolution orig = solve_original_small(p, {}, sol.x_star);
    sol.x_opt = orig.x_opt;
    sol.f_opt = orig.f_opt;
  }
  std::cout << oracle_to_json(sol).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized saddle-point resource allocation and tracking"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a barycenter tracking scenario");
  run_cmd->add_option("--scenario", run_args.scenario, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", run_args.mode)
      ->check(CLI::IsMember({"centralized", "distributed"}));
  run_cmd->add_flag("--oracle-check", run_args.oracle_check,
                    "Compare every step against the reference solver");
  run_cmd->add_option("--oracle-tol", run_args.oracle_tol);
  run_cmd->add_option("--out", run_args.out, "Output directory");
  run_cmd->add_option("--format", run_args.format)
      ->check(CLI::IsMember({"csv", "json"}));

  CertifyArgs cert_args;
  auto* cert_cmd =
      app.add_subcommand("certify", "Print the step-size certificate");
  cert_cmd->add_option("--scenario", cert_args.scenario)
      ->required()
      ->check(CLI::ExistingFile);
  cert_cmd->add_option("--f-phi", cert_args.f_phi,
                       "Known Lipschitz constant of Phi (otherwise sampled)");
  cert_cmd->add_option("--samples", cert_args.samples);
  cert_cmd->add_option("--seed", cert_args.seed);
  cert_cmd->add_option("--mu-radius", cert_args.mu_radius);

  std::string graph_file;
  auto* val_cmd =
      app.add_subcommand("validate-weights", "Check a weight matrix");
  val_cmd->add_option("--graph", graph_file)->required()->check(CLI::ExistingFile);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Iterate on a problem file");
  solve_cmd->add_option("--problem", solve_args.problem)
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--alpha", solve_args.alpha);
  solve_cmd->add_option("--beta", solve_args.beta);
  solve_cmd->add_option("--iters", solve_args.iters);
  solve_cmd->add_option("--mode", solve_args.mode)
      ->check(CLI::IsMember({"centralized", "distributed"}));
  solve_cmd->add_option("--trace", solve_args.trace, "Trace JSONL output");
  solve_cmd->add_option("--messages", solve_args.messages,
                        "Message log JSONL output (distributed mode)");

  std::string oracle_problem;
  double oracle_tol = 1e-10;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Reference saddle point of a problem file");
  oracle_cmd->add_option("--problem", oracle_problem)
      ->required()
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--tol", oracle_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*cert_cmd) return cmd_certify(cert_args);
    if (*val_cmd) return cmd_validate(graph_file);
    if (*solve_cmd) return cmd_solve(solve_args);
    if (*oracle_cmd) return cmd_oracle(oracle_problem, oracle_tol);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
