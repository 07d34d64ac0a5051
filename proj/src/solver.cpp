#include "resalloc/solver.hpp"

#include <cmath>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

StepSizes::StepSizes(double a, double b) : alpha(a), beta(b) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw InvalidArgument("step sizes alpha and beta must be strictly positive");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iter:
      return "max_iter";
    case Termination::residual_threshold:
      return "residual_threshold";
    case Termination::barrier_backtrack_floor:
      return "barrier_backtrack_floor";
  }
  return "unknown";
}

Vec apply_weights(const WeightMatrix& w, int n, const Vec& v) {
  const int nodes = w.size();
  if (v.size() != n * nodes) {
    throw DimensionMismatch("vector length does not match (W ⊗ I_n)");
  }
  Vec out(v.size());
  for (int i = 0; i < nodes; ++i) {
    Vec acc = Vec::Zero(n);
    for (auto [j, wij] : w.row_support(i)) acc += wij * v.segment(j * n, n);
    out.segment(i * n, n) = acc;
  }
  return out;
}

namespace {

void check_weights(const ProblemInstance& p, const WeightMatrix& w) {
  if (w.size() != p.node_count()) {
    throw DimensionMismatch("weight matrix size does not match node count");
  }
}

Vec primal_gradient(const ProblemInstance& p, const StackedPoint& z,
                    const std::optional<BarrierConfig>& barrier) {
  return barrier ? barrier_grad_x(p, z, *barrier) : grad_x(p, z);
}

}  // namespace

Vec primal_step(const ProblemInstance& p, const WeightMatrix& w,
                const StepSizes& s, const StackedPoint& z) {
  check_point(p, z);
  check_weights(p, w);
  Vec dx = apply_weights(w, p.dim(), grad_x(p, z));
  return z.x - (s.alpha * s.beta) * dx;
}

Vec dual_step(const ProblemInstance& p, const StepSizes& s,
              const StackedPoint& z) {
  check_point(p, z);
  Vec g = eval_constraints(p, z.x);
  Vec out(z.mu.size());
  for (int q = 0; q < z.mu.size(); ++q) {
    out(q) = std::max(0.0, z.mu(q) + s.alpha * (g(q) - p.epsilon() * z.mu(q)));
  }
  return out;
}

StackedPoint initial_point(const ProblemInstance& p, const RunOptions& opts) {
  StackedPoint z = opts.initial ? *opts.initial
                                : StackedPoint{uniform_split(p),
                                               Vec::Zero(p.constraint_count())};
  check_point(p, z);
  const double res = feasibility_residual(p, z.x);
  if (res > kFeasibleStartTol * (1.0 + p.x_tot().norm())) {
    std::ostringstream os;
    os << "initial point violates the resource constraint (residual " << res
       << ")";
    throw InfeasibleStart(os.str());
  }
  if ((z.mu.array() < 0.0).any()) {
    throw InvalidArgument("initial dual iterate must be nonnegative");
  }
  if (opts.barrier) {
    // Raises OutsideBall for an exterior start.
    barrier_lagrangian(p, z, *opts.barrier);
  }
  return z;
}

bool snapshot_due(int tau, int max_iter, const RunOptions& opts) {
  if (tau == 0 || tau == max_iter) return true;
  return opts.snapshot_every > 0 && tau % opts.snapshot_every == 0;
}

Snapshot make_snapshot(const ProblemInstance& p, int tau,
                       const StackedPoint& z, const RunOptions& opts) {
  Snapshot s;
  s.tau = tau;
  if (opts.store_states) s.z = z;
  s.feasibility_residual = feasibility_residual(p, z.x);
  s.grad_x_norm = primal_gradient(p, z, opts.barrier).norm();
  s.grad_mu_norm = grad_mu(p, z).norm();
  if (opts.reference) {
    s.dist_to_reference = std::sqrt((z.x - opts.reference->x).squaredNorm() +
                                    (z.mu - opts.reference->mu).squaredNorm());
  }
  return s;
}

Trace run(const ProblemInstance& p, const WeightMatrix& w, const StepSizes& s,
          const RunOptions& opts) {
  check_weights(p, w);
  if (opts.max_iter < 0) throw InvalidArgument("max_iter must be >= 0");
  Trace trace;
  StackedPoint z = initial_point(p, opts);
  const int n = p.dim();
  const double ab = s.alpha * s.beta;

  trace.feasibility.push_back(feasibility_residual(p, z.x));
  trace.snapshots.push_back(make_snapshot(p, 0, z, opts));

  int tau = 0;
  while (tau < opts.max_iter) {
    Vec dx = ab * apply_weights(w, n, primal_gradient(p, z, opts.barrier));
    Vec x_next = z.x - dx;

    if (opts.barrier) {
      const auto& radii = opts.barrier->radii;
      auto inside = [&](const Vec& x) {
        for (int i = 0; i < p.node_count(); ++i) {
          if (!(x.segment(i * n, n).norm() < radii[i] * (1.0 - kBallMargin))) {
            return false;
          }
        }
        return true;
      };
      double gamma = 1.0;
      while (!inside(x_next)) {
        gamma *= 0.5;
        if (gamma < kBacktrackFloor) {
          std::ostringstream os;
          os << "barrier step factor fell below " << kBacktrackFloor
             << " at iteration " << tau;
          if (opts.throw_on_breakdown) throw BarrierBreakdown(os.str());
          trace.termination = Termination::barrier_backtrack_floor;
          trace.message = os.str();
          trace.iterations = tau;
          if (trace.snapshots.back().tau != tau) {
            trace.snapshots.push_back(make_snapshot(p, tau, z, opts));
          }
          trace.final_point = z;
          return trace;
        }
        x_next = z.x - gamma * dx;
      }
      if (gamma < 1.0) trace.backtracks.push_back({tau, gamma});
    }

    Vec mu_next = dual_step(p, s, z);
    const double step = std::sqrt((x_next - z.x).squaredNorm() +
                                  (mu_next - z.mu).squaredNorm());
    z.x = std::move(x_next);
    z.mu = std::move(mu_next);
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
  return trace;
}

}  // namespace resalloc
