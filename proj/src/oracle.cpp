#include "resalloc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

double KKTResidual::max() const {
  return std::max({stationarity, dual_feas, primal_feas, complementarity,
                   nonneg});
}

Vec project_consensus_complement(const Vec& v, int n, int nodes) {
  Vec mean = Vec::Zero(n);
  for (int i = 0; i < nodes; ++i) mean += v.segment(i * n, n);
  mean /= nodes;
  Vec out = v;
  for (int i = 0; i < nodes; ++i) out.segment(i * n, n) -= mean;
  return out;
}

Mat affine_projector(int n, int nodes) {
  const int size = n * nodes;
  Mat p = Mat::Identity(size, size);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      p.block(i * n, j * n, n, n) -= Mat::Identity(n, n) / nodes;
    }
  }
  return p;
}

KKTResidual kkt_residual(const ProblemInstance& p, const Vec& x, const Vec& mu) {
  StackedPoint z{x, mu};
  check_point(p, z);
  KKTResidual r;
  r.stationarity =
      project_consensus_complement(grad_x(p, z), p.dim(), p.node_count()).norm();
  Vec gm = grad_mu(p, z);
  r.dual_feas = gm.cwiseMax(0.0).norm();
  r.primal_feas = feasibility_residual(p, x);
  r.complementarity =
      mu.size() > 0 ? mu.cwiseProduct(gm).cwiseAbs().maxCoeff() : 0.0;
  r.nonneg = mu.size() > 0 ? std::max(0.0, -mu.minCoeff()) : 0.0;
  return r;
}

double natural_residual(const ProblemInstance& p, const StackedPoint& z) {
  const double sx =
      project_consensus_complement(grad_x(p, z), p.dim(), p.node_count())
          .squaredNorm();
  Vec mu_next = (z.mu + grad_mu(p, z)).cwiseMax(0.0);
  return std::sqrt(sx + (z.mu - mu_next).squaredNorm());
}

OracleSolution solve_regularized_centralized(const ProblemInstance& p,
                                             const OracleOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("oracle tolerance must be > 0");
  const int n = p.dim();
  const int nodes = p.node_count();
  StackedPoint z = opts.start ? *opts.start
                              : StackedPoint{uniform_split(p),
                                             Vec::Zero(p.constraint_count())};
  check_point(p, z);
  z.x = project_to_resource_set(p, z.x);
  z.mu = z.mu.cwiseMax(0.0);

  // Projected field: x-part already lies in the tangent space of the
  // resource set, so x - a * fx stays feasible.
  auto field = [&](const StackedPoint& pt, Vec& fx, Vec& fm) {
    fx = project_consensus_complement(grad_x(p, pt), n, nodes);
    fm = -grad_mu(p, pt);
  };

  double step = 1.0;
  double best = std::numeric_limits<double>::infinity();
  Vec fx0, fm0, fx1, fm1;
  OracleSolution sol;
  for (int it = 0; it < opts.max_iter; ++it) {
    if (it % 10 == 0) {
      z.x = project_to_resource_set(p, z.x);
      KKTResidual r = kkt_residual(p, z.x, z.mu);
      const double nat = natural_residual(p, z);
      best = std::min(best, std::max(r.max(), nat));
      if (r.max() <= opts.tol && nat <= opts.tol) {
        sol.x_star = z.x;
        sol.mu_star = z.mu;
        sol.residual = r;
        sol.natural_residual = nat;
        sol.iterations = it;
        sol.f_star = eval_cost(p, z.x);
        sol.lagrangian_star = reg_lagrangian(p, z);
        return sol;
      }
    }
    field(z, fx0, fm0);
    StackedPoint mid;
    while (true) {
      mid.x = z.x - step * fx0;
      mid.mu = (z.mu - step * fm0).cwiseMax(0.0);
      field(mid, fx1, fm1);
      const double move = std::sqrt((mid.x - z.x).squaredNorm() +
                                    (mid.mu - z.mu).squaredNorm());
      const double change = std::sqrt((fx1 - fx0).squaredNorm() +
                                      (fm1 - fm0).squaredNorm());
      if (step * change <= 0.9 * move || move == 0.0) break;
      step *= 0.5;
      if (step < 1e-14) {
        throw NoConvergence("oracle step size collapsed", best);
      }
    }
    z.x -= step * fx1;
    z.mu = (z.mu - step * fm1).cwiseMax(0.0);
  }
  std::ostringstream os;
  os << "regularized oracle did not reach tolerance " << opts.tol << " in "
     << opts.max_iter << " iterations (best residual " << best << ")";
  throw NoConvergence(os.str(), best);
}

namespace {

double max_violation(const ProblemInstance& p, const Vec& x) {
  if (p.constraint_count() == 0) return 0.0;
  return std::max(0.0, eval_constraints(p, x).maxCoeff());
}

// Orthonormal basis of {x : (1^T ⊗ I_n) x = 0}.
Mat null_space_basis(int n, int nodes) {
  Mat a(n, n * nodes);
  for (int i = 0; i < nodes; ++i) a.block(0, i * n, n, n) = Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n * nodes - n);
}

struct Penalty {
  const ProblemInstance& p;
  double weight;

  double value(const Vec& x) const {
    double v = eval_cost(p, x);
    if (p.constraint_count() > 0) {
      v += 0.5 * weight * eval_constraints(p, x).cwiseMax(0.0).squaredNorm();
    }
    return v;
  }

  Vec gradient(const Vec& x) const {
    Vec g = cost_gradient(p, x);
    for (int q = 0; q < p.constraint_count(); ++q) {
      const double gq = eval_constraint(p, q, x);
      if (gq > 0.0) g += weight * gq * constraint_gradient(p, q, x);
    }
    return g;
  }
};

// Damped Newton on x0 + Z y with a finite-difference Hessian.
Vec minimize_on_affine_set(const Penalty& pen, const Mat& basis, Vec x) {
  const int d = static_cast<int>(basis.cols());
  if (d == 0) return x;
  for (int it = 0; it < 200; ++it) {
    Vec g = basis.transpose() * pen.gradient(x);
    if (g.norm() <= 1e-13 * (1.0 + pen.weight)) break;
    Mat h(d, d);
    const double fd = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
    for (int k = 0; k < d; ++k) {
      Vec up = pen.gradient(x + fd * basis.col(k));
      Vec down = pen.gradient(x - fd * basis.col(k));
      h.col(k) = basis.transpose() * (up - down) / (2.0 * fd);
    }
    h = 0.5 * (h + h.transpose());
    double damping = 0.0;
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    Vec dir;
    while (true) {
      Eigen::LLT<Mat> llt(h + damping * Mat::Identity(d, d));
      if (llt.info() == Eigen::Success) {
        dir = -llt.solve(g);
        if (dir.allFinite() && g.dot(dir) < 0.0) break;
      }
      damping = damping == 0.0 ? 1e-12 * scale : 10.0 * damping;
    }
    const double f0 = pen.value(x);
    double t = 1.0;
    Vec trial = x + basis * dir;
    while (pen.value(trial) > f0 + 1e-4 * t * g.dot(dir) && t > 1e-16) {
      t *= 0.5;
      trial = x + t * (basis * dir);
    }
    if (t <= 1e-16) break;
    const double moved = (trial - x).norm();
    x = std::move(trial);
    if (moved <= 1e-15 * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace

GridResult grid_brute_force(const ProblemInstance& p, const GridBox& box,
                            double pitch) {
  const int n = p.dim();
  const int nodes = p.node_count();
  if (p.primal_size() > kGridMaxPrimal) {
    throw TooLarge("grid brute force is limited to nN <= 4");
  }
  if (box.lower.size() != p.primal_size() || box.upper.size() != p.primal_size()) {
    throw DimensionMismatch("grid box must cover all nN coordinates");
  }
  if (!(pitch > 0.0)) throw InvalidArgument("grid pitch must be > 0");
  const int d = n * (nodes - 1);

  GridResult res;
  res.f = std::numeric_limits<double>::infinity();
  Vec x(p.primal_size());
  auto evaluate = [&](const Vec& free) {
    x.head(d) = free;
    Vec last = p.x_tot();
    for (int i = 0; i < nodes - 1; ++i) last -= free.segment(i * n, n);
    x.tail(n) = last;
    ++res.evaluations;
    for (int q = 0; q < p.constraint_count(); ++q) {
      if (eval_constraint(p, q, x) > 0.0) return;
    }
    const double f = eval_cost(p, x);
    if (f < res.f) {
      res.f = f;
      res.x = x;
    }
  };

  if (d == 0) {
    evaluate(Vec());
    if (!std::isfinite(res.f)) throw NoConvergence("single point infeasible", 0);
    res.pitch = pitch;
    return res;
  }

  Vec lo = box.lower.head(d);
  Vec hi = box.upper.head(d);
  double h = std::max((hi - lo).maxCoeff() / 50.0, pitch);
  while (true) {
    std::vector<int> counts(d);
    for (int k = 0; k < d; ++k) {
      counts[k] = static_cast<int>(std::floor((hi(k) - lo(k)) / h + 1e-9)) + 1;
    }
    std::vector<int> idx(d, 0);
    Vec free(d);
    while (true) {
      for (int k = 0; k < d; ++k) free(k) = lo(k) + idx[k] * h;
      evaluate(free);
      int k = 0;
      while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
      if (k == d) break;
    }
    if (!std::isfinite(res.f)) {
      throw NoConvergence("no feasible point on the grid", 0);
    }
    res.pitch = h;
    if (h <= pitch) break;
    // Refine a +-3 cell window centred on the incumbent, which stays on the
    // new lattice.
    Vec center = res.x.head(d);
    const double next = std::max(h / 6.0, pitch);
    const double half = std::ceil(3.0 * h / next) * next;
    lo = center.array() - half;
    hi = center.array() + half;
    h = next;
  }
  return res;
}

OriginalSolution solve_original_small(const ProblemInstance& p,
                                      const std::optional<GridBox>& box,
                                      const std::optional<Vec>& start) {
  if (p.primal_size() > kPenaltyMaxPrimal) {
    throw TooLarge("original-problem solver is limited to nN <= 16");
  }
  Vec x = start ? project_to_resource_set(p, *start) : uniform_split(p);
  const Mat basis = null_space_basis(p.dim(), p.node_count());
  double weight = 10.0;
  for (int stage = 0; stage < 8; ++stage, weight *= 10.0) {
    x = minimize_on_affine_set(Penalty{p, weight}, basis, x);
    x = project_to_resource_set(p, x);
  }
  if (!x.allFinite()) {
    throw NoConvergence("penalty homotopy diverged", 0);
  }
  OriginalSolution sol;
  sol.x_opt = x;
  sol.f_opt = eval_cost(p, x);
  sol.max_violation = max_violation(p, x);
  if (box && p.primal_size() <= kGridMaxPrimal) {
    sol.grid = grid_brute_force(p, *box);
  }
  return sol;
}

Vec finite_diff_gradient(const ValueFn& f, const Vec& point, double h) {
  Vec g(point.size());
  Vec x = point;
  for (int k = 0; k < point.size(); ++k) {
    const double step = h * (1.0 + std::abs(point(k)));
    x(k) = point(k) + step;
    const double up = f(x);
    x(k) = point(k) - step;
    const double down = f(x);
    x(k) = point(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

double finite_diff_check(const ValueFn& f, const GradFn& grad, const Vec& point,
                         double h) {
  Vec analytic = grad(point);
  Vec numeric = finite_diff_gradient(f, point, h);
  const double scale =
      std::max(1.0, analytic.size() > 0 ? analytic.cwiseAbs().maxCoeff() : 0.0);
  return analytic.size() > 0 ? (numeric - analytic).cwiseAbs().maxCoeff() / scale
                             : 0.0;
}

}  // namespace resalloc
