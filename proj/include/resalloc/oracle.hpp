#pragma once

#include <functional>
#include <optional>

#include "resalloc/problem.hpp"

namespace resalloc {

// Residuals of the KKT system of the regularized saddle-point problem. The
// multiplier p of the resource constraint is eliminated in closed form.
struct KKTResidual {
  double stationarity = 0.0;     // min_p ||grad_x L + (1_N ⊗ I_n) p||
  double dual_feas = 0.0;        // ||max(0, grad_mu L)||
  double primal_feas = 0.0;      // ||sum_i x_i - x_tot||
  double complementarity = 0.0;  // max_q |mu_q * d L / d mu_q|
  double nonneg = 0.0;           // max(0, -min_q mu_q)

  double max() const;
};

// P v with P = I - (1/N)(1 1^T ⊗ I_n): removes the per-coordinate mean.
Vec project_consensus_complement(const Vec& v, int n, int nodes);
// The explicit (nN x nN) matrix P.
Mat affine_projector(int n, int nodes);

KKTResidual kkt_residual(const ProblemInstance& p, const Vec& x, const Vec& mu);

// ||z - Proj(z - Phi(z))|| over {sum x_i = x_tot} x R^m_+, the fixed-point
// residual of the saddle-point variational inequality.
double natural_residual(const ProblemInstance& p, const StackedPoint& z);

struct OracleOptions {
  double tol = 1e-10;
  int max_iter = 1'000'000;
  // Feasible starting point; defaults to the uniform split with mu = 0.
  std::optional<StackedPoint> start;
};

struct OracleSolution {
  Vec x_star;
  Vec mu_star;
  double f_star = 0.0;          // f(x*)
  double lagrangian_star = 0.0;  // L(x*, mu*)
  std::optional<Vec> x_opt;
  std::optional<double> f_opt;
  KKTResidual residual;
  double natural_residual = 0.0;
  int iterations = 0;

  StackedPoint point() const { return {x_star, mu_star}; }
};

// Regularized saddle point by projected extragradient with the affine
// projector P (not the weight matrix). The step starts at 1 and is halved
// whenever the local Lipschitz test fails, then stays fixed. Throws
// NoConvergence.
OracleSolution solve_regularized_centralized(const ProblemInstance& p,
                                             const OracleOptions& opts = {});

// Axis-aligned box over all nN coordinates.
struct GridBox {
  Vec lower;
  Vec upper;
};

struct GridResult {
  Vec x;
  double f = 0.0;
  double pitch = 0.0;
  long evaluations = 0;
};

inline constexpr int kGridMaxPrimal = 4;
inline constexpr int kPenaltyMaxPrimal = 16;

// Exhaustive feasible-grid search over the free coordinates x_1..x_{N-1}
// (x_N is determined by the resource constraint), refined around the best
// cell until the pitch reaches `pitch`. Throws TooLarge when nN > 4 and
// NoConvergence if no feasible grid point exists.
GridResult grid_brute_force(const ProblemInstance& p, const GridBox& box,
                            double pitch = 1e-4);

struct OriginalSolution {
  Vec x_opt;
  double f_opt = 0.0;
  double max_violation = 0.0;  // max_q max(0, g_q(x_opt))
  std::optional<GridResult> grid;
};

// Unregularized optimum for desk-scale instances (nN <= 16) by a
// quadratic-penalty homotopy: weight x10 per stage over 8 stages, each
// stage solved by damped Newton on the affine set. When a box is given and
// nN <= 4 the result is cross-checked against grid_brute_force.
OriginalSolution solve_original_small(const ProblemInstance& p,
                                      const std::optional<GridBox>& box = {},
                                      const std::optional<Vec>& start = {});

using ValueFn = std::function<double(const Vec&)>;
using GradFn = std::function<Vec(const Vec&)>;

// Central differences with per-coordinate step h * (1 + |x_k|).
Vec finite_diff_gradient(const ValueFn& f, const Vec& point, double h);

// ||fd - grad||_inf / max(1, ||grad||_inf).
double finite_diff_check(const ValueFn& f, const GradFn& grad, const Vec& point,
                         double h = 1e-6);

}  // namespace resalloc
