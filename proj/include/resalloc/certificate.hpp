#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resalloc/graph.hpp"
#include "resalloc/problem.hpp"
#include "resalloc/solver.hpp"

namespace resalloc {

enum class ConstantSource { analytic, estimated };

std::string to_string(ConstantSource s);

// Lipschitz constant of Phi(z) = (grad_x L, -grad_mu L) and where it came
// from. A verdict built on an estimate carries that caveat in its reasons.
struct LipschitzConstant {
  double value;
  ConstantSource source = ConstantSource::analytic;
};

struct Certificate {
  double phi = 0.0;    // strong monotonicity constant min(nu, epsilon)
  double f_phi = 0.0;  // Lipschitz constant of Phi
  ConstantSource f_phi_source = ConstantSource::analytic;
  double alpha = 0.0;
  double beta = 0.0;
  double c_const = 0.0;  // C (symmetric) or C' (non-symmetric)
  double kappa = 0.0;    // kappa or kappa'
  double rate = 0.0;     // 1 - 2 alpha kappa + alpha^2 C^2 F^2
  double alpha_bound = 0.0;  // 2 kappa / (C^2 F^2)
  bool symmetric_path = true;
  bool beta_condition = false;
  bool alpha_condition = false;
  bool certified = false;
  std::vector<std::string> reasons;
};

// Step-size certification. The symmetric path uses lambda_max(W); the
// non-symmetric path needs the matrix to form beta*W - I and throws
// MissingMatrix without it.
Certificate certify(const SpectralSummary& spectral,
                    const std::optional<Mat>& w_matrix, double phi,
                    LipschitzConstant f_phi, const StepSizes& s);

inline double strong_monotonicity(const ProblemInstance& p) {
  return std::min(p.nu(), p.epsilon());
}

// Largest singular value of (beta W - I_N) acting on the complement of the
// consensus direction, i.e. sigma_max(beta W - (I - 11^T/N)).
double consensus_gap_norm(const Mat& w, double beta);

// Largest beta in (0, 2/sigma_max(W)] with consensus_gap_norm < phi/f_phi,
// located by bisection to `tol`. Throws NoFeasibleBeta.
double max_beta_nonsymmetric(const Mat& w, double phi, double f_phi,
                             double tol = 1e-12);

struct LipschitzEstimate {
  double value;      // max sampled ratio times the safety factor
  double max_ratio;  // raw max ||Phi(a) - Phi(b)|| / ||a - b||
  int samples;
  std::uint64_t seed;
};

inline constexpr double kLipschitzSafety = 1.5;

// Samples pairs with each x_i in the ball of radius box_radius[i] and mu in
// [0, mu_radius]^m. Always labeled "estimated".
LipschitzEstimate estimate_lipschitz(const ProblemInstance& p,
                                     const std::vector<double>& box_radius,
                                     int samples, std::uint64_t seed,
                                     double mu_radius = 1.0);

// Phi(z) = (grad_x L, -grad_mu L).
Vec phi_map(const ProblemInstance& p, const StackedPoint& z);

// M_d_i * M_mu * sqrt(epsilon / (2 nu)) per constraint.
std::vector<double> violation_bound(const std::vector<double>& md,
                                    double m_mu, double nu, double epsilon);

// M_f * M_mu * sqrt(epsilon / (2 nu)) + (nu / 2) D^2.
double suboptimality_bound(double m_f, double m_mu, double d_const, double nu,
                           double epsilon);

// Maxima over a cloud of points, inflated by 10%.
struct EmpiricalConstants {
  std::vector<double> md;  // per constraint row: max ||grad g_q(x)||
  double m_mu = 0.0;       // max ||mu||
  double m_f = 0.0;        // max ||grad f(x)||
  double d = 0.0;          // max ||x||
};

inline constexpr double kEmpiricalInflation = 1.1;

EmpiricalConstants empirical_constants(const ProblemInstance& p,
                                       const std::vector<StackedPoint>& cloud);

}  // namespace resalloc
