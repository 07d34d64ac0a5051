#include "resalloc/certificate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

std::string to_string(ConstantSource s) {
  return s == ConstantSource::analytic ? "analytic" : "estimated";
}

double consensus_gap_norm(const Mat& w, double beta) {
  const auto n = w.rows();
  Mat m = beta * w - Mat::Identity(n, n) + Mat::Constant(n, n, 1.0 / n);
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Certificate certify(const SpectralSummary& spectral,
                    const std::optional<Mat>& w_matrix, double phi,
                    LipschitzConstant f_phi, const StepSizes& s) {
  if (!(phi > 0.0) || !(f_phi.value > 0.0)) {
    throw InvalidArgument("certify needs phi > 0 and F_Phi > 0");
  }
  Certificate c;
  c.phi = phi;
  c.f_phi = f_phi.value;
  c.f_phi_source = f_phi.source;
  c.alpha = s.alpha;
  c.beta = s.beta;
  c.symmetric_path = spectral.symmetric;
  const double f = f_phi.value;

  std::ostringstream why;
  if (c.symmetric_path) {
    const double bl = s.beta * spectral.lambda_max;
    c.c_const = std::max(bl, 1.0);
    c.kappa = phi - f * (bl - 1.0);
    c.beta_condition = bl < 1.0 + phi / f;
    why << "beta*lambda_max(W) = " << bl << (c.beta_condition ? " < " : " >= ")
        << "1 + phi/F_Phi = " << 1.0 + phi / f;
  } else {
    if (!w_matrix) {
      throw MissingMatrix(
          "non-symmetric certification needs the weight matrix itself");
    }
    const double gap = consensus_gap_norm(*w_matrix, s.beta);
    c.c_const = std::max(s.beta * spectral.sigma_max, 1.0);
    c.kappa = phi - f * gap;
    c.beta_condition = gap < phi / f;
    why << "sigma_max(beta*W - I) = " << gap
        << (c.beta_condition ? " < " : " >= ") << "phi/F_Phi = " << phi / f;
  }
  c.reasons.push_back(why.str());

  c.alpha_bound = 2.0 * c.kappa / (c.c_const * c.c_const * f * f);
  c.alpha_condition = c.kappa > 0.0 && s.alpha < c.alpha_bound;
  std::ostringstream why_alpha;
  if (c.kappa > 0.0) {
    why_alpha << "alpha = " << s.alpha
              << (c.alpha_condition ? " < " : " >= ")
              << "2*kappa/(C^2 F_Phi^2) = " << c.alpha_bound;
  } else {
    why_alpha << "kappa = " << c.kappa << " is not positive";
  }
  c.reasons.push_back(why_alpha.str());

  c.rate = 1.0 - 2.0 * s.alpha * c.kappa +
           s.alpha * s.alpha * c.c_const * c.c_const * f * f;
  c.certified = c.beta_condition && c.alpha_condition;
  if (f_phi.source == ConstantSource::estimated) {
    c.reasons.push_back(
        "F_Phi is a sampled estimate, not a proven bound");
  }
  return c;
}

double max_beta_nonsymmetric(const Mat& w, double phi, double f_phi,
                             double tol) {
  if (!(phi > 0.0) || !(f_phi > 0.0) || !(tol > 0.0)) {
    throw InvalidArgument("max_beta_nonsymmetric needs phi, F_Phi, tol > 0");
  }
  const double target = phi / f_phi;
  Eigen::JacobiSVD<Mat> svd(w);
  const double beta_hi = 2.0 / svd.singularValues()(0);
  auto gap = [&](double b) { return consensus_gap_norm(w, b); };

  // The gap is convex in beta; golden-section search for its minimizer.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = beta_hi;
  double c1 = b - inv_phi * (b - a), c2 = a + inv_phi * (b - a);
  double g1 = gap(c1), g2 = gap(c2);
  while (b - a > tol) {
    if (g1 <= g2) {
      b = c2;
      c2 = c1;
      g2 = g1;
      c1 = b - inv_phi * (b - a);
      g1 = gap(c1);
    } else {
      a = c1;
      c1 = c2;
      g1 = g2;
      c2 = a + inv_phi * (b - a);
      g2 = gap(c2);
    }
  }
  const double beta_min = 0.5 * (a + b);
  const double gap_min = gap(beta_min);
  if (!(gap_min < target)) {
    std::ostringstream os;
    os << "no beta satisfies sigma_max(beta*W - I) < " << target
       << " (minimum " << gap_min << " at beta = " << beta_min << ")";
    throw NoFeasibleBeta(os.str());
  }
  if (gap(beta_hi) < target) return beta_hi;
  double lo = beta_min, hi = beta_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < target ? lo : hi) = mid;
  }
  return lo;
}

Vec phi_map(const ProblemInstance& p, const StackedPoint& z) {
  Vec out(z.x.size() + z.mu.size());
  out << grad_x(p, z), -grad_mu(p, z);
  return out;
}

LipschitzEstimate estimate_lipschitz(const ProblemInstance& p,
                                     const std::vector<double>& box_radius,
                                     int samples, std::uint64_t seed,
                                     double mu_radius) {
  if (samples < 2) throw InvalidArgument("need at least two samples");
  if (static_cast<int>(box_radius.size()) != p.node_count()) {
    throw DimensionMismatch("need one box radius per node");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = p.dim();

  auto draw = [&]() {
    StackedPoint z{Vec(p.primal_size()), Vec(p.constraint_count())};
    for (int i = 0; i < p.node_count(); ++i) {
      Vec dir(n);
      for (int k = 0; k < n; ++k) dir(k) = normal(rng);
      const double norm = dir.norm();
      const double radius = box_radius[i] * std::pow(unit(rng), 1.0 / n);
      z.x.segment(i * n, n) = norm > 0.0 ? Vec(dir * (radius / norm)) : Vec(dir);
    }
    for (int q = 0; q < z.mu.size(); ++q) z.mu(q) = mu_radius * unit(rng);
    return z;
  };

  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    StackedPoint a = draw();
    StackedPoint b = draw();
    const double dist = (a.stacked() - b.stacked()).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (phi_map(p, a) - phi_map(p, b)).norm() / dist);
  }
  return {kLipschitzSafety * best, best, samples, seed};
}

std::vector<double> violation_bound(const std::vector<double>& md,
                                    double m_mu, double nu, double epsilon) {
  if (!(nu > 0.0) || !(epsilon > 0.0) || m_mu < 0.0) {
    throw InvalidArgument("violation_bound needs nu, epsilon > 0, M_mu >= 0");
  }
  const double root = std::sqrt(epsilon / (2.0 * nu));
  std::vector<double> out;
  out.reserve(md.size());
  for (double d : md) {
    if (d < 0.0) throw InvalidArgument("gradient bounds must be nonnegative");
    out.push_back(d * m_mu * root);
  }
  return out;
}

double suboptimality_bound(double m_f, double m_mu, double d_const, double nu,
                           double epsilon) {
  if (!(nu > 0.0) || !(epsilon > 0.0) || m_f < 0.0 || m_mu < 0.0 ||
      d_const < 0.0) {
    throw InvalidArgument("suboptimality_bound needs positive inputs");
  }
  return m_f * m_mu * std::sqrt(epsilon / (2.0 * nu)) +
         0.5 * nu * d_const * d_const;
}

EmpiricalConstants empirical_constants(const ProblemInstance& p,
                                       const std::vector<StackedPoint>& cloud) {
  EmpiricalConstants c;
  c.md.assign(p.constraint_count(), 0.0);
  for (const StackedPoint& z : cloud) {
    check_point(p, z);
    for (int q = 0; q < p.constraint_count(); ++q) {
      c.md[q] = std::max(c.md[q], constraint_gradient(p, q, z.x).norm());
    }
    c.m_mu = std::max(c.m_mu, z.mu.norm());
    c.m_f = std::max(c.m_f, cost_gradient(p, z.x).norm());
    c.d = std::max(c.d, z.x.norm());
  }
  for (double& v : c.md) v *= kEmpiricalInflation;
  c.m_mu *= kEmpiricalInflation;
  c.m_f *= kEmpiricalInflation;
  c.d *= kEmpiricalInflation;
  return c;
}

}  // namespace resalloc
