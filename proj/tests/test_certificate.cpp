#include "doctest.h"
#include "resalloc/certificate.hpp"
#include "resalloc/errors.hpp"
#include "support.hpp"

using namespace resalloc;
using testing::Rng;

namespace {

SpectralSummary symmetric_spectrum(double lambda_max) {
  return {0.0, lambda_max, lambda_max, true};
}

}  // namespace

TEST_CASE("hand-computed certificate") {
  Certificate c = certify(symmetric_spectrum(2.0), std::nullopt, 0.01, {1.0},
                          StepSizes(0.01, 0.5));
  CHECK(c.c_const == 1.0);
  CHECK(c.kappa == doctest::Approx(0.01));
  CHECK(c.alpha_bound == doctest::Approx(0.02));
  CHECK(c.rate == doctest::Approx(0.9999).epsilon(1e-14));
  CHECK(c.certified);
  CHECK(c.symmetric_path);

  Certificate too_big = certify(symmetric_spectrum(2.0), std::nullopt, 0.01,
                                {1.0}, StepSizes(0.03, 0.5));
  CHECK_FALSE(too_big.certified);
  CHECK(too_big.beta_condition);
  CHECK_FALSE(too_big.alpha_condition);
}

TEST_CASE("the beta boundary is excluded") {
  // beta * lambda_max = 1 + phi / F exactly: kappa = 0.
  Certificate c = certify(symmetric_spectrum(1.0), std::nullopt, 0.5, {1.0},
                          StepSizes(0.01, 1.5));
  CHECK(c.kappa == doctest::Approx(0.0));
  CHECK_FALSE(c.certified);
}

TEST_CASE("estimated constants are labeled") {
  Certificate c = certify(symmetric_spectrum(2.0), std::nullopt, 0.01,
                          {1.0, ConstantSource::estimated}, StepSizes(0.01, 0.5));
  CHECK(c.f_phi_source == ConstantSource::estimated);
  CHECK(c.reasons.size() == 3);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(certify(symmetric_spectrum(2.0), std::nullopt, 0.0, {1.0},
                          StepSizes(0.1, 0.1)),
                  InvalidArgument);
  SpectralSummary ns{0.0, 3.0, 3.2, false};
  CHECK_THROWS_AS(certify(ns, std::nullopt, 0.1, {1.0}, StepSizes(0.1, 0.1)),
                  MissingMatrix);
}

TEST_CASE("property: rate arithmetic and certified implies contraction") {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const double phi = testing::uniform(rng, 1e-3, 1.0);
    const double f = phi * testing::uniform(rng, 1.0, 50.0);
    const double lmax = testing::uniform(rng, 0.1, 20.0);
    StepSizes s(testing::uniform(rng, 1e-4, 0.5), testing::uniform(rng, 1e-3, 2.0) / lmax);
    Certificate c = certify(symmetric_spectrum(lmax), std::nullopt, phi, {f}, s);
    const double expected = 1.0 - 2.0 * s.alpha * c.kappa +
                            s.alpha * s.alpha * c.c_const * c.c_const * f * f;
    CHECK(c.rate == doctest::Approx(expected).epsilon(1e-15));
    if (c.certified) {
      CHECK(c.kappa > 0.0);
      CHECK(c.rate < 1.0);
    }
  }
}

TEST_CASE("property: the sufficient pair always certifies") {
  // beta < 1/lambda_max and alpha < 2 phi / F^2.
  Rng rng(22);
  int counterexamples = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double phi = testing::uniform(rng, 1e-3, 1.0);
    const double f = phi * testing::uniform(rng, 1.0, 100.0);
    const double lmax = testing::uniform(rng, 0.1, 20.0);
    StepSizes s(testing::uniform(rng, 0.01, 0.999) * 2.0 * phi / (f * f),
                testing::uniform(rng, 0.01, 0.999) / lmax);
    Certificate c = certify(symmetric_spectrum(lmax), std::nullopt, phi, {f}, s);
    if (!c.certified) ++counterexamples;
  }
  CHECK(counterexamples == 0);
}

TEST_CASE("non-symmetric bisection matches the closed form on symmetric W") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = testing::random_connected_graph(rng, testing::uniform_int(rng, 3, 9));
    Mat l = laplacian_matrix(g);
    SpectralSummary s = spectral_summary(l);
    // Keep phi/F below the spectral spread so the interval is non-empty.
    const double ratio = testing::uniform(rng, 0.05, 0.95) *
                         std::min(1.0, (s.lambda_max - s.lambda2) /
                                           (s.lambda_max + s.lambda2) + 0.5);
    const double closed = (1.0 + ratio) / s.lambda_max;
    const double lower = (1.0 - ratio) / s.lambda2;
    if (lower >= closed) {
      CHECK_THROWS_AS(max_beta_nonsymmetric(l, ratio, 1.0), NoFeasibleBeta);
      continue;
    }
    CHECK(max_beta_nonsymmetric(l, ratio, 1.0) == doctest::Approx(closed).epsilon(1e-8));
  }
}

TEST_CASE("consensus gap norm on symmetric W") {
  Mat l = laplacian_matrix(seven_node_graph());
  // max(|beta lambda_2 - 1|, |beta lambda_max - 1|) with frozen eigenvalues.
  const double beta = 0.2;
  const double expected = std::max(std::abs(beta * 0.75302039628253281 - 1.0),
                                   std::abs(beta * 4.8793852415718177 - 1.0));
  CHECK(consensus_gap_norm(l, beta) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("no feasible beta when the spectrum is too spread") {
  Mat l = laplacian_matrix(seven_node_graph());
  CHECK_THROWS_AS(max_beta_nonsymmetric(l, 0.01, 1.0), NoFeasibleBeta);
}

TEST_CASE("sampled Lipschitz estimate is bounded by the exact constant") {
  Rng rng(24);
  Graph g = testing::random_connected_graph(rng, 4);
  testing::LinearQuadratic lq = testing::linear_quadratic_instance(rng, g, 2, 1.0, 0.1);
  const double exact = lq.lipschitz();
  LipschitzEstimate e = estimate_lipschitz(lq.p, std::vector<double>(4, 2.0), 500, 99);
  CHECK(e.max_ratio <= exact * (1.0 + 1e-12));
  CHECK(e.max_ratio > 0.1 * exact);
  CHECK(e.value == doctest::Approx(kLipschitzSafety * e.max_ratio));
  LipschitzEstimate again = estimate_lipschitz(lq.p, std::vector<double>(4, 2.0), 500, 99);
  CHECK(again.value == e.value);
  CHECK_THROWS_AS(estimate_lipschitz(lq.p, {1.0}, 10, 1), DimensionMismatch);
}

TEST_CASE("approximation bounds arithmetic") {
  std::vector<double> v = violation_bound({2.0, 0.5}, 3.0, 2.0, 0.04);
  // sqrt(0.04 / 4) = 0.1
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.15));
  CHECK(suboptimality_bound(1.0, 3.0, 2.0, 2.0, 0.04) == doctest::Approx(0.3 + 4.0));
  CHECK_THROWS_AS(violation_bound({1.0}, 1.0, 0.0, 0.1), InvalidArgument);
}
