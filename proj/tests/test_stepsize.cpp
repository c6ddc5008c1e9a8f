#include "etdgt/errors.hpp"
#include "etdgt/stepsize.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace etdgt;

namespace {

BoundInputs case1_inputs() {
  const auto sc = fixture::case1();
  return make_bound_inputs(validate_scenario(sc), sc.agents, sc.schedule);
}

double eig_radius(const Eigen::MatrixXd& P) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(P).eigenvalues().cwiseAbs().maxCoeff();
}

// Radius of the three-state system at the report's step size, rebuilt in
// long double.
long double system_radius(const BoundInputs& in, const Theorem2Report& r) {
  return fixture::scaled_radius(fixture::system_matrix_ld(in, r.d, r.alpha));
}

}  // namespace

TEST(BoundInputs, Case1) {
  const auto in = case1_inputs();
  EXPECT_EQ(in.n, 14);
  // Cheapest curvature a = 0.03 gives L = 1/(2a); the stiffest a = 0.04
  // gives mu = 2a and beta = n/mu.
  EXPECT_NEAR(in.L, 1.0 / 0.06, 1e-12);
  EXPECT_NEAR(in.beta, 14.0 / 0.08, 1e-9);
  EXPECT_FALSE(in.sigma_perturbed);
  EXPECT_GT(in.Psi_lower, 0.0);
  EXPECT_NEAR(in.e0, 0.35, 1e-15);
  EXPECT_NEAR(in.S_e, 0.35 / 0.09, 1e-12);
  EXPECT_GT(in.lambda, 0.0);
  EXPECT_LT(in.lambda, 1.0);
  EXPECT_NEAR(in.lambda, eig_radius(lemma4_matrix(in, in.probe_alpha)), 1e-12);
}

TEST(Lemma5, SingleAgentLimit) {
  BoundInputs in;
  in.n = 1;
  in.L = 2.0;
  in.sigma_R = 1e-12;
  in.sigma_C = 2e-12;
  EXPECT_NEAR(lemma5_bound(in), 1.0 / 12.0, 1e-10);
  in.L = 0.1;
  EXPECT_NEAR(lemma5_bound(in), 1.0, 1e-10);
}

TEST(Lemma5, MatchesClosedForm) {
  const auto in = case1_inputs();
  const double rn = std::sqrt(14.0);
  const double first = (1 - in.sigma_R) * (1 - in.sigma_C) /
                       ((rn * in.L + rn + 3) * in.L * in.delta_RC * in.delta_CR);
  EXPECT_DOUBLE_EQ(lemma5_bound(in), std::min(first, 1.0 / in.delta_RC));
  auto stiffer = in;
  stiffer.L *= 10.0;
  EXPECT_LT(lemma5_bound(stiffer), lemma5_bound(in));
}

TEST(Theorem1, Case1) {
  const auto in = case1_inputs();
  const auto r = theorem1_bound(in);
  EXPECT_GT(r.alpha_max, 0.0);
  EXPECT_LE(r.alpha_max, lemma5_bound(in));
  EXPECT_GT(r.gamma, 0.0);
  EXPECT_GE(r.k0, 0.0);
  for (double c : r.c) EXPECT_GT(c, 0.0);
  for (double b : r.b) EXPECT_GT(b, 0.0);
}

TEST(Theorem1, GammaPositiveBelowBound) {
  const auto in = case1_inputs();
  const auto r = theorem1_bound(in);
  for (double f : {1e-6, 0.1, 0.5, 0.9, 0.999}) {
    EXPECT_GT(theorem1_gamma(r, in.pi_dot, f * r.alpha_eq15), 0.0) << f;
  }
  EXPECT_LE(theorem1_gamma(r, in.pi_dot, 1.001 * r.alpha_eq15), 0.0);
}

TEST(Theorem1, LargerInitialGradientDoesNotHelp) {
  auto in = case1_inputs();
  const double base = theorem1_bound(in).alpha_eq15;
  in.grad_f_X0_norm *= 2.0;
  EXPECT_LE(theorem1_bound(in).alpha_eq15, base);
}

TEST(Theorem1, Preconditions) {
  auto in = case1_inputs();
  in.lambda = 1.0;
  EXPECT_THROW(theorem1_bound(in), LambdaNotContractive);
  in.lambda = 0.5;
  in.Psi_lower = 0.0;
  EXPECT_THROW(theorem1_bound(in), std::invalid_argument);
}

TEST(Theorem2, Case1Certificate) {
  const auto in = case1_inputs();
  const auto r = theorem2_bound(in);
  EXPECT_GT(r.alpha_max, 0.0);
  EXPECT_TRUE(r.certificate);
  const long double rho = system_radius(in, r);
  EXPECT_LT(rho, 1.0L);
  EXPECT_GT(r.det_I_minus_P, 0.0);
  EXPECT_NEAR(r.lambda, static_cast<double>(rho), 1e-12);
  for (double d : r.d) EXPECT_GT(d, 0.0);
  for (double h : r.h) EXPECT_GT(h, 0.0);
  // Perron vector of the nonnegative system matrix.
  const auto P = fixture::system_matrix_ld(in, r.d, r.alpha);
  const Eigen::Matrix<long double, 3, 1> nu = r.nu.cast<long double>();
  const Eigen::Matrix<long double, 3, 1> Pnu = P * nu;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(static_cast<double>(Pnu(i) / nu(i)), 1.0, 1e-9) << i;
  EXPECT_NEAR(r.s_min, std::sqrt(r.lambda), 1e-15);
}

TEST(Theorem2, FirstTermExample) {
  BoundInputs in;
  in.beta = 1.0;
  in.pi_dot = 0.07;
  const auto d = lemma8_constants(in);
  EXPECT_NEAR(d[11], 0.14, 1e-15);
  EXPECT_NEAR(1.0 / d[11], 7.142857142857, 1e-9);
}

TEST(Theorem2, VanishingPlConstant) {
  auto in = case1_inputs();
  in.beta = 1e-12;
  EXPECT_LT(theorem2_report(in).alpha_max, 1e-9);
  in.beta = 0.0;
  EXPECT_THROW(theorem2_bound(in), std::invalid_argument);
}

TEST(Lemma9, AgreesWithEigensolveOnRandomInputs) {
  std::mt19937 rng(1234);
  int certified = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = fixture::random_bound_inputs(rng);
    const auto r = theorem2_report(in);
    EXPECT_EQ(r.certificate, system_radius(in, r) < 1.0L) << trial;
    certified += r.certificate ? 1 : 0;
  }
  // The supremum is built to make the test pass just below it.
  EXPECT_EQ(certified, 100);
}

TEST(Lemma9, DetectsUnstableMatrices) {
  Eigen::Matrix3d P;
  P << 0.5, 0.2, 0.1, 0.1, 0.6, 0.1, 0.1, 0.1, 0.7;
  EXPECT_TRUE(lemma9_test(P));
  EXPECT_LT(fixture::scaled_radius(P), 1.0L);
  P(0, 1) = 0.6;
  P(1, 0) = 0.6;
  EXPECT_FALSE(lemma9_test(P));
  EXPECT_GE(fixture::scaled_radius(P), 1.0L);
  P.setZero();
  P(2, 2) = 1.0;
  EXPECT_FALSE(lemma9_test(P));
}

TEST(Bounds, MonotoneInLAndN) {
  const auto base = case1_inputs();
  double prev5 = INFINITY;
  double prev1 = INFINITY;
  double prev2 = INFINITY;
  for (int i = 0; i < 10; ++i) {
    auto in = base;
    in.L = base.L * std::pow(1.5, i);
    const double b5 = lemma5_bound(in);
    const double b1 = theorem1_bound(in).alpha_max;
    const double b2 = theorem2_bound(in).alpha_max;
    EXPECT_LE(b5, prev5);
    EXPECT_LE(b1, prev1);
    EXPECT_LE(b2, prev2);
    prev5 = b5;
    prev1 = b1;
    prev2 = b2;
  }
  prev5 = prev1 = prev2 = INFINITY;
  for (int n : {2, 4, 8, 14, 30, 60, 118, 300}) {
    auto in = base;
    in.n = n;
    const double b5 = lemma5_bound(in);
    const double b1 = theorem1_bound(in).alpha_max;
    const double b2 = theorem2_bound(in).alpha_max;
    EXPECT_LE(b5, prev5);
    EXPECT_LE(b1, prev1);
    EXPECT_LE(b2, prev2);
    prev5 = b5;
    prev1 = b1;
    prev2 = b2;
  }
}

TEST(TriggerAdmissible, Cases) {
  EXPECT_TRUE(trigger_admissible({1e30, 1.0 - 1e-9}, 0.5, 1.0, 1.0));
  EXPECT_FALSE(trigger_admissible({1e30, 0.5}, 0.25, 1.0, 1.0));
  EXPECT_FALSE(trigger_admissible({1e30, 0.4}, 0.25, 1.0, 1.0));
  EXPECT_TRUE(trigger_admissible({0.11, 0.6}, 0.25, 1.0, 1.0));
  EXPECT_FALSE(trigger_admissible({0.10, 0.6}, 0.25, 1.0, 1.0));
  EXPECT_FALSE(trigger_admissible({1.0, 0.9}, 1.0, 1.0, 1.0));
  EXPECT_FALSE(trigger_admissible({1.0, 0.9}, 0.0, 1.0, 1.0));
}
