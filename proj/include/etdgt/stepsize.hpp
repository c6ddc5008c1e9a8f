#pragma once

#include "etdgt/network.hpp"
#include "etdgt/objective.hpp"
#include "etdgt/trigger.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>

namespace etdgt {

struct BoundInputs {
  int n = 1;
  double L = 1.0;
  double sigma_R = 0.5;
  double sigma_C = 0.5;
  double delta_RC = 1.0;
  double delta_CR = 1.0;
  double delta_2R = 1.0;
  double delta_2C = 1.0;
  double pi_dot = 1.0;          // pi_C^T pi_R
  double beta = 1.0;            // P-L constant
  double grad_f_X0_norm = 1.0;  // sqrt(sum_i ||grad f_i(X_0)||^2)
  double lambda = 0.5;          // rho of the two-state system at probe_alpha
  double probe_alpha = 0.0;
  double Psi_lower = 0.0;       // |sigma_R - sigma_C|
  double e0 = 0.0;
  double S_e = 0.0;
  double E = 0.0;
  double s = 0.0;
  double z0_norm = 0.0;
  bool sigma_perturbed = false;
};

// Fraction of lemma5_bound at which the two-state spectral radius is
// evaluated when building inputs from a network.
inline constexpr double kProbeFraction = 0.5;
// Fraction of the theorem2_bound supremum at which the certificate is checked.
inline constexpr double kCertifyFraction = 0.99;

// Collects every quantity the bounds need from a validated network and cost
// set. sigma_C is nudged by 1e-6 when the contraction factors coincide.
BoundInputs make_bound_inputs(const NetworkModel& net, std::span<const CostModel> costs,
                              const TriggerSchedule& schedule);

// 2x2 system matrix of the consensus/tracking error recursion.
Eigen::Matrix2d lemma4_matrix(const BoundInputs& in, double alpha);
double lemma4_radius(const BoundInputs& in, double alpha);

double lemma5_bound(const BoundInputs& in);

struct Theorem1Report {
  std::array<double, 6> c{};
  std::array<double, 4> b{};
  double bracket = 0.0;    // the reciprocal's argument
  double alpha_eq15 = 0.0;  // pi_dot / bracket
  double alpha_max = 0.0;   // min with lemma5_bound
  double candidate_alpha = 0.0;
  double gamma = 0.0;       // at candidate_alpha
  double k0 = 0.0;          // at candidate_alpha, clipped at 0
};

// Throws LambdaNotContractive when in.lambda >= 1.
Theorem1Report theorem1_bound(const BoundInputs& in);
double theorem1_gamma(const Theorem1Report& report, double pi_dot, double alpha);

// 3x3 system matrix of the squared errors and optimality gap.
Eigen::Matrix3d lemma8_matrix(const BoundInputs& in, double alpha);
std::array<double, 13> lemma8_constants(const BoundInputs& in);
// I - lemma8_matrix(in, alpha) with the diagonal formed without cancellation.
Eigen::Matrix3d lemma8_gap_matrix(const BoundInputs& in, double alpha);

// Diagonal entries below lambda_star and det(lambda_star I - P) > 0.
bool lemma9_test(const Eigen::Matrix3d& P, double lambda_star = 1.0);

struct Theorem2Report {
  std::array<double, 13> d{};
  std::array<double, 8> h{};
  std::array<double, 5> terms{};
  double alpha_max = 0.0;  // supremum, the bound itself is strict
  double alpha = 0.0;      // kCertifyFraction * alpha_max
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
  double lambda = 0.0;     // eigensolve of P
  double det_I_minus_P = 0.0;
  bool certificate = false;
  Eigen::Vector3d nu = Eigen::Vector3d::Zero();
  double s_min = 0.0;      // sqrt(lambda)
  double E_min = 0.0;      // ||z0|| (s^2 - lambda) / h7 for the inputs' s
  bool admissible = false;
};

// Everything theorem2_bound computes, without throwing on a failed
// certificate.
Theorem2Report theorem2_report(const BoundInputs& in);
// Throws CertificateFailure when the determinant test rejects P at the
// certified step size.
Theorem2Report theorem2_bound(const BoundInputs& in);

bool trigger_admissible(const TriggerSchedule& schedule, double lambda, double h7,
                        double z0_norm);

}  // namespace etdgt
