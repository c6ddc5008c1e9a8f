#include "etdgt/stepsize.hpp"

#include "etdgt/engine.hpp"
#include "etdgt/errors.hpp"
#include "etdgt/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace etdgt {

namespace {

constexpr double kSigmaTieTol = 1e-9;
constexpr double kSigmaNudge = 1e-6;

double sq(double x) { return x * x; }

void require_psi(const BoundInputs& in) {
  if (!(in.Psi_lower > 0.0)) {
    throw std::invalid_argument("bound inputs need sigma_R != sigma_C (Psi_lower > 0)");
  }
}

// Diagonal d with diag(d)^-1 P diag(d) balanced (Osborne iteration). The
// system matrix mixes entries of order 1e7 and 1e-27, which defeats an
// unbalanced eigensolve.
Eigen::Vector3d balancing_scale(const Eigen::Matrix3d& P) {
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    for (int i = 0; i < 3; ++i) {
      double row = 0.0;
      double col = 0.0;
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        row += std::abs(P(i, j)) * d(j) / d(i);
        col += std::abs(P(j, i)) * d(i) / d(j);
      }
      if (row == 0.0 || col == 0.0) continue;
      const double f = std::sqrt(row / col);
      if (std::abs(f - 1.0) > 1e-3) {
        d(i) *= f;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

}  // namespace

BoundInputs make_bound_inputs(const NetworkModel& net, std::span<const CostModel> costs,
                              const TriggerSchedule& schedule) {
  BoundInputs in;
  in.n = net.size();
  const auto sp = smoothness(costs);
  in.L = sp.L;
  in.beta = static_cast<double>(in.n) / sp.mu;
  in.sigma_R = net.sigma_R;
  in.sigma_C = net.sigma_C;
  if (std::abs(in.sigma_R - in.sigma_C) < kSigmaTieTol) {
    in.sigma_C += kSigmaNudge;
    in.sigma_perturbed = true;
  }
  in.Psi_lower = std::abs(in.sigma_R - in.sigma_C);
  in.delta_RC = net.delta_RC;
  in.delta_CR = net.delta_CR;
  in.delta_2R = net.delta_2R;
  in.delta_2C = net.delta_2C;
  in.pi_dot = net.pi_dot();

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(costs.front().dim());
  double g2 = 0.0;
  for (const auto& c : costs) g2 += dual_gradient(c, x0).squaredNorm();
  in.grad_f_X0_norm = std::sqrt(g2);

  in.E = schedule.E;
  in.s = schedule.s;
  in.e0 = threshold_at(schedule, 0);
  in.S_e = threshold_sum(schedule);

  in.probe_alpha = kProbeFraction * lemma5_bound(in);
  in.lambda = lemma4_radius(in, in.probe_alpha);

  const auto oracle = solve_centralized(costs);
  const auto m0 = compute_metrics(init_state(net, costs), net, costs, &oracle);
  in.z0_norm = Eigen::Vector3d(sq(m0.consensus_error), sq(m0.tracking_error), m0.optimality_gap)
                   .norm();
  return in;
}

Eigen::Matrix2d lemma4_matrix(const BoundInputs& in, double alpha) {
  const double rn = std::sqrt(static_cast<double>(in.n));
  Eigen::Matrix2d P;
  P << in.sigma_R + alpha * rn * in.L, alpha * in.delta_RC,
      (2.0 + alpha * rn * in.L) * in.L * in.delta_CR, in.sigma_C + alpha * in.L;
  return P;
}

double lemma4_radius(const BoundInputs& in, double alpha) {
  const Eigen::Matrix2d P = lemma4_matrix(in, alpha);
  const double disc = sq(P(0, 0) - P(1, 1)) + 4.0 * P(0, 1) * P(1, 0);
  return 0.5 * (P(0, 0) + P(1, 1) + std::sqrt(disc));
}

double lemma5_bound(const BoundInputs& in) {
  const double rn = std::sqrt(static_cast<double>(in.n));
  const double first = (1.0 - in.sigma_R) * (1.0 - in.sigma_C) /
                       ((rn * in.L + rn + 3.0) * in.L * in.delta_RC * in.delta_CR);
  return std::min(first, 1.0 / in.delta_RC);
}

Theorem1Report theorem1_bound(const BoundInputs& in) {
  if (!(in.lambda < 1.0)) {
    throw LambdaNotContractive("spectral radius " + std::to_string(in.lambda) +
                               " of the two-state system is not below 1");
  }
  require_psi(in);
  const double rn = std::sqrt(static_cast<double>(in.n));
  const double psi = in.Psi_lower;
  const double L = in.L;
  const double p = in.pi_dot;
  const double g = in.grad_f_X0_norm;

  Theorem1Report r;
  auto& c = r.c;
  c[0] = g / psi;
  c[1] = 1.0 + L / psi;
  c[2] = (1.0 + in.sigma_R + (2.0 * L + 1.0 + in.sigma_C) / psi) * rn;
  c[3] = g;
  c[4] = L + (2.0 * L * in.delta_CR + L) / psi;
  c[5] = (1.0 + in.sigma_C + 2.0 * L + (1.0 - in.sigma_R) * (2.0 * L * in.delta_CR + L) / psi) * rn;

  auto& b = r.b;
  b[0] = L * rn * p * in.delta_2R;
  b[1] = in.delta_2C;
  b[2] = 3.0 * L * sq(in.delta_2C);
  b[3] = 3.0 * L * L * L * in.n * sq(p) * sq(in.delta_2R);

  const double gap = 1.0 - in.lambda;
  r.bracket = 1.5 * L * sq(p) + (c[1] * b[0] + c[4] * b[1] + c[0] * b[0] + c[3] * b[1]) / gap +
              (sq(c[1]) * b[2] + sq(c[4]) * b[3]) / sq(gap) + (c[2] * b[0] + c[5] * b[1]) / 2.0;
  r.alpha_eq15 = p / r.bracket;
  r.alpha_max = std::min(r.alpha_eq15, lemma5_bound(in));
  r.candidate_alpha = 0.5 * r.alpha_max;
  r.gamma = theorem1_gamma(r, p, r.candidate_alpha);
  if (in.lambda > 0.0) {
    r.k0 = std::max(0.0, (std::log(r.candidate_alpha) - std::log(gap)) / std::log(in.lambda));
  }
  return r;
}

double theorem1_gamma(const Theorem1Report& report, double pi_dot, double alpha) {
  return alpha * pi_dot - alpha * alpha * report.bracket;
}

std::array<double, 13> lemma8_constants(const BoundInputs& in) {
  const double n = static_cast<double>(in.n);
  const double L = in.L;
  const double p2 = sq(in.pi_dot);
  const double sR2 = sq(in.sigma_R);
  const double sC2 = sq(in.sigma_C);
  const double ratio_C = (1.0 + sC2) / (1.0 - sC2);
  std::array<double, 13> d{};
  d[0] = 4.0 * n * L * L;
  d[1] = 2.0 * (3.0 - sR2) / (1.0 - sR2) * sq(in.delta_RC);
  d[2] = 8.0 * n * L;
  d[3] = 32.0 * ratio_C * L * L * sq(in.delta_CR);
  d[4] = 16.0 * ratio_C * n * std::pow(L, 4) * sq(in.delta_CR);
  d[5] = 8.0 * ratio_C * L * L;
  d[6] = 32.0 * ratio_C * n * std::pow(L, 3);
  d[7] = 0.5 * L * L * n * p2 * sq(in.delta_2R);
  d[8] = 1.5 * std::pow(L, 3) * n * p2 * sq(in.delta_2R);
  d[9] = 0.5 * sq(in.delta_2C);
  d[10] = 1.5 * L * sq(in.delta_2C);
  d[11] = 2.0 * in.beta * in.pi_dot;
  d[12] = 2.0 * L + 3.0 * p2 * L * L;
  return d;
}

Eigen::Matrix3d lemma8_matrix(const BoundInputs& in, double alpha) {
  const auto d = lemma8_constants(in);
  const double a2 = alpha * alpha;
  const double sR2 = sq(in.sigma_R);
  const double sC2 = sq(in.sigma_C);
  Eigen::Matrix3d P;
  P << (3.0 * sR2 - sR2 * sR2) / (1.0 + sR2) + d[0] * a2, d[1] * a2, d[2] * a2,
      d[3] + d[4] * a2, (1.0 + sC2) / 2.0 + d[5] * a2, d[6] * a2,
      d[7] + d[8] * a2, d[9] + d[10] * a2, 1.0 - d[11] * alpha + d[12] * a2;
  return P;
}

Eigen::Matrix3d lemma8_gap_matrix(const BoundInputs& in, double alpha) {
  const auto d = lemma8_constants(in);
  const double a2 = alpha * alpha;
  const double sR2 = sq(in.sigma_R);
  const double sC2 = sq(in.sigma_C);
  Eigen::Matrix3d M = -lemma8_matrix(in, alpha);
  M(0, 0) = sq(1.0 - sR2) / (1.0 + sR2) - d[0] * a2;
  M(1, 1) = (1.0 - sC2) / 2.0 - d[5] * a2;
  M(2, 2) = d[11] * alpha - d[12] * a2;
  return M;
}

bool lemma9_test(const Eigen::Matrix3d& P, double lambda_star) {
  for (int i = 0; i < 3; ++i) {
    if (!(P(i, i) < lambda_star)) return false;
  }
  return (lambda_star * Eigen::Matrix3d::Identity() - P).determinant() > 0.0;
}

Theorem2Report theorem2_report(const BoundInputs& in) {
  if (!(in.beta > 0.0)) throw std::invalid_argument("theorem2_bound needs beta > 0");
  const double n = static_cast<double>(in.n);
  const double L = in.L;
  const double p = in.pi_dot;
  const double sR2 = sq(in.sigma_R);
  const double sC2 = sq(in.sigma_C);

  Theorem2Report r;
  r.d = lemma8_constants(in);
  const auto& d = r.d;
  auto D = [&d](int i) { return d[static_cast<std::size_t>(i - 1)]; };

  const double gR = sq(1.0 - sR2) / (1.0 + sR2);
  const double shared = sq(1.0 - sR2) * (1.0 - sC2) / (16.0 * (1.0 + sR2));
  auto& h = r.h;
  h[0] = shared * D(12);
  h[1] = shared * D(13) + D(3) * D(4) * D(10) + (1.0 - sC2) / 2.0 * D(3) * D(8) +
         gR * D(7) * D(10);
  h[2] = D(2) * D(4) * D(12);
  h[3] = D(2) * D(7) * D(8) + D(3) * D(5) * D(10) + D(3) * D(4) * D(11) +
         (1.0 - sC2) / 2.0 * D(3) * D(9) + gR * D(7) * D(11) + D(2) * D(5) * D(12);
  h[4] = D(2) * D(5) * D(13);
  h[5] = D(2) * D(7) * D(9) + D(3) * D(5) * D(11);
  h[6] = ((3.0 + sR2) / (1.0 + sR2) * sq(1.0 + in.sigma_R) +
          2.0 * (1.0 + sC2) / (1.0 - sC2) *
              (sq(1.0 + in.sigma_C) + 4.0 * sq(1.0 + in.sigma_R) * sq(in.delta_CR) * L * L)) *
         n;

  const double H = h[2] + h[3] + h[4] + h[5];
  r.terms[0] = 1.0 / D(12);
  r.terms[1] = (1.0 - sR2) / (4.0 * std::sqrt(n) * L * std::sqrt(1.0 + sR2));
  r.terms[2] = (1.0 - sC2) / (4.0 * std::sqrt(2.0) * L * std::sqrt(1.0 + sC2));
  r.terms[3] = 2.0 * in.beta * p / (2.0 * L + 3.0 * L * L * p * p);
  // Positive root of h1 a - h2 a^2 - H a^3, in cancellation-free form.
  r.terms[4] = 2.0 * h[0] / (h[1] + std::sqrt(h[1] * h[1] + 4.0 * h[0] * H));
  r.alpha_max = *std::min_element(r.terms.begin(), r.terms.end());
  r.alpha = kCertifyFraction * r.alpha_max;

  r.P = lemma8_matrix(in, r.alpha);
  // Work with I - P formed directly: its last diagonal entry is O(alpha) and
  // would be lost to cancellation in 1 - P(2,2). A diagonal similarity then
  // tames entries spanning some 30 orders of magnitude.
  const Eigen::Matrix3d gap = lemma8_gap_matrix(in, r.alpha);
  const Eigen::Vector3d scale = balancing_scale(r.P);
  const Eigen::Matrix3d M = scale.cwiseInverse().asDiagonal() * gap * scale.asDiagonal();
  r.det_I_minus_P = M.determinant();
  r.certificate = (M.diagonal().array() > 0.0).all() && r.det_I_minus_P > 0.0;

  // Eigenvalues of P are 1 - mu; the Perron root has the smallest real mu.
  Eigen::EigenSolver<Eigen::Matrix3d> es(M);
  const auto& mu = es.eigenvalues();
  Eigen::Index perron = 0;
  for (Eigen::Index i = 1; i < 3; ++i) {
    if (mu(i).real() < mu(perron).real()) perron = i;
  }
  r.lambda = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) r.lambda = std::max(r.lambda, std::abs(1.0 - mu(i)));
  r.nu = scale.cwiseProduct(es.eigenvectors().col(perron).real()).cwiseAbs();
  r.nu /= r.nu.sum();
  h[7] = std::sqrt(3.0) * r.nu.maxCoeff() / r.nu.minCoeff();

  if (r.certificate) {
    r.s_min = std::sqrt(r.lambda);
    r.E_min = in.z0_norm * (in.s * in.s - r.lambda) / h[6];
    r.admissible = trigger_admissible(TriggerSchedule{in.E, in.s}, r.lambda, h[6], in.z0_norm);
  }
  return r;
}

Theorem2Report theorem2_bound(const BoundInputs& in) {
  Theorem2Report r = theorem2_report(in);
  if (!r.certificate) {
    throw CertificateFailure("determinant test rejects the three-state system at alpha=" +
                             std::to_string(r.alpha) +
                             ", det(I-P)=" + std::to_string(r.det_I_minus_P));
  }
  return r;
}

bool trigger_admissible(const TriggerSchedule& schedule, double lambda, double h7,
                        double z0_norm) {
  if (!(lambda > 0.0 && lambda < 1.0)) return false;
  const double s2 = schedule.s * schedule.s;
  if (!(s2 > lambda && schedule.s < 1.0)) return false;
  return schedule.E >= z0_norm * (s2 - lambda) / h7;
}

}  // namespace etdgt
