#include "etdgt/objective.hpp"

#include "etdgt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace etdgt {

namespace {

constexpr double kRootTol = 1e-12;
constexpr int kMaxRootIter = 200;

double exp_term(const CostModel& m, double w) { return std::exp((w + m.exp_e) / m.exp_f); }

// Solves F'(w) = price for the exponential kind; F' is strictly increasing.
double solve_stationary(const CostModel& m, double price) {
  auto g = [&](double w) { return cost_derivative(m, w) - price; };
  double left = m.lo - 1.0;
  double right = m.hi + 1.0;
  const double g_left = g(left);
  const double g_right = g(right);
  if (std::isnan(g_left) || std::isnan(g_right)) {
    throw RootFindFailure("local_argmin: derivative is not finite on the bracket");
  }
  if (g_left >= 0.0) return left;
  if (g_right <= 0.0) return right;

  double w = 0.5 * (left + right);
  for (int it = 0; it < kMaxRootIter; ++it) {
    const double gw = g(w);
    if (std::isnan(gw)) {
      throw RootFindFailure("local_argmin: derivative evaluated to NaN");
    }
    if (std::abs(gw) < kRootTol) return w;
    if (gw > 0.0) {
      right = w;
    } else {
      left = w;
    }
    if (right - left < kRootTol) return 0.5 * (left + right);
    const double newton = w - gw / cost_second_derivative(m, w);
    w = (newton > left && newton < right) ? newton : 0.5 * (left + right);
  }
  throw RootFindFailure("local_argmin: no convergence within " + std::to_string(kMaxRootIter) +
                        " iterations");
}

}  // namespace

void validate(const CostModel& m) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(finite(m.a) && finite(m.b) && finite(m.lo) && finite(m.hi))) {
    throw InvalidScenario("cost coefficients must be finite");
  }
  if (!(m.a > 0.0)) {
    throw InvalidScenario("strong convexity assumption violated: a must be > 0");
  }
  if (m.lo > m.hi) {
    throw InvalidScenario("box lower bound exceeds upper bound");
  }
  if (m.kind == CostKind::QuadraticExp) {
    if (!(finite(m.exp_d) && finite(m.exp_e) && finite(m.exp_f))) {
      throw InvalidScenario("exponential coefficients must be finite");
    }
    if (!(m.exp_f > 0.0)) throw InvalidScenario("exponential scale f must be > 0");
    if (m.exp_d < 0.0) throw InvalidScenario("exponential weight d must be >= 0");
  }
  if (m.demand.size() == 0 || !m.demand.allFinite()) {
    throw InvalidScenario("demand must be a non-empty finite vector");
  }
}

CostModel quadratic_cost(double a, double b, double lo, double hi, double demand) {
  CostModel m;
  m.kind = CostKind::Quadratic;
  m.a = a;
  m.b = b;
  m.lo = lo;
  m.hi = hi;
  m.demand = Eigen::VectorXd::Constant(1, demand);
  return m;
}

CostModel quadratic_exp_cost(double a, double b, double d, double e, double f, double lo,
                             double hi, double demand) {
  CostModel m = quadratic_cost(a, b, lo, hi, demand);
  m.kind = CostKind::QuadraticExp;
  m.exp_d = d;
  m.exp_e = e;
  m.exp_f = f;
  return m;
}

double eval_cost(const CostModel& m, double w) {
  double value = m.a * w * w + m.b * w;
  if (m.kind == CostKind::QuadraticExp) value += m.exp_d * exp_term(m, w);
  return value;
}

double cost_derivative(const CostModel& m, double w) {
  double value = 2.0 * m.a * w + m.b;
  if (m.kind == CostKind::QuadraticExp) value += m.exp_d / m.exp_f * exp_term(m, w);
  return value;
}

double cost_second_derivative(const CostModel& m, double w) {
  double value = 2.0 * m.a;
  if (m.kind == CostKind::QuadraticExp) {
    value += m.exp_d / (m.exp_f * m.exp_f) * exp_term(m, w);
  }
  return value;
}

double local_argmin(const CostModel& m, double price) {
  if (m.degenerate_box()) return m.lo;
  double w = 0.0;
  if (m.kind == CostKind::Quadratic) {
    w = (price - m.b) / (2.0 * m.a);
  } else {
    w = solve_stationary(m, price);
  }
  return std::clamp(w, m.lo, m.hi);
}

Eigen::VectorXd local_argmin(const CostModel& m, const Eigen::VectorXd& price) {
  Eigen::VectorXd w(price.size());
  for (Eigen::Index c = 0; c < price.size(); ++c) w(c) = local_argmin(m, price(c));
  return w;
}

Eigen::VectorXd dual_gradient(const CostModel& m, const Eigen::VectorXd& x) {
  return m.demand - local_argmin(m, Eigen::VectorXd(-x));
}

double dual_value(const CostModel& m, const Eigen::VectorXd& x) {
  double value = 0.0;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    const double w = local_argmin(m, -x(c));
    value += -(eval_cost(m, w) + x(c) * w) + x(c) * m.demand(c);
  }
  return value;
}

SmoothnessParams smoothness(std::span<const CostModel> costs) {
  SmoothnessParams p;
  double fallback = 0.0;
  for (const auto& m : costs) {
    fallback = std::max(fallback, 1.0 / (2.0 * m.a));
    if (m.degenerate_box()) continue;
    p.L = std::max(p.L, 1.0 / (2.0 * m.a));
    // Curvature is largest at the upper end of the box for both kinds.
    p.mu = std::max(p.mu, cost_second_derivative(m, m.hi));
  }
  if (p.L == 0.0) p.L = fallback;
  if (p.mu == 0.0) {
    for (const auto& m : costs) p.mu = std::max(p.mu, 2.0 * m.a);
  }
  return p;
}

}  // namespace etdgt
