#include "etdgt/oracle.hpp"

#include "etdgt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace etdgt {

namespace {

constexpr double kGapTol = 1e-10;
constexpr double kWidthTol = 1e-13;
constexpr int kMaxExpansions = 200;
constexpr int kMaxBisections = 400;

double aggregate_response(std::span<const CostModel> costs, double x) {
  double total = 0.0;
  for (const auto& m : costs) total += local_argmin(m, -x);
  return total;
}

// Multiplier balancing component `c`.
double balance_multiplier(std::span<const CostModel> costs, Eigen::Index c) {
  double target = 0.0;
  double cap_lo = 0.0;
  double cap_hi = 0.0;
  double max_marginal = -std::numeric_limits<double>::infinity();
  double min_linear = std::numeric_limits<double>::infinity();
  for (const auto& m : costs) {
    target += m.demand(c);
    cap_lo += m.lo;
    cap_hi += m.hi;
    max_marginal = std::max(max_marginal, m.b + 2.0 * m.a * m.hi);
    min_linear = std::min(min_linear, m.b);
  }
  if (cap_hi < target || cap_lo > target) {
    throw Infeasible("total demand " + std::to_string(target) + " outside capacity range [" +
                     std::to_string(cap_lo) + ", " + std::to_string(cap_hi) + "]");
  }

  double lo = -max_marginal - 1.0;
  double hi = -min_linear + 1.0;
  double r_lo = aggregate_response(costs, lo);
  double r_hi = aggregate_response(costs, hi);
  for (int i = 0; i < kMaxExpansions && r_lo < target; ++i) {
    lo -= 2.0 * (hi - lo);
    r_lo = aggregate_response(costs, lo);
  }
  for (int i = 0; i < kMaxExpansions && r_hi > target; ++i) {
    hi += 2.0 * (hi - lo);
    r_hi = aggregate_response(costs, hi);
  }
  if (r_lo < target || r_hi > target) {
    throw SolverError("oracle: could not bracket the balancing multiplier");
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisections; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = aggregate_response(costs, mid);
    if (r > r_lo || r < r_hi) {
      throw SolverError("oracle: aggregate response is not monotone in the multiplier");
    }
    if (std::abs(r - target) < kGapTol) break;
    if (r > target) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
      r_hi = r;
    }
    if (hi - lo < kWidthTol) {
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  return mid;
}

}  // namespace

OracleSolution solve_centralized(std::span<const CostModel> costs) {
  if (costs.empty()) throw InvalidScenario("oracle: no agents");
  const Eigen::Index m = costs.front().demand.size();
  for (const auto& c : costs) {
    validate(c);
    if (c.demand.size() != m) throw InvalidScenario("oracle: mixed resource dimensions");
  }

  const auto n = static_cast<Eigen::Index>(costs.size());
  OracleSolution sol;
  sol.W_star.resize(n, m);
  sol.x_star.resize(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    sol.x_star(c) = balance_multiplier(costs, c);
    for (Eigen::Index i = 0; i < n; ++i) {
      sol.W_star(i, c) = local_argmin(costs[static_cast<std::size_t>(i)], -sol.x_star(c));
    }
  }
  sol.f_star = 0.0;
  for (const auto& c : costs) sol.f_star += dual_value(c, sol.x_star);

  const auto report = kkt_check(costs, sol);
  sol.kkt_residual = report.stationarity;
  sol.balance_residual = report.balance;
  return sol;
}

KktReport kkt_check(std::span<const CostModel> costs, const OracleSolution& solution) {
  const auto n = static_cast<Eigen::Index>(costs.size());
  if (solution.W_star.rows() != n || solution.W_star.cols() != solution.x_star.size()) {
    throw std::invalid_argument("kkt_check: solution dimensions do not match the agents");
  }
  KktReport report;
  report.status.reserve(costs.size());
  for (Eigen::Index c = 0; c < solution.x_star.size(); ++c) {
    double supply = 0.0;
    double demand = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& model = costs[static_cast<std::size_t>(i)];
      const double w = solution.W_star(i, c);
      supply += w;
      demand += model.demand(c);

      const double tol = 1e-9 * (1.0 + std::max(std::abs(model.lo), std::abs(model.hi)));
      const double residual = cost_derivative(model, w) + solution.x_star(c);
      BoundState state = BoundState::Interior;
      double violation = 0.0;
      if (model.degenerate_box()) {
        state = BoundState::Fixed;
        violation = std::abs(w - model.lo);
      } else if (w <= model.lo + tol) {
        state = BoundState::AtLower;
        violation = std::max(0.0, -residual) + std::max(0.0, model.lo - w);
      } else if (w >= model.hi - tol) {
        state = BoundState::AtUpper;
        violation = std::max(0.0, residual) + std::max(0.0, w - model.hi);
      } else {
        violation = std::abs(residual);
      }
      report.stationarity = std::max(report.stationarity, violation);
      if (c == 0) report.status.push_back(state);
    }
    report.balance = std::max(report.balance, std::abs(supply - demand));
  }
  return report;
}

}  // namespace etdgt
