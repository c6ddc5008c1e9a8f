#pragma once

#include "etdgt/objective.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace etdgt {

// Centralized optimum of the allocation problem.
struct OracleSolution {
  Eigen::MatrixXd W_star;  // n x m
  Eigen::VectorXd x_star;  // optimal multiplier, one per component
  double f_star = 0.0;     // optimal dual value, equal to -sum F_i(W_star)
  double kkt_residual = 0.0;
  double balance_residual = 0.0;
};

// Bisection on the scalar multiplier of each component until the aggregate
// box-clipped response meets total demand. Throws Infeasible when total
// demand lies outside [sum lo, sum hi].
OracleSolution solve_centralized(std::span<const CostModel> costs);

enum class BoundState { Interior, AtLower, AtUpper, Fixed };

struct KktReport {
  double stationarity = 0.0;  // max violation of the sign-relaxed stationarity
  double balance = 0.0;       // max |sum W - sum d| over components
  std::vector<BoundState> status;  // per agent, first component
};

KktReport kkt_check(std::span<const CostModel> costs, const OracleSolution& solution);

}  // namespace etdgt
