#pragma once

#include <Eigen/Dense>

#include <span>

namespace etdgt {

enum class CostKind { Quadratic, QuadraticExp };

// Local generation cost a w^2 + b w (+ d exp((w + e) / f)) on the box
// [lo, hi], with local demand. Coefficients apply to every resource
// component; `demand` has one entry per component.
struct CostModel {
  CostKind kind = CostKind::Quadratic;
  double a = 1.0;
  double b = 0.0;
  double exp_d = 0.0;
  double exp_e = 0.0;
  double exp_f = 1.0;
  double lo = 0.0;
  double hi = 0.0;
  Eigen::VectorXd demand = Eigen::VectorXd::Zero(1);

  int dim() const { return static_cast<int>(demand.size()); }
  bool degenerate_box() const { return lo == hi; }

  friend bool operator==(const CostModel& x, const CostModel& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b && x.exp_d == y.exp_d &&
           x.exp_e == y.exp_e && x.exp_f == y.exp_f && x.lo == y.lo && x.hi == y.hi &&
           x.demand == y.demand;
  }
};

// Throws InvalidScenario when a <= 0, lo > hi, f <= 0 for the exponential
// kind, or a coefficient is not finite.
void validate(const CostModel& model);

// Convenience constructors.
CostModel quadratic_cost(double a, double b, double lo, double hi, double demand);
CostModel quadratic_exp_cost(double a, double b, double d, double e, double f, double lo,
                             double hi, double demand);

double eval_cost(const CostModel& model, double w);
double cost_derivative(const CostModel& model, double w);
double cost_second_derivative(const CostModel& model, double w);

// argmin over [lo, hi] of F(w) - price * w.
double local_argmin(const CostModel& model, double price);
Eigen::VectorXd local_argmin(const CostModel& model, const Eigen::VectorXd& price);

// Gradient of the agent's dual objective at multiplier x:
// demand - argmin_w { x w + F(w) }.
Eigen::VectorXd dual_gradient(const CostModel& model, const Eigen::VectorXd& x);

// Agent's dual objective F*(-x) + x . demand.
double dual_value(const CostModel& model, const Eigen::VectorXd& x);

struct SmoothnessParams {
  // Lipschitz constant of the dual gradients (inverse strong-convexity
  // modulus of the costs).
  double L = 0.0;
  // Largest primal curvature over the boxes.
  double mu = 0.0;
};

// Agents with a degenerate box contribute a constant dual gradient and are
// skipped for L; if every box is degenerate L falls back to max 1/(2a).
SmoothnessParams smoothness(std::span<const CostModel> costs);

}  // namespace etdgt
