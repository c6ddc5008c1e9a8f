#include "etdgt/engine.hpp"

#include "etdgt/errors.hpp"

#include <Eigen/SVD>

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace etdgt {

namespace {

constexpr double kStochasticTol = 1e-12;

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.cols() == 1 || m.rows() == 1) return m.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

void check_inputs(const NetworkModel& net, std::span<const CostModel> costs) {
  const int n = net.size();
  if (static_cast<int>(costs.size()) != n) {
    throw InvalidScenario("agent count " + std::to_string(costs.size()) +
                          " does not match network size " + std::to_string(n));
  }
  const int m = costs.front().dim();
  for (const auto& c : costs) {
    validate(c);
    if (c.dim() != m) throw InvalidScenario("agents disagree on resource dimension");
  }
  for (int c = 0; c < m; ++c) {
    double lo = 0.0;
    double hi = 0.0;
    double demand = 0.0;
    for (const auto& model : costs) {
      lo += model.lo;
      hi += model.hi;
      demand += model.demand(c);
    }
    if (demand < lo || demand > hi) {
      throw InvalidScenario("Slater condition violated: total demand " + std::to_string(demand) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
  const double row_err = (net.R.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (net.C.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_err > kStochasticTol || col_err > kStochasticTol) {
    throw InvalidScenario("weight assumption violated: R must be row-stochastic and C "
                          "column-stochastic");
  }
}

// Updates shared by both algorithms once the caches for round k are final.
void mix_and_update(SimState& st, const NetworkModel& net, std::span<const CostModel> costs,
                    double alpha) {
  const int n = net.size();
  const Eigen::MatrixXd& price_cache = st.trigger.price.cache;
  const Eigen::MatrixXd& tracker_cache = st.trigger.tracker.cache;

  Eigen::MatrixXd W_tilde_next = st.W_tilde;
  Eigen::MatrixXd W_next(st.W.rows(), st.W.cols());
  Eigen::MatrixXd S_next = st.S;
  for (int i = 0; i < n; ++i) {
    for (int j : net.graph_R.in_neighbors(i)) {
      W_tilde_next.row(i) += net.R(i, j) * (price_cache.row(j) - price_cache.row(i));
    }
    W_tilde_next.row(i) += alpha * st.S.row(i);
    W_next.row(i) =
        local_argmin(costs[static_cast<std::size_t>(i)], Eigen::VectorXd(W_tilde_next.row(i).transpose()))
            .transpose();
  }
  // Push step in the (C - I) form: C is only column-stochastic, so the
  // pairwise-difference form would not conserve 1^T S.
  for (int i = 0; i < n; ++i) {
    for (int j : net.graph_C.in_neighbors(i)) {
      S_next.row(i) += net.C(i, j) * tracker_cache.row(j);
    }
    S_next.row(i) += (net.C(i, i) - 1.0) * tracker_cache.row(i);
    S_next.row(i) -= W_next.row(i) - st.W.row(i);
  }
  st.W_tilde.swap(W_tilde_next);
  st.W.swap(W_next);
  st.S.swap(S_next);
  st.k += 1;
}

double max_gap(const Eigen::MatrixXd& cache, const Eigen::MatrixXd& value) {
  return (cache - value).rowwise().norm().maxCoeff();
}

}  // namespace

std::string_view to_string(Algorithm alg) {
  return alg == Algorithm::ETDGT ? "etdgt" : "ddgt";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "etdgt") return Algorithm::ETDGT;
  if (name == "ddgt") return Algorithm::DDGT;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

SimState init_state(const NetworkModel& net, std::span<const CostModel> costs) {
  if (costs.empty()) throw InvalidScenario("no agents");
  check_inputs(net, costs);
  const int n = net.size();
  const int m = costs.front().dim();

  SimState st;
  st.k = 0;
  st.W_tilde = Eigen::MatrixXd::Zero(n, m);
  st.W.resize(n, m);
  st.D.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const auto& model = costs[static_cast<std::size_t>(i)];
    st.W.row(i).setConstant(std::clamp(0.0, model.lo, model.hi));
    st.D.row(i) = model.demand.transpose();
  }
  st.S = st.D - st.W;
  st.trigger = TriggerState(n, m);
  for (int i = 0; i < n; ++i) {
    record_broadcast(st.trigger, i, Variable::Price, st.W_tilde.row(i).transpose(), 0,
                     static_cast<int>(net.graph_R.out_neighbors(i).size()));
    record_broadcast(st.trigger, i, Variable::Tracker, st.S.row(i).transpose(), 0,
                     static_cast<int>(net.graph_C.out_neighbors(i).size()));
  }
  return st;
}

TriggerRound step_etdgt(SimState& st, const NetworkModel& net, std::span<const CostModel> costs,
                        const TriggerSchedule& schedule, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("step size must be positive");
  TriggerRound round;
  round.k = st.k;
  round.threshold = threshold_at(schedule, st.k);
  // Round 0 broadcasts were made by init_state.
  if (st.k > 0) {
    for (int i = 0; i < net.size(); ++i) {
      if (should_trigger(st.W_tilde.row(i).transpose(), st.trigger.price.cache.row(i).transpose(),
                         round.threshold)) {
        record_broadcast(st.trigger, i, Variable::Price, st.W_tilde.row(i).transpose(), st.k,
                         static_cast<int>(net.graph_R.out_neighbors(i).size()));
        ++round.fired_price;
      }
      if (should_trigger(st.S.row(i).transpose(), st.trigger.tracker.cache.row(i).transpose(),
                         round.threshold)) {
        record_broadcast(st.trigger, i, Variable::Tracker, st.S.row(i).transpose(), st.k,
                         static_cast<int>(net.graph_C.out_neighbors(i).size()));
        ++round.fired_tracker;
      }
    }
  } else {
    round.fired_price = round.fired_tracker = net.size();
  }
  round.max_gap_price = max_gap(st.trigger.price.cache, st.W_tilde);
  round.max_gap_tracker = max_gap(st.trigger.tracker.cache, st.S);
  mix_and_update(st, net, costs, alpha);
  return round;
}

TriggerRound step_ddgt(SimState& st, const NetworkModel& net, std::span<const CostModel> costs,
                       double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("step size must be positive");
  TriggerRound round;
  round.k = st.k;
  round.threshold = 0.0;
  round.fired_price = round.fired_tracker = net.size();
  if (st.k > 0) {
    for (int i = 0; i < net.size(); ++i) {
      record_broadcast(st.trigger, i, Variable::Price, st.W_tilde.row(i).transpose(), st.k,
                       static_cast<int>(net.graph_R.out_neighbors(i).size()));
      record_broadcast(st.trigger, i, Variable::Tracker, st.S.row(i).transpose(), st.k,
                       static_cast<int>(net.graph_C.out_neighbors(i).size()));
    }
  }
  mix_and_update(st, net, costs, alpha);
  return round;
}

RoundMetrics compute_metrics(const SimState& st, const NetworkModel& net,
                             std::span<const CostModel> costs, const OracleSolution* oracle) {
  const auto n = st.W.rows();
  const auto m = st.W.cols();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  RoundMetrics r;
  r.k = st.k;

  const Eigen::MatrixXd X = -st.W_tilde;
  const Eigen::VectorXd x_bar = X.transpose() * net.pi_R;
  r.consensus_error = operator_norm(X - ones * x_bar.transpose());

  const Eigen::VectorXd y_hat = st.S.transpose() * ones;
  r.tracking_error = operator_norm(st.S - net.pi_C * y_hat.transpose());

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
  double dual = 0.0;
  for (const auto& c : costs) {
    grad += dual_gradient(c, x_bar);
    if (oracle) dual += dual_value(c, x_bar);
  }
  r.grad_norm = grad.norm();

  Eigen::MatrixXd primal_grad(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < m; ++c) {
      primal_grad(i, c) = cost_derivative(costs[static_cast<std::size_t>(i)], st.W(i, c));
    }
  }
  const Eigen::RowVectorXd mean_grad = primal_grad.colwise().mean();
  const Eigen::RowVectorXd imbalance = st.W.colwise().sum() - st.D.colwise().sum();
  r.primal_residual =
      (primal_grad.rowwise() - mean_grad).squaredNorm() + imbalance.squaredNorm();
  r.supply_gap = imbalance.sum();
  r.mass_residual = (st.S.colwise().sum() - (st.D - st.W).colwise().sum()).norm();

  if (oracle) {
    r.primal_err = operator_norm(st.W - oracle->W_star);
    r.optimality_gap = dual - oracle->f_star;
  } else {
    r.primal_err = std::numeric_limits<double>::quiet_NaN();
    r.optimality_gap = std::numeric_limits<double>::quiet_NaN();
  }

  r.comm_w = st.trigger.price.events;
  r.comm_s = st.trigger.tracker.events;
  r.messages_w = st.trigger.price.messages;
  r.messages_s = st.trigger.tracker.messages;
  return r;
}

MetricsTrace run(const NetworkModel& net, std::span<const CostModel> costs,
                 const RunConfig& config, const OracleSolution* oracle) {
  if (config.K < 0) throw std::invalid_argument("K must be >= 0");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("step size must be positive");
  if (config.algorithm == Algorithm::ETDGT) validate(config.schedule);

  MetricsTrace trace;
  trace.config = config;
  trace.rows.reserve(static_cast<std::size_t>(config.K) + 1);
  trace.triggers.reserve(static_cast<std::size_t>(config.K));

  SimState st = init_state(net, costs);
  for (int k = 0; k < config.K; ++k) {
    RoundMetrics row = compute_metrics(st, net, costs, oracle);
    trace.triggers.push_back(config.algorithm == Algorithm::ETDGT
                                 ? step_etdgt(st, net, costs, config.schedule, config.alpha)
                                 : step_ddgt(st, net, costs, config.alpha));
    // Communication columns count broadcasts made during round k.
    row.comm_w = st.trigger.price.events;
    row.comm_s = st.trigger.tracker.events;
    row.messages_w = st.trigger.price.messages;
    row.messages_s = st.trigger.tracker.messages;
    trace.rows.push_back(row);
  }
  trace.rows.push_back(compute_metrics(st, net, costs, oracle));
  trace.final_W = st.W;
  trace.final_W_tilde = st.W_tilde;
  trace.final_S = st.S;
  return trace;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

void write_csv(const MetricsTrace& trace, std::ostream& out) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.k << ',' << format_number(r.consensus_error) << ','
        << format_number(r.tracking_error) << ',' << format_number(r.grad_norm) << ','
        << format_number(r.primal_err) << ',' << format_number(r.primal_residual) << ','
        << format_number(r.supply_gap) << ',' << r.comm_w << ',' << r.comm_s << '\n';
  }
}

}  // namespace etdgt
