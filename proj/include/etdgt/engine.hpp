#pragma once

#include "etdgt/network.hpp"
#include "etdgt/objective.hpp"
#include "etdgt/oracle.hpp"
#include "etdgt/trigger.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etdgt {

enum class Algorithm { ETDGT, DDGT };

std::string_view to_string(Algorithm alg);
// Accepts "etdgt" / "ddgt"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);

// Complete state of one synchronous round.
struct SimState {
  int k = 0;
  Eigen::MatrixXd W_tilde;  // price estimates, n x m
  Eigen::MatrixXd W;        // local allocations
  Eigen::MatrixXd S;        // gradient trackers
  Eigen::MatrixXd D;        // demands, constant
  TriggerState trigger;
};

// What the broadcast phase of one round did.
struct TriggerRound {
  int k = 0;
  double threshold = 0.0;
  int fired_price = 0;
  int fired_tracker = 0;
  // max_i ||cache_i - value_i|| right after the broadcast phase
  double max_gap_price = 0.0;
  double max_gap_tracker = 0.0;
};

// Zero prices and allocations (clipped into each box), trackers equal to
// demand minus allocation, and the mandatory broadcast of both variables at
// k = 0. Throws InvalidScenario naming the violated assumption.
SimState init_state(const NetworkModel& net, std::span<const CostModel> costs);

// One event-triggered round: broadcast phase for every agent, then the
// simultaneous update of prices, allocations and trackers from the caches.
TriggerRound step_etdgt(SimState& state, const NetworkModel& net,
                        std::span<const CostModel> costs, const TriggerSchedule& schedule,
                        double alpha);

// Periodic baseline: every agent broadcasts both variables every round.
TriggerRound step_ddgt(SimState& state, const NetworkModel& net, std::span<const CostModel> costs,
                       double alpha);

struct RoundMetrics {
  int k = 0;
  double consensus_error = 0.0;
  double tracking_error = 0.0;
  double grad_norm = 0.0;
  double primal_err = 0.0;  // NaN without an oracle
  double primal_residual = 0.0;
  double supply_gap = 0.0;
  std::int64_t comm_w = 0;
  std::int64_t comm_s = 0;
  std::int64_t messages_w = 0;
  std::int64_t messages_s = 0;
  double mass_residual = 0.0;    // ||1^T S - 1^T (D - W)||
  double optimality_gap = 0.0;   // f(xbar) - f*, NaN without an oracle
};

RoundMetrics compute_metrics(const SimState& state, const NetworkModel& net,
                             std::span<const CostModel> costs, const OracleSolution* oracle);

struct RunConfig {
  Algorithm algorithm = Algorithm::ETDGT;
  double alpha = 0.02;
  TriggerSchedule schedule;
  int K = 2000;
};

struct MetricsTrace {
  RunConfig config;
  std::vector<RoundMetrics> rows;       // K + 1 entries, row k describes state k
  std::vector<TriggerRound> triggers;   // K entries
  Eigen::MatrixXd final_W;
  Eigen::MatrixXd final_W_tilde;
  Eigen::MatrixXd final_S;
};

MetricsTrace run(const NetworkModel& net, std::span<const CostModel> costs,
                 const RunConfig& config, const OracleSolution* oracle = nullptr);

// 12 significant digits, shortest form, "nan"/"inf" for non-finite values.
std::string format_number(double value);

inline constexpr std::string_view kTraceCsvHeader =
    "k,consensus_error,tracking_error,grad_norm,primal_err,primal_residual,supply_gap,comm_w,"
    "comm_s";

void write_csv(const MetricsTrace& trace, std::ostream& out);

}  // namespace etdgt
