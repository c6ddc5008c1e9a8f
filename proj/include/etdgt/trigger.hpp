#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace etdgt {

// Geometric threshold schedule e_k = E * s^k.
struct TriggerSchedule {
  double E = 0.0;
  double s = 0.0;

  friend bool operator==(const TriggerSchedule&, const TriggerSchedule&) = default;
};

// Throws InvalidScenario unless E >= 0 (infinity allowed) and 0 <= s < 1.
void validate(const TriggerSchedule& schedule);

double threshold_at(const TriggerSchedule& schedule, int k);

// Sum of the whole sequence, E / (1 - s).
double threshold_sum(const TriggerSchedule& schedule);

// ||current - cached||_2 >= threshold. Equality triggers.
bool should_trigger(const Eigen::Ref<const Eigen::VectorXd>& current,
                    const Eigen::Ref<const Eigen::VectorXd>& cached, double threshold);

// Last-broadcast cache and triggering history for one broadcast variable.
struct BroadcastChannel {
  Eigen::MatrixXd cache;                 // n x m, row i = last value agent i sent
  std::vector<std::vector<int>> instants;  // per agent, strictly increasing
  std::int64_t events = 0;               // one per agent broadcast
  std::int64_t messages = 0;             // one per receiving out-neighbor

  BroadcastChannel() = default;
  BroadcastChannel(int n, int m);

  int last_instant(int agent) const;
};

enum class Variable { Price, Tracker };

// Caches for both broadcast variables: the price estimates and the gradient
// trackers.
struct TriggerState {
  BroadcastChannel price;
  BroadcastChannel tracker;

  TriggerState() = default;
  TriggerState(int n, int m) : price(n, m), tracker(n, m) {}

  BroadcastChannel& channel(Variable v) { return v == Variable::Price ? price : tracker; }
  const BroadcastChannel& channel(Variable v) const {
    return v == Variable::Price ? price : tracker;
  }
};

// Replaces the agent's cache with `value` and logs the instant. `fanout` is
// the number of out-neighbors that receive the message. Throws OutOfOrder
// unless k is after the agent's previous instant on that channel.
void record_broadcast(TriggerState& state, int agent, Variable which,
                      const Eigen::Ref<const Eigen::VectorXd>& value, int k, int fanout);

}  // namespace etdgt
