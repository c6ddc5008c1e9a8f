#include "etdgt/trigger.hpp"

#include "etdgt/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace etdgt {

void validate(const TriggerSchedule& schedule) {
  if (std::isnan(schedule.E) || schedule.E < 0.0) {
    throw InvalidScenario("trigger magnitude E must be >= 0");
  }
  if (!(schedule.s >= 0.0 && schedule.s < 1.0)) {
    throw InvalidScenario("trigger threshold sequence must be summable: need 0 <= s < 1");
  }
}

double threshold_at(const TriggerSchedule& schedule, int k) {
  const double decay = std::pow(schedule.s, k);
  if (schedule.E == 0.0 || decay == 0.0) return 0.0;
  return schedule.E * decay;
}

double threshold_sum(const TriggerSchedule& schedule) {
  return schedule.E / (1.0 - schedule.s);
}

bool should_trigger(const Eigen::Ref<const Eigen::VectorXd>& current,
                    const Eigen::Ref<const Eigen::VectorXd>& cached, double threshold) {
  return (current - cached).norm() >= threshold;
}

BroadcastChannel::BroadcastChannel(int n, int m)
    : cache(Eigen::MatrixXd::Zero(n, m)), instants(static_cast<std::size_t>(n)) {}

int BroadcastChannel::last_instant(int agent) const {
  const auto& v = instants[static_cast<std::size_t>(agent)];
  return v.empty() ? -1 : v.back();
}

void record_broadcast(TriggerState& state, int agent, Variable which,
                      const Eigen::Ref<const Eigen::VectorXd>& value, int k, int fanout) {
  auto& ch = state.channel(which);
  if (k <= ch.last_instant(agent)) {
    throw OutOfOrder("agent " + std::to_string(agent) + " broadcast at k=" + std::to_string(k) +
                     " after instant " + std::to_string(ch.last_instant(agent)));
  }
  ch.cache.row(agent) = value.transpose();
  ch.instants[static_cast<std::size_t>(agent)].push_back(k);
  ch.events += 1;
  ch.messages += fanout;
}

}  // namespace etdgt
