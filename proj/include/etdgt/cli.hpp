#pragma once

#include "etdgt/network.hpp"
#include "etdgt/objective.hpp"
#include "etdgt/trigger.hpp"

#include <exception>
#include <iosfwd>
#include <span>
#include <string>

namespace etdgt {

// Subcommands run, bounds, oracle, gen. Returns the process exit code:
// 0 success, 2 invalid input, 3 solver failure, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int exit_code_for(const std::exception& ex);

// Every step-size constant by name, as pretty-printed JSON. Sections whose
// preconditions fail carry an "error" string instead of values.
std::string bound_report_json(const NetworkModel& net, std::span<const CostModel> costs,
                              const TriggerSchedule& schedule);

}  // namespace etdgt
