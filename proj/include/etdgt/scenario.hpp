#pragma once

#include "etdgt/network.hpp"
#include "etdgt/objective.hpp"
#include "etdgt/trigger.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace etdgt {

struct Scenario {
  std::string name;
  DiGraph graph_R;
  DiGraph graph_C;
  bool same_graph = true;  // serialized as a single "edges" list
  std::vector<CostModel> agents;
  double alpha = 0.02;
  TriggerSchedule schedule;
  int K = 2000;
  std::uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Checks agent count, costs, Slater, the trigger schedule and the network
// assumptions, and returns the network model. Throws a ValidationError
// subclass naming the failed assumption.
NetworkModel validate_scenario(const Scenario& scenario);

// Throws ParseError (with line or field) or a ValidationError.
Scenario parse_scenario(std::string_view text, std::string_view source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// FNV-1a over the canonical JSON text.
std::uint64_t scenario_digest(const Scenario& scenario);

// Seeded strongly connected digraph (random Hamiltonian cycle plus two random
// extra in-edges per node), round(gen_fraction * n) quadratic generators and
// demands totalling 60% of generator capacity. Bit-identical across
// platforms for a given seed.
Scenario gen_large_scenario(int n, double gen_fraction, std::uint64_t seed);

}  // namespace etdgt
