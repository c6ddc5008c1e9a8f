#include "etdgt/scenario.hpp"

#include "etdgt/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace etdgt {

namespace {

using Json = nlohmann::ordered_json;

std::string where(std::string_view source, const std::string& field) {
  return std::string(source) + ": field '" + field + "'";
}

const Json& require(const Json& obj, const char* key, std::string_view source,
                    const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where(source, path + key) + " is missing");
  }
  return *it;
}

double number(const Json& v, std::string_view source, const std::string& path) {
  if (!v.is_number()) throw ParseError(where(source, path) + " must be a number");
  return v.get<double>();
}

double number_or(const Json& obj, const char* key, double fallback, std::string_view source,
                 const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, source, path + key);
}

std::int64_t integer(const Json& v, std::string_view source, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(where(source, path) + " must be an integer");
  return v.get<std::int64_t>();
}

DiGraph parse_edges(const Json& v, int n, std::string_view source, const std::string& path) {
  if (!v.is_array()) throw ParseError(where(source, path) + " must be an array of [i, j] pairs");
  std::vector<Edge> edges;
  edges.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& e = v[k];
    const std::string p = path + "[" + std::to_string(k) + "]";
    if (!e.is_array() || e.size() != 2) throw ParseError(where(source, p) + " must be [i, j]");
    edges.push_back({static_cast<int>(integer(e[0], source, p + "[0]")),
                     static_cast<int>(integer(e[1], source, p + "[1]"))});
  }
  try {
    return DiGraph(n, std::move(edges));
  } catch (const std::invalid_argument& ex) {
    throw InvalidScenario(std::string(source) + ": " + path + ": " + ex.what());
  }
}

CostModel parse_agent(const Json& v, std::string_view source, const std::string& path) {
  if (!v.is_object()) throw ParseError(where(source, path) + " must be an object");
  CostModel c;
  const std::string kind = v.value("kind", std::string("quadratic"));
  if (kind == "quadratic") {
    c.kind = CostKind::Quadratic;
  } else if (kind == "quadratic_exp") {
    c.kind = CostKind::QuadraticExp;
    c.exp_d = number(require(v, "d", source, path + "."), source, path + ".d");
    c.exp_e = number(require(v, "e", source, path + "."), source, path + ".e");
    c.exp_f = number(require(v, "f", source, path + "."), source, path + ".f");
  } else {
    throw ParseError(where(source, path + ".kind") + " must be quadratic or quadratic_exp");
  }
  c.a = number(require(v, "a", source, path + "."), source, path + ".a");
  c.b = number_or(v, "b", 0.0, source, path + ".");
  c.lo = number_or(v, "lo", 0.0, source, path + ".");
  c.hi = number_or(v, "hi", 0.0, source, path + ".");
  const Json& d = require(v, "demand", source, path + ".");
  if (d.is_array()) {
    c.demand.resize(static_cast<Eigen::Index>(d.size()));
    for (std::size_t k = 0; k < d.size(); ++k) {
      c.demand(static_cast<Eigen::Index>(k)) =
          number(d[k], source, path + ".demand[" + std::to_string(k) + "]");
    }
  } else {
    c.demand = Eigen::VectorXd::Constant(1, number(d, source, path + ".demand"));
  }
  return c;
}

Json edges_json(const DiGraph& g) {
  Json out = Json::array();
  for (const auto& e : g.edges()) out.push_back({e.receiver, e.sender});
  return out;
}

Json agent_json(const CostModel& c) {
  Json out;
  out["kind"] = c.kind == CostKind::Quadratic ? "quadratic" : "quadratic_exp";
  out["a"] = c.a;
  out["b"] = c.b;
  if (c.kind == CostKind::QuadraticExp) {
    out["d"] = c.exp_d;
    out["e"] = c.exp_e;
    out["f"] = c.exp_f;
  }
  out["lo"] = c.lo;
  out["hi"] = c.hi;
  if (c.demand.size() == 1) {
    out["demand"] = c.demand(0);
  } else {
    out["demand"] = std::vector<double>(c.demand.data(), c.demand.data() + c.demand.size());
  }
  return out;
}

// 53 high bits of a 64-bit draw mapped onto [0, 1).
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit(rng);
}

int below(std::mt19937_64& rng, int bound) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(bound));
}

// Fisher-Yates; std::shuffle's draw sequence is implementation-defined.
std::vector<int> permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(below(rng, i + 1))]);
  }
  return p;
}

}  // namespace

NetworkModel validate_scenario(const Scenario& sc) {
  if (sc.graph_R.size() < 1) throw InvalidScenario("scenario has no agents");
  if (static_cast<int>(sc.agents.size()) != sc.graph_R.size()) {
    throw InvalidScenario("agent count " + std::to_string(sc.agents.size()) +
                          " does not match n=" + std::to_string(sc.graph_R.size()));
  }
  const int m = sc.agents.front().dim();
  for (const auto& a : sc.agents) {
    validate(a);
    if (a.dim() != m) throw InvalidScenario("agents disagree on resource dimension");
  }
  for (int c = 0; c < m; ++c) {
    double lo = 0.0;
    double hi = 0.0;
    double demand = 0.0;
    for (const auto& a : sc.agents) {
      lo += a.lo;
      hi += a.hi;
      demand += a.demand(c);
    }
    if (demand < lo || demand > hi) {
      throw InvalidScenario("Slater condition violated: total demand outside total capacity");
    }
  }
  if (!(sc.alpha > 0.0) || !std::isfinite(sc.alpha)) {
    throw InvalidScenario("step size alpha must be positive");
  }
  if (sc.K < 0) throw InvalidScenario("K must be >= 0");
  validate(sc.schedule);
  return build_network_model(sc.graph_R, sc.graph_C);
}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& ex) {
    const auto upto = std::min<std::size_t>(ex.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ParseError(std::string(source) + ": line " + std::to_string(line) + ": " + ex.what());
  }
  if (!doc.is_object()) throw ParseError(std::string(source) + ": top level must be an object");

  Scenario sc;
  const auto& name = require(doc, "name", source, "");
  if (!name.is_string()) throw ParseError(where(source, "name") + " must be a string");
  sc.name = name.get<std::string>();

  const auto n64 = integer(require(doc, "n", source, ""), source, "n");
  if (n64 < 1 || n64 > 1'000'000) throw InvalidScenario(where(source, "n") + " out of range");
  const int n = static_cast<int>(n64);

  const bool has_single = doc.contains("edges");
  const bool has_pair = doc.contains("edges_R") || doc.contains("edges_C");
  if (has_single == has_pair) {
    throw ParseError(std::string(source) + ": give either 'edges' or both 'edges_R' and 'edges_C'");
  }
  if (has_single) {
    sc.same_graph = true;
    sc.graph_R = parse_edges(doc["edges"], n, source, "edges");
    sc.graph_C = sc.graph_R;
  } else {
    sc.same_graph = false;
    sc.graph_R = parse_edges(require(doc, "edges_R", source, ""), n, source, "edges_R");
    sc.graph_C = parse_edges(require(doc, "edges_C", source, ""), n, source, "edges_C");
  }

  const auto& agents = require(doc, "agents", source, "");
  if (!agents.is_array()) throw ParseError(where(source, "agents") + " must be an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    sc.agents.push_back(parse_agent(agents[i], source, "agents[" + std::to_string(i) + "]"));
  }

  sc.alpha = number_or(doc, "alpha", sc.alpha, source, "");
  if (auto it = doc.find("trigger"); it != doc.end()) {
    if (!it->is_object()) throw ParseError(where(source, "trigger") + " must be an object");
    sc.schedule.E = number(require(*it, "E", source, "trigger."), source, "trigger.E");
    sc.schedule.s = number(require(*it, "s", source, "trigger."), source, "trigger.s");
  }
  if (auto it = doc.find("K"); it != doc.end()) {
    sc.K = static_cast<int>(integer(*it, source, "K"));
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      throw ParseError(where(source, "seed") + " must be a non-negative integer");
    }
    sc.seed = it->get<std::uint64_t>();
  }

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& sc) {
  Json doc;
  doc["name"] = sc.name;
  doc["n"] = sc.graph_R.size();
  if (sc.same_graph && sc.graph_R == sc.graph_C) {
    doc["edges"] = edges_json(sc.graph_R);
  } else {
    doc["edges_R"] = edges_json(sc.graph_R);
    doc["edges_C"] = edges_json(sc.graph_C);
  }
  Json agents = Json::array();
  for (const auto& a : sc.agents) agents.push_back(agent_json(a));
  doc["agents"] = std::move(agents);
  doc["alpha"] = sc.alpha;
  doc["trigger"] = {{"E", sc.schedule.E}, {"s", sc.schedule.s}};
  doc["K"] = sc.K;
  doc["seed"] = sc.seed;
  return doc.dump(2);
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << scenario_to_json(sc) << '\n';
}

std::uint64_t scenario_digest(const Scenario& sc) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : scenario_to_json(sc)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

Scenario gen_large_scenario(int n, double gen_fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_large_scenario needs n >= 2");
  if (!(gen_fraction > 0.0 && gen_fraction <= 1.0)) {
    throw std::invalid_argument("gen_fraction must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);

  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  std::vector<Edge> edges;
  const auto cycle = permutation(rng, n);
  for (int t = 0; t < n; ++t) {
    const int from = cycle[static_cast<std::size_t>(t)];
    const int to = cycle[static_cast<std::size_t>((t + 1) % n)];
    if (!adj[static_cast<std::size_t>(to)][static_cast<std::size_t>(from)]) {
      adj[static_cast<std::size_t>(to)][static_cast<std::size_t>(from)] = true;
      edges.push_back({to, from});
    }
  }
  constexpr int kChords = 2;
  for (int i = 0; i < n; ++i) {
    auto& row = adj[static_cast<std::size_t>(i)];
    const int free = n - 1 - static_cast<int>(std::count(row.begin(), row.end(), true));
    for (int added = 0; added < std::min(kChords, free);) {
      const int j = below(rng, n);
      if (j == i || row[static_cast<std::size_t>(j)]) continue;
      row[static_cast<std::size_t>(j)] = true;
      edges.push_back({i, j});
      ++added;
    }
  }

  const int gens = std::clamp(static_cast<int>(std::lround(gen_fraction * n)), 1, n);
  auto order = permutation(rng, n);
  std::vector<bool> is_gen(static_cast<std::size_t>(n), false);
  for (int k = 0; k < gens; ++k) is_gen[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;

  Scenario sc;
  sc.name = "gen_n" + std::to_string(n) + "_s" + std::to_string(seed);
  sc.graph_R = DiGraph(n, std::move(edges));
  sc.graph_C = sc.graph_R;
  sc.same_graph = true;
  sc.agents.resize(static_cast<std::size_t>(n));
  double capacity = 0.0;
  for (int i = 0; i < n; ++i) {
    auto& a = sc.agents[static_cast<std::size_t>(i)];
    if (is_gen[static_cast<std::size_t>(i)]) {
      a.a = uniform(rng, 0.01, 0.05);
      a.b = uniform(rng, 1.0, 5.0);
      a.hi = uniform(rng, 50.0, 300.0);
      capacity += a.hi;
    }
  }
  std::vector<double> weight(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& w : weight) total += (w = unit(rng));
  for (int i = 0; i < n; ++i) {
    sc.agents[static_cast<std::size_t>(i)].demand =
        Eigen::VectorXd::Constant(1, 0.6 * capacity * weight[static_cast<std::size_t>(i)] / total);
  }
  sc.alpha = 0.015;
  sc.schedule = {0.5, 0.98};
  sc.K = 5000;
  sc.seed = seed;
  return sc;
}

}  // namespace etdgt
