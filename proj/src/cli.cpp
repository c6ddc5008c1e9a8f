#include "etdgt/cli.hpp"

#include "etdgt/engine.hpp"
#include "etdgt/errors.hpp"
#include "etdgt/oracle.hpp"
#include "etdgt/scenario.hpp"
#include "etdgt/stepsize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

namespace etdgt {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

template <std::size_t N>
void put_indexed(Json& obj, const char* prefix, const std::array<double, N>& values) {
  for (std::size_t i = 0; i < N; ++i) obj[prefix + std::to_string(i + 1)] = values[i];
}

Json vector_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::VectorXd r = m.row(i).transpose();
    rows.push_back(vector_json(r));
  }
  return rows;
}

Json bound_report(const NetworkModel& net, std::span<const CostModel> costs,
                  const TriggerSchedule& schedule, bool* ok) {
  *ok = true;
  const BoundInputs in = make_bound_inputs(net, costs, schedule);
  Json report;
  report["inputs"] = {{"n", in.n},
                      {"L", in.L},
                      {"sigma_R", in.sigma_R},
                      {"sigma_C", in.sigma_C},
                      {"sigma_perturbed", in.sigma_perturbed},
                      {"delta_RC", in.delta_RC},
                      {"delta_CR", in.delta_CR},
                      {"delta_2R", in.delta_2R},
                      {"delta_2C", in.delta_2C},
                      {"pi_dot", in.pi_dot},
                      {"beta", in.beta},
                      {"grad_f_X0_norm", in.grad_f_X0_norm},
                      {"Psi_lower", in.Psi_lower},
                      {"probe_alpha", in.probe_alpha},
                      {"lambda", in.lambda},
                      {"e0", in.e0},
                      {"S_e", in.S_e},
                      {"E", in.E},
                      {"s", in.s},
                      {"z0_norm", in.z0_norm}};
  report["lemma5"] = {{"alpha_max", lemma5_bound(in)}};

  try {
    const auto t1 = theorem1_bound(in);
    Json j;
    for (std::size_t i = 0; i < t1.c.size(); ++i) j["c" + std::to_string(i)] = t1.c[i];
    put_indexed(j, "b", t1.b);
    j["bracket"] = t1.bracket;
    j["alpha_eq15"] = t1.alpha_eq15;
    j["alpha_max"] = t1.alpha_max;
    j["candidate_alpha"] = t1.candidate_alpha;
    j["gamma"] = t1.gamma;
    j["k0"] = t1.k0;
    report["theorem1"] = std::move(j);
  } catch (const SolverError& ex) {
    *ok = false;
    report["theorem1"] = {{"error", ex.what()}};
  }

  try {
    const auto t2 = theorem2_bound(in);
    Json j;
    put_indexed(j, "d", t2.d);
    put_indexed(j, "h", t2.h);
    j["terms"] = t2.terms;
    j["alpha_max"] = t2.alpha_max;
    j["alpha"] = t2.alpha;
    j["P"] = matrix_json(t2.P);
    j["lambda"] = t2.lambda;
    j["det_I_minus_P"] = t2.det_I_minus_P;
    j["certificate"] = t2.certificate;
    j["nu"] = vector_json(t2.nu);
    j["s_min"] = t2.s_min;
    j["E_min"] = t2.E_min;
    j["trigger_admissible"] = t2.admissible;
    report["theorem2"] = std::move(j);
  } catch (const SolverError& ex) {
    *ok = false;
    report["theorem2"] = {{"error", ex.what()}};
  }
  return report;
}

Json oracle_json(const OracleSolution& sol) {
  Json j;
  j["W_star"] = matrix_json(sol.W_star);
  j["x_star"] = vector_json(sol.x_star);
  j["f_star"] = sol.f_star;
  j["kkt_residual"] = sol.kkt_residual;
  j["balance_residual"] = sol.balance_residual;
  return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json trace_summary(const MetricsTrace& trace, const OracleSolution& oracle) {
  const auto& last = trace.rows.back();
  double max_mass = 0.0;
  for (const auto& r : trace.rows) max_mass = std::max(max_mass, r.mass_residual);
  const double w_norm = oracle.W_star.norm();
  Json j;
  j["algorithm"] = std::string(to_string(trace.config.algorithm));
  j["K"] = trace.config.K;
  j["alpha"] = trace.config.alpha;
  if (trace.config.algorithm == Algorithm::ETDGT) {
    j["trigger"] = {{"E", trace.config.schedule.E}, {"s", trace.config.schedule.s}};
  }
  j["comm_w"] = last.comm_w;
  j["comm_s"] = last.comm_s;
  j["comm_total"] = last.comm_w + last.comm_s;
  j["messages_w"] = last.messages_w;
  j["messages_s"] = last.messages_s;
  j["final"] = {{"consensus_error", finite_or_null(last.consensus_error)},
                {"tracking_error", finite_or_null(last.tracking_error)},
                {"grad_norm", finite_or_null(last.grad_norm)},
                {"primal_err", finite_or_null(last.primal_err)},
                {"primal_err_relative", finite_or_null(last.primal_err / w_norm)},
                {"primal_residual", finite_or_null(last.primal_residual)},
                {"supply_gap", finite_or_null(last.supply_gap)},
                {"optimality_gap", finite_or_null(last.optimality_gap)}};
  j["max_mass_residual"] = max_mass;
  j["final_W"] = vector_json(trace.final_W.col(0));
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct RunOptions {
  std::string scenario;
  std::vector<std::string> algs;
  std::optional<int> K;
  std::optional<double> alpha;
  std::optional<double> E;
  std::optional<double> s;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

Scenario load_with_overrides(const RunOptions& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.K) sc.K = *o.K;
  if (o.alpha) sc.alpha = *o.alpha;
  if (o.E) sc.schedule.E = *o.E;
  if (o.s) sc.schedule.s = *o.s;
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const Scenario sc = load_with_overrides(o);
  const NetworkModel net = validate_scenario(sc);
  const OracleSolution oracle = solve_centralized(sc.agents);

  std::vector<Algorithm> algs;
  for (const auto& a : o.algs) {
    const Algorithm alg = parse_algorithm(a);
    if (std::find(algs.begin(), algs.end(), alg) == algs.end()) algs.push_back(alg);
  }
  if (algs.empty()) algs.push_back(Algorithm::ETDGT);

  std::vector<MetricsTrace> traces(algs.size());
  std::vector<std::exception_ptr> failures(algs.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < algs.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          RunConfig cfg{algs[i], sc.alpha, sc.schedule, sc.K};
          traces[i] = run(net, sc.agents, cfg, &oracle);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  Json summary;
  summary["scenario"] = Json::parse(scenario_to_json(sc));
  summary["norm"] = "consensus and tracking errors in the Euclidean operator norm";
  Json runs = Json::object();
  std::map<Algorithm, std::int64_t> totals;
  std::map<Algorithm, std::int64_t> messages;
  for (std::size_t i = 0; i < algs.size(); ++i) {
    const auto name = std::string(to_string(algs[i]));
    const fs::path csv = dir / (sc.name + "_" + name + ".csv");
    std::ofstream f(csv, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + csv.string());
    write_csv(traces[i], f);
    runs[name] = trace_summary(traces[i], oracle);
    const auto& last = traces[i].rows.back();
    totals[algs[i]] = last.comm_w + last.comm_s;
    messages[algs[i]] = last.messages_w + last.messages_s;
    out << "wrote " << csv.string() << '\n';
  }
  summary["runs"] = std::move(runs);
  if (totals.count(Algorithm::ETDGT) && totals.count(Algorithm::DDGT)) {
    summary["ratio"] = static_cast<double>(totals[Algorithm::ETDGT]) /
                       static_cast<double>(totals[Algorithm::DDGT]);
    summary["message_ratio"] = static_cast<double>(messages[Algorithm::ETDGT]) /
                               static_cast<double>(messages[Algorithm::DDGT]);
  }
  bool bounds_ok = true;
  summary["bounds"] = bound_report(net, sc.agents, sc.schedule, &bounds_ok);
  summary["oracle"] = oracle_json(oracle);

  const fs::path summary_path = dir / (sc.name + "_summary.json");
  write_text(summary_path, summary.dump(2) + "\n");
  write_text(dir / (sc.name + "_oracle.json"), oracle_json(oracle).dump(2) + "\n");
  out << "wrote " << summary_path.string() << '\n';
  if (summary.contains("ratio")) out << "ratio " << summary["ratio"].get<double>() << '\n';
  return 0;
}

int cmd_bounds(const RunOptions& o, std::ostream& out) {
  const Scenario sc = load_with_overrides(o);
  const NetworkModel net = validate_scenario(sc);
  bool ok = true;
  const Json report = bound_report(net, sc.agents, sc.schedule, &ok);
  out << report.dump(2) << '\n';
  return ok ? 0 : 3;
}

int cmd_oracle(const RunOptions& o, std::ostream& out) {
  const Scenario sc = load_with_overrides(o);
  validate_scenario(sc);
  const OracleSolution sol = solve_centralized(sc.agents);
  const std::string text = oracle_json(sol).dump(2) + "\n";
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_text(dir / (sc.name + "_oracle.json"), text);
  out << text;
  return 0;
}

}  // namespace

int exit_code_for(const std::exception& ex) {
  if (dynamic_cast<const ValidationError*>(&ex)) return 2;
  if (dynamic_cast<const SolverError*>(&ex)) return 3;
  if (dynamic_cast<const std::invalid_argument*>(&ex)) return 2;
  return 1;
}

std::string bound_report_json(const NetworkModel& net, std::span<const CostModel> costs,
                              const TriggerSchedule& schedule) {
  bool ok = true;
  return bound_report(net, costs, schedule, &ok).dump(2);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-triggered dual gradient tracking for resource allocation"};
  app.require_subcommand(1);

  RunOptions o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    sub->add_option("-K", o.K, "Number of rounds");
    sub->add_option("--alpha", o.alpha, "Step size");
    sub->add_option("--threshold-E", o.E, "Trigger magnitude E");
    sub->add_option("--threshold-s", o.s, "Trigger decay s");
    sub->add_option("--seed", o.seed, "Seed recorded with the scenario");
    sub->add_option("--out", o.out_dir, "Output directory");
  };

  auto* run_cmd = app.add_subcommand("run", "Run ET-DGT and/or DDGT and export traces");
  add_common(run_cmd);
  run_cmd->add_option("--alg", o.algs, "Algorithm (etdgt or ddgt); repeatable")
      ->check(CLI::IsMember({"etdgt", "ddgt"}));

  auto* bounds_cmd = app.add_subcommand("bounds", "Print the step-size bound report");
  add_common(bounds_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle", "Solve the centralized problem");
  add_common(oracle_cmd);

  int gen_n = 118;
  double gen_fraction = 54.0 / 118.0;
  std::uint64_t gen_seed = 7;
  std::string gen_out = ".";
  std::optional<std::string> gen_name;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random large-scale scenario");
  gen_cmd->add_option("-n,--n", gen_n, "Number of agents")->check(CLI::Range(2, 1000000));
  gen_cmd->add_option("--gen-fraction", gen_fraction, "Fraction of agents with generators")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("--name", gen_name, "Scenario name");
  gen_cmd->add_option("--out", gen_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o, out);
    if (bounds_cmd->parsed()) return cmd_bounds(o, out);
    if (oracle_cmd->parsed()) return cmd_oracle(o, out);
    Scenario sc = gen_large_scenario(gen_n, gen_fraction, gen_seed);
    if (gen_name) sc.name = *gen_name;
    fs::create_directories(gen_out);
    const fs::path path = fs::path(gen_out) / (sc.name + ".json");
    save_scenario(sc, path);
    out << "wrote " << path.string() << " digest " << std::hex << scenario_digest(sc) << std::dec
        << '\n';
    return 0;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  }
}

}  // namespace etdgt
