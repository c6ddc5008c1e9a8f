#pragma once

#include "etdgt/network.hpp"
#include "etdgt/scenario.hpp"
#include "etdgt/stepsize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace etdgt::fixture {

inline std::filesystem::path data_path(const std::string& file) {
  return std::filesystem::path(ETDGT_DATA_DIR) / file;
}

inline Scenario case1() { return load_scenario(data_path("case1.json")); }
inline Scenario case2() { return load_scenario(data_path("case2.json")); }

// Shuffled ring plus each off-ring edge with probability p.
inline DiGraph random_strong_digraph(int n, std::mt19937& rng, double p) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  std::vector<Edge> edges;
  for (int t = 0; t < n && n > 1; ++t) {
    const int from = order[static_cast<std::size_t>(t)];
    const int to = order[static_cast<std::size_t>((t + 1) % n)];
    if (!adj[static_cast<std::size_t>(to)][static_cast<std::size_t>(from)]) {
      adj[static_cast<std::size_t>(to)][static_cast<std::size_t>(from)] = true;
      edges.push_back({to, from});
    }
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] && coin(rng)) {
        adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
        edges.push_back({i, j});
      }
    }
  }
  return DiGraph(n, std::move(edges));
}

// Random scenario on a strongly connected graph: a few quadratic generators,
// the rest load buses, demand at 50% of capacity.
inline Scenario random_scenario(int n, std::mt19937& rng) {
  Scenario sc;
  sc.name = "random";
  sc.graph_R = random_strong_digraph(n, rng, 0.15);
  sc.graph_C = sc.graph_R;
  std::uniform_real_distribution<double> ua(0.01, 0.08), ub(1.0, 6.0), uh(40.0, 120.0),
      ud(0.0, 1.0);
  double cap = 0.0;
  sc.agents.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& a = sc.agents[static_cast<std::size_t>(i)];
    if (i % 2 == 0) {
      a.a = ua(rng);
      a.b = ub(rng);
      a.hi = uh(rng);
      cap += a.hi;
    }
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  double tot = 0.0;
  for (auto& x : w) tot += (x = ud(rng) + 0.05);
  for (int i = 0; i < n; ++i) {
    sc.agents[static_cast<std::size_t>(i)].demand =
        Eigen::VectorXd::Constant(1, 0.5 * cap * w[static_cast<std::size_t>(i)] / tot);
  }
  sc.alpha = 0.01;
  sc.schedule = {0.3, 0.93};
  sc.K = 300;
  return sc;
}

// Random bound inputs with every constant in a plausible range.
inline BoundInputs random_bound_inputs(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoundInputs in;
  in.n = 2 + static_cast<int>(u(rng) * 60);
  in.L = 0.5 + 40.0 * u(rng);
  in.sigma_R = 0.1 + 0.85 * u(rng);
  in.sigma_C = 0.1 + 0.85 * u(rng);
  in.Psi_lower = std::abs(in.sigma_R - in.sigma_C);
  in.delta_RC = 1.0 + 50.0 * u(rng);
  in.delta_CR = 1.0 + 50.0 * u(rng);
  in.delta_2R = in.delta_CR;
  in.delta_2C = in.delta_RC;
  in.pi_dot = (1.0 + 3.0 * u(rng)) / in.n;
  in.beta = 0.5 + 500.0 * u(rng);
  in.grad_f_X0_norm = 1.0 + 500.0 * u(rng);
  in.lambda = 0.5 + 0.45 * u(rng);
  in.z0_norm = 1.0 + 1e4 * u(rng);
  return in;
}

// Spectral radius in long double after diagonal balancing, for matrices
// whose entries span many orders of magnitude.
inline long double scaled_radius(Eigen::Matrix<long double, 3, 3> B) {
  for (int sweep = 0; sweep < 500; ++sweep) {
    long double worst = 0.0L;
    for (int i = 0; i < 3; ++i) {
      long double r = 0.0L;
      long double c = 0.0L;
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        r += std::abs(B(i, j));
        c += std::abs(B(j, i));
      }
      if (r == 0.0L || c == 0.0L) continue;
      const long double f = std::sqrt(c / r);
      B.row(i) *= f;
      B.col(i) /= f;
      worst = std::max(worst, std::abs(f - 1.0L));
    }
    if (worst < 1e-9L) break;
  }
  Eigen::EigenSolver<Eigen::Matrix<long double, 3, 3>> es(B, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline long double scaled_radius(const Eigen::Matrix3d& P) {
  return scaled_radius(Eigen::Matrix<long double, 3, 3>(P.cast<long double>()));
}

// The three-state system matrix rebuilt in long double from its constants,
// so the entry 1 - d12 a + d13 a^2 keeps its O(a) distance from 1.
inline Eigen::Matrix<long double, 3, 3> system_matrix_ld(const BoundInputs& in,
                                                         const std::array<double, 13>& d,
                                                         double alpha) {
  const long double a = alpha;
  const long double a2 = a * a;
  const long double sR2 = static_cast<long double>(in.sigma_R) * in.sigma_R;
  const long double sC2 = static_cast<long double>(in.sigma_C) * in.sigma_C;
  auto D = [&d](int i) { return static_cast<long double>(d[static_cast<std::size_t>(i - 1)]); };
  Eigen::Matrix<long double, 3, 3> P;
  P << (3 * sR2 - sR2 * sR2) / (1 + sR2) + D(1) * a2, D(2) * a2, D(3) * a2,
      D(4) + D(5) * a2, (1 + sC2) / 2 + D(6) * a2, D(7) * a2,
      D(8) + D(9) * a2, D(10) + D(11) * a2, 1 - D(12) * a + D(13) * a2;
  return P;
}

}  // namespace etdgt::fixture
