#include "etdgt/errors.hpp"
#include "etdgt/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <array>

using namespace etdgt;

namespace {

constexpr std::array<int, 5> kGenerators{0, 1, 2, 5, 7};

double total_demand(const std::vector<CostModel>& costs) {
  double t = 0.0;
  for (const auto& c : costs) t += c.demand.sum();
  return t;
}

}  // namespace

TEST(Oracle, Case1ReferenceAllocation) {
  const auto sc = fixture::case1();
  const auto sol = solve_centralized(sc.agents);
  const std::array<double, 5> ref{76.7398, 85.6530, 59.1311, 68.9863, 70.4898};
  for (std::size_t g = 0; g < 5; ++g) EXPECT_NEAR(sol.W_star(kGenerators[g], 0), ref[g], 1e-3);
  EXPECT_NEAR(sol.x_star(0), -8.1392, 1e-3);
  // Interior generator: the multiplier inverts the marginal cost.
  const auto& g1 = sc.agents[0];
  EXPECT_NEAR((-g1.b - sol.x_star(0)) / (2.0 * g1.a), sol.W_star(0, 0), 1e-8);
  EXPECT_LT(sol.balance_residual, 1e-9);
  EXPECT_LT(sol.kkt_residual, 1e-8);
}

TEST(Oracle, Case2ReferenceAllocation) {
  const auto sc = fixture::case2();
  const auto sol = solve_centralized(sc.agents);
  const std::array<double, 5> ref{74.4713, 76.9021, 67.5924, 70.0, 72.0341};
  for (std::size_t g = 0; g < 5; ++g) EXPECT_NEAR(sol.W_star(kGenerators[g], 0), ref[g], 1e-2);
  const auto kkt = kkt_check(sc.agents, sol);
  EXPECT_EQ(kkt.status[5], BoundState::AtUpper);
  EXPECT_EQ(kkt.status[0], BoundState::Interior);
  EXPECT_EQ(kkt.status[3], BoundState::Fixed);
  EXPECT_LT(kkt.stationarity, 1e-8);
}

TEST(Oracle, InvariantsHold) {
  for (const auto& sc : {fixture::case1(), fixture::case2()}) {
    const auto sol = solve_centralized(sc.agents);
    EXPECT_NEAR(sol.W_star.sum(), total_demand(sc.agents), 1e-9 * (1.0 + 361.0));
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      EXPECT_GE(sol.W_star(static_cast<Eigen::Index>(i), 0), sc.agents[i].lo);
      EXPECT_LE(sol.W_star(static_cast<Eigen::Index>(i), 0), sc.agents[i].hi);
    }
    // Strong duality: the optimal dual value is minus the optimal cost.
    double cost = 0.0;
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      cost += eval_cost(sc.agents[i], sol.W_star(static_cast<Eigen::Index>(i), 0));
    }
    EXPECT_NEAR(sol.f_star, -cost, 1e-7 * (1.0 + std::abs(cost)));
  }
}

TEST(Oracle, IdenticalAgentsSplitEvenly) {
  const std::vector<CostModel> costs(4, quadratic_cost(0.05, 1.0, -1000.0, 1000.0, 25.0));
  const auto sol = solve_centralized(costs);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(sol.W_star(i, 0), 25.0, 1e-9);
}

TEST(Oracle, Infeasible) {
  auto sc = fixture::case1();
  sc.agents[3].demand(0) = 1e4;
  EXPECT_THROW(solve_centralized(sc.agents), Infeasible);
  sc.agents[3].demand(0) = -1e4;
  EXPECT_THROW(solve_centralized(sc.agents), Infeasible);
}

TEST(Oracle, DemandPerturbation) {
  auto sc = fixture::case1();
  const auto base = solve_centralized(sc.agents);
  sc.agents[3].demand(0) += 1.0;
  const auto more = solve_centralized(sc.agents);
  EXPECT_NEAR(more.W_star.sum() - base.W_star.sum(), 1.0, 1e-8);
  EXPECT_LT(more.x_star(0), base.x_star(0));
}

TEST(Oracle, ComponentsSolvedSeparately) {
  std::vector<CostModel> both;
  std::vector<CostModel> first;
  std::vector<CostModel> second;
  const double a[] = {0.04, 0.03, 0.05};
  const double d0[] = {30.0, 10.0, 20.0};
  const double d1[] = {5.0, 50.0, 15.0};
  for (int i = 0; i < 3; ++i) {
    auto c = quadratic_cost(a[i], 2.0 + i, 0.0, 80.0, d0[i]);
    first.push_back(c);
    c.demand(0) = d1[i];
    second.push_back(c);
    c.demand = Eigen::Vector2d(d0[i], d1[i]);
    both.push_back(c);
  }
  const auto joint = solve_centralized(both);
  const auto s0 = solve_centralized(first);
  const auto s1 = solve_centralized(second);
  EXPECT_LT((joint.W_star.col(0) - s0.W_star.col(0)).norm(), 1e-9);
  EXPECT_LT((joint.W_star.col(1) - s1.W_star.col(0)).norm(), 1e-9);
}

TEST(Kkt, FlagsPerturbedSolution) {
  const auto sc = fixture::case1();
  auto sol = solve_centralized(sc.agents);
  EXPECT_LT(kkt_check(sc.agents, sol).balance, 1e-9);
  sol.W_star(0, 0) += 1.0;
  const auto kkt = kkt_check(sc.agents, sol);
  EXPECT_NEAR(kkt.balance, 1.0, 1e-8);
  EXPECT_GT(kkt.stationarity, 1e-3);
}
