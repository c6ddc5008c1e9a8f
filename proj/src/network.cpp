#include "etdgt/network.hpp"

#include "etdgt/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace etdgt {

DiGraph::DiGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) {
    throw std::invalid_argument("graph size must be >= 0");
  }
  for (const auto& e : edges_) {
    if (e.receiver < 0 || e.receiver >= n || e.sender < 0 || e.sender >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.receiver) + "," +
                                  std::to_string(e.sender) + ") out of range for n=" +
                                  std::to_string(n));
    }
    if (e.receiver == e.sender) {
      throw std::invalid_argument("explicit self-loop on node " + std::to_string(e.receiver));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw std::invalid_argument("duplicate edge (" + std::to_string(dup->receiver) + "," +
                                std::to_string(dup->sender) + ")");
  }
  in_.assign(static_cast<std::size_t>(n), {});
  out_.assign(static_cast<std::size_t>(n), {});
  for (const auto& e : edges_) {
    in_[static_cast<std::size_t>(e.receiver)].push_back(e.sender);
    out_[static_cast<std::size_t>(e.sender)].push_back(e.receiver);
  }
  for (auto& v : out_) std::sort(v.begin(), v.end());
}

DiGraph DiGraph::reversed() const {
  std::vector<Edge> flipped;
  flipped.reserve(edges_.size());
  for (const auto& e : edges_) flipped.push_back({e.sender, e.receiver});
  return DiGraph(n_, std::move(flipped));
}

bool DiGraph::reaches_all(int root) const {
  if (root < 0 || root >= n_) return false;
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{root};
  seen[static_cast<std::size_t>(root)] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : out_neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

bool DiGraph::strongly_connected() const {
  if (n_ == 0) return true;
  return reaches_all(0) && reversed().reaches_all(0);
}

Eigen::MatrixXd build_row_stochastic(const DiGraph& graph) {
  const int n = graph.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = graph.in_neighbors(i);
    const double w = 1.0 / static_cast<double>(nbrs.size() + 1);
    R(i, i) = w;
    for (int j : nbrs) R(i, j) = w;
  }
  return R;
}

Eigen::MatrixXd build_col_stochastic(const DiGraph& graph) {
  const int n = graph.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const auto& nbrs = graph.out_neighbors(j);
    const double w = 1.0 / static_cast<double>(nbrs.size() + 1);
    C(j, j) = w;
    for (int i : nbrs) C(i, j) = w;
  }
  return C;
}

Eigen::VectorXd perron_vector(const Eigen::MatrixXd& matrix, Side side) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw std::invalid_argument("perron_vector: matrix must be square and non-empty");
  }
  constexpr int kMaxIter = 100000;
  constexpr double kStopTol = 1e-12;
  constexpr double kAcceptTol = 1e-10;

  const Eigen::MatrixXd op = side == Side::Left ? Eigen::MatrixXd(matrix.transpose()) : matrix;
  const auto n = matrix.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd next(n);
  for (int it = 0; it < kMaxIter; ++it) {
    next.noalias() = op * v;
    next /= next.sum();
    const double step = (next - v).lpNorm<Eigen::Infinity>();
    v.swap(next);
    if (step < kStopTol) break;
  }
  const double residual = (op * v - v).lpNorm<Eigen::Infinity>();
  if (!(residual < kAcceptTol)) {
    throw NonConvergence("perron_vector: residual " + std::to_string(residual) +
                         " after power iteration; graph may violate the spanning-tree assumption");
  }
  return v;
}

Eigen::MatrixXd deflate(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& perron, Side side) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(matrix.rows());
  if (side == Side::Left) return matrix - ones * perron.transpose();
  return matrix - perron * ones.transpose();
}

double spectral_radius(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NonConvergence("spectral_radius: eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double contraction_factor(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& perron, Side side) {
  const double radius = spectral_radius(deflate(matrix, perron, side));
  if (!(radius < 1.0)) {
    throw DegenerateSpectrum("deflated spectral radius " + std::to_string(radius) +
                             " is not below 1");
  }
  // The margin must not push the factor to 1 for nearly reducible graphs.
  return std::min(radius + kContractionMargin, 0.5 * (1.0 + radius));
}

SpanningTreeReport check_spanning_trees(const DiGraph& graph_R, const DiGraph& graph_C) {
  SpanningTreeReport report;
  if (graph_R.size() != graph_C.size() || graph_R.size() == 0) return report;
  // Roots of the transposed push graph are the nodes every node can reach.
  const DiGraph push_transposed = graph_C.reversed();
  for (int r = 0; r < graph_R.size(); ++r) {
    if (graph_R.reaches_all(r) && push_transposed.reaches_all(r)) {
      report.common_roots.push_back(r);
    }
  }
  report.ok = !report.common_roots.empty();
  return report;
}

double eigenbasis_condition(const Eigen::MatrixXd& deflated) {
  if (deflated.rows() <= 1) return 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(deflated, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NonConvergence("eigenbasis_condition: eigensolver failed");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(1.0, sv(0) / smallest);
}

NetworkModel build_network_model(DiGraph graph_R, DiGraph graph_C) {
  if (graph_R.size() != graph_C.size()) {
    throw InvalidScenario("pull and push graphs have different node counts");
  }
  if (graph_R.size() == 0) {
    throw InvalidScenario("network has no agents");
  }
  auto trees = check_spanning_trees(graph_R, graph_C);
  if (!trees.ok) {
    throw InvalidScenario(
        "graph assumption violated: pull graph and transposed push graph need a spanning tree "
        "with a common root");
  }

  NetworkModel net;
  net.R = build_row_stochastic(graph_R);
  net.C = build_col_stochastic(graph_C);
  net.graph_R = std::move(graph_R);
  net.graph_C = std::move(graph_C);
  net.common_roots = std::move(trees.common_roots);

  net.pi_R = perron_vector(net.R, Side::Left);
  net.pi_C = perron_vector(net.C, Side::Right);
  net.sigma_R = contraction_factor(net.R, net.pi_R, Side::Left);
  net.sigma_C = contraction_factor(net.C, net.pi_C, Side::Right);

  const double kappa_R = eigenbasis_condition(deflate(net.R, net.pi_R, Side::Left));
  const double kappa_C = eigenbasis_condition(deflate(net.C, net.pi_C, Side::Right));
  // ||x||_R <= ||x||_2 <= kappa_C ||x||_C and symmetrically.
  net.delta_RC = kappa_C;
  net.delta_CR = kappa_R;
  net.delta_2R = kappa_R;
  net.delta_2C = kappa_C;
  return net;
}

}  // namespace etdgt
