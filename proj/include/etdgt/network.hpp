#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace etdgt {

// Directed edge (receiver, sender): `receiver` hears from `sender`.
struct Edge {
  int receiver = 0;
  int sender = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Communication digraph on nodes 0..n-1. Self-loops are never stored; the
// weight builders add them implicitly.
class DiGraph {
 public:
  DiGraph() = default;
  // Throws std::invalid_argument on out-of-range endpoints, explicit
  // self-loops or duplicate edges.
  DiGraph(int n, std::vector<Edge> edges);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Nodes this node receives from / sends to, sorted ascending.
  const std::vector<int>& in_neighbors(int i) const { return in_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& out_neighbors(int i) const { return out_[static_cast<std::size_t>(i)]; }

  // Same node set with every edge direction flipped.
  DiGraph reversed() const;

  // True when every node is reachable from `root` along the information flow
  // sender -> receiver.
  bool reaches_all(int root) const;

  bool strongly_connected() const;

  friend bool operator==(const DiGraph& a, const DiGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;  // sorted
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
};

enum class Side { Left, Right };

// Uniform pull weights: row i gives 1/(|N_i|+1) to itself and each in-neighbor.
Eigen::MatrixXd build_row_stochastic(const DiGraph& graph);

// Uniform push weights: column j gives 1/(|out(j)|+1) to itself and each
// out-neighbor.
Eigen::MatrixXd build_col_stochastic(const DiGraph& graph);

// Unit-sum non-negative eigenvector for eigenvalue 1 by power iteration from
// the uniform vector. Left vectors iterate on the transpose. Throws
// NonConvergence when the residual stays above 1e-10 after 1e5 sweeps.
Eigen::VectorXd perron_vector(const Eigen::MatrixXd& matrix, Side side);

// The deflated matrix R - 1 pi^T (Left) or C - pi 1^T (Right).
Eigen::MatrixXd deflate(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& perron, Side side);

// Largest eigenvalue modulus of a square matrix (dense eigensolve).
double spectral_radius(const Eigen::MatrixXd& matrix);

// Spectral radius of the deflated matrix plus a 1e-6 margin, kept strictly
// below 1. Throws DegenerateSpectrum when the radius itself reaches 1.
double contraction_factor(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& perron, Side side);

inline constexpr double kContractionMargin = 1e-6;

struct SpanningTreeReport {
  bool ok = false;
  std::vector<int> common_roots;
};

// Assumption on the mixing graphs: the pull graph has a spanning tree, the
// transposed push graph has one, and some node roots both.
SpanningTreeReport check_spanning_trees(const DiGraph& graph_R, const DiGraph& graph_C);

// Condition number of the eigenvector basis of the deflated matrix, floored
// at 1. Infinite when the matrix is numerically defective.
double eigenbasis_condition(const Eigen::MatrixXd& deflated);

// Everything the algorithms and bounds need to know about the network.
struct NetworkModel {
  DiGraph graph_R;
  DiGraph graph_C;
  Eigen::MatrixXd R;
  Eigen::MatrixXd C;
  Eigen::VectorXd pi_R;
  Eigen::VectorXd pi_C;
  double sigma_R = 0.0;
  double sigma_C = 0.0;
  // Norm-equivalence stand-ins: ||.||_R <= delta_RC ||.||_C and
  // ||.||_C <= delta_CR ||.||_R; delta_2R, delta_2C relate the 2-norm.
  double delta_RC = 1.0;
  double delta_CR = 1.0;
  double delta_2R = 1.0;
  double delta_2C = 1.0;
  std::vector<int> common_roots;

  int size() const { return graph_R.size(); }
  double pi_dot() const { return pi_C.dot(pi_R); }
};

// Builds and validates the model. Throws InvalidScenario when the graphs
// differ in size or fail the spanning-tree assumption.
NetworkModel build_network_model(DiGraph graph_R, DiGraph graph_C);

}  // namespace etdgt
