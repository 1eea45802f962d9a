#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace delaydiff {

// Undirected network over nodes 0..N-1. Every node is its own neighbor;
// adjacency is symmetric. Positions are optional and only consumed by
// distance-based delay profiles.
class NetworkTopology {
 public:
  NetworkTopology(int num_nodes, const std::vector<std::pair<int, int>>& edges,
                  std::optional<Eigen::MatrixX2d> positions = std::nullopt);

  // Nodes uniform in the unit square, linked within `radius`; redraws until
  // the network is connected.
  static NetworkTopology random_geometric(int num_nodes, double radius, std::uint64_t seed);

  static NetworkTopology fully_connected(int num_nodes);

  int num_nodes() const { return n_; }
  bool linked(int from, int to) const { return adjacency_(from, to); }
  const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }
  bool has_positions() const { return positions_.has_value(); }
  const Eigen::MatrixX2d& positions() const { return *positions_; }
  std::vector<std::pair<int, int>> edges() const;  // cross links only, from < to
  bool connected() const;

 private:
  int n_ = 0;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency_;
  std::vector<std::vector<int>> neighbors_;
  std::optional<Eigen::MatrixX2d> positions_;
};

// Left-stochastic averaging weights; column k holds node k's weights over
// its neighborhood and is zero elsewhere.
struct CombinationMatrix {
  Eigen::MatrixXd weights;
};

CombinationMatrix build_uniform_combination(const NetworkTopology& topology);
CombinationMatrix build_explicit_combination(const NetworkTopology& topology,
                                             const Eigen::MatrixXd& weights);
CombinationMatrix identity_combination(int num_nodes);

// Integer per-link staleness, in iterations. tau(l,k) applies to information
// flowing from l to k; self links are never delayed.
struct DelayProfile {
  Eigen::MatrixXi tau;
  int max_delay = 0;

  int depth() const { return max_delay + 1; }
};

DelayProfile build_constant_delays(const NetworkTopology& topology, int delay);
DelayProfile build_explicit_delays(const NetworkTopology& topology, const Eigen::MatrixXi& tau);
// tau(l,k) = ceil(dist(l,k)/scale) on cross links; requires positions.
DelayProfile build_distance_delays(const NetworkTopology& topology, double scale);

// Split of A by per-link delay plus the delay-augmented combination matrix
// at node granularity (size N*(max_delay+1)); augmentation to the
// per-component dimension is a Kronecker lift with the identity.
struct ExtendedCombination {
  std::vector<Eigen::MatrixXd> parts;  // parts[t](l,k) = A(l,k) where tau(l,k)==t
  Eigen::MatrixXd node_extended;       // row-stochastic, N*T x N*T
  int num_nodes = 0;
  int depth = 0;  // T = max_delay + 1
};

ExtendedCombination partition_combination(const CombinationMatrix& combination,
                                          const DelayProfile& delays);

}  // namespace delaydiff
