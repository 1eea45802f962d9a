#include "delaydiff/topology.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "delaydiff/seeding.hpp"

namespace delaydiff {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

NetworkTopology::NetworkTopology(int num_nodes, const std::vector<std::pair<int, int>>& edges,
                                 std::optional<Eigen::MatrixX2d> positions)
    : n_(num_nodes), positions_(std::move(positions)) {
  require(num_nodes >= 1, "topology: need at least one node");
  adjacency_.setConstant(n_, n_, false);
  for (int k = 0; k < n_; ++k) adjacency_(k, k) = true;  // self loops mandatory
  for (const auto& [a, b] : edges) {
    require(a >= 0 && a < n_ && b >= 0 && b < n_,
            "topology: edge endpoint out of range: (" + std::to_string(a) + "," +
                std::to_string(b) + ")");
    adjacency_(a, b) = true;
    adjacency_(b, a) = true;
  }
  if (positions_) {
    require(positions_->rows() == n_, "topology: positions row count must equal node count");
  }
  neighbors_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    for (int l = 0; l < n_; ++l) {
      if (adjacency_(l, k)) neighbors_[k].push_back(l);
    }
  }
}

NetworkTopology NetworkTopology::random_geometric(int num_nodes, double radius,
                                                  std::uint64_t seed) {
  require(num_nodes >= 1, "topology: need at least one node");
  require(radius > 0, "topology: radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kMaxAttempts = 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::MatrixX2d pos(num_nodes, 2);
    for (int k = 0; k < num_nodes; ++k) {
      pos(k, 0) = unit(rng);
      pos(k, 1) = unit(rng);
    }
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < num_nodes; ++a) {
      for (int b = a + 1; b < num_nodes; ++b) {
        if ((pos.row(a) - pos.row(b)).norm() <= radius) edges.emplace_back(a, b);
      }
    }
    NetworkTopology candidate(num_nodes, edges, pos);
    if (candidate.connected()) return candidate;
  }
  throw std::runtime_error("topology: failed to draw a connected geometric network; "
                           "radius too small for the node count");
}

NetworkTopology NetworkTopology::fully_connected(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < num_nodes; ++a) {
    for (int b = a + 1; b < num_nodes; ++b) edges.emplace_back(a, b);
  }
  return NetworkTopology(num_nodes, edges);
}

std::vector<std::pair<int, int>> NetworkTopology::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (adjacency_(a, b)) out.emplace_back(a, b);
    }
  }
  return out;
}

bool NetworkTopology::connected() const {
  std::vector<bool> seen(n_, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : neighbors_[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

CombinationMatrix build_uniform_combination(const NetworkTopology& topology) {
  const int n = topology.num_nodes();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto& nk = topology.neighbors(k);
    const double w = 1.0 / static_cast<double>(nk.size());
    for (int l : nk) a(l, k) = w;
  }
  return CombinationMatrix{std::move(a)};
}

CombinationMatrix build_explicit_combination(const NetworkTopology& topology,
                                             const Eigen::MatrixXd& weights) {
  const int n = topology.num_nodes();
  require(weights.rows() == n && weights.cols() == n,
          "combination: matrix must be N x N");
  constexpr double kTol = 1e-10;
  for (int k = 0; k < n; ++k) {
    double col = 0;
    for (int l = 0; l < n; ++l) {
      const double w = weights(l, k);
      require(w >= 0, "combination: negative weight at (" + std::to_string(l) + "," +
                          std::to_string(k) + ")");
      require(!(w > 0) || topology.linked(l, k),
              "combination: weight on non-neighbor link (" + std::to_string(l) + "," +
                  std::to_string(k) + ")");
      col += w;
    }
    require(std::abs(col - 1.0) <= kTol,
            "combination: column " + std::to_string(k) + " sums to " + std::to_string(col));
  }
  return CombinationMatrix{weights};
}

CombinationMatrix identity_combination(int num_nodes) {
  return CombinationMatrix{Eigen::MatrixXd::Identity(num_nodes, num_nodes)};
}

namespace {

DelayProfile finalize_profile(const NetworkTopology& topology, Eigen::MatrixXi tau) {
  const int n = topology.num_nodes();
  int gamma = 0;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (!topology.linked(l, k)) {
        tau(l, k) = 0;  // off-link entries carry no information
        continue;
      }
      gamma = std::max(gamma, tau(l, k));
    }
  }
  return DelayProfile{std::move(tau), gamma};
}

}  // namespace

DelayProfile build_constant_delays(const NetworkTopology& topology, int delay) {
  require(delay >= 0, "delays: constant delay must be nonnegative");
  const int n = topology.num_nodes();
  Eigen::MatrixXi tau = Eigen::MatrixXi::Constant(n, n, delay);
  tau.diagonal().setZero();
  return finalize_profile(topology, std::move(tau));
}

DelayProfile build_explicit_delays(const NetworkTopology& topology, const Eigen::MatrixXi& tau) {
  const int n = topology.num_nodes();
  require(tau.rows() == n && tau.cols() == n, "delays: matrix must be N x N");
  for (int k = 0; k < n; ++k) {
    require(tau(k, k) == 0, "delays: self delay must be zero at node " + std::to_string(k));
    for (int l = 0; l < n; ++l) {
      require(tau(l, k) >= 0, "delays: negative delay at (" + std::to_string(l) + "," +
                                  std::to_string(k) + ")");
    }
  }
  return finalize_profile(topology, tau);
}

DelayProfile build_distance_delays(const NetworkTopology& topology, double scale) {
  require(scale > 0, "delays: distance scale must be positive");
  require(topology.has_positions(), "delays: distance mode needs node positions");
  const int n = topology.num_nodes();
  const auto& pos = topology.positions();
  Eigen::MatrixXi tau = Eigen::MatrixXi::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (l == k || !topology.linked(l, k)) continue;
      const double dist = (pos.row(l) - pos.row(k)).norm();
      tau(l, k) = static_cast<int>(std::ceil(dist / scale));
    }
  }
  return finalize_profile(topology, std::move(tau));
}

ExtendedCombination partition_combination(const CombinationMatrix& combination,
                                          const DelayProfile& delays) {
  const int n = static_cast<int>(combination.weights.rows());
  require(delays.tau.rows() == n && delays.tau.cols() == n,
          "partition: combination and delay profile sizes differ");
  const int depth = delays.depth();

  std::vector<Eigen::MatrixXd> parts(depth, Eigen::MatrixXd::Zero(n, n));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double w = combination.weights(l, k);
      if (w > 0) parts[delays.tau(l, k)](l, k) = w;
    }
  }

  // First block row stacks the transposed parts; below it an identity
  // shifted one block right, so each row still sums to one.
  Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(n * depth, n * depth);
  for (int t = 0; t < depth; ++t) {
    ext.block(0, t * n, n, n) = parts[t].transpose();
  }
  if (depth > 1) {
    ext.block(n, 0, n * (depth - 1), n * (depth - 1)) =
        Eigen::MatrixXd::Identity(n * (depth - 1), n * (depth - 1));
  }
  return ExtendedCombination{std::move(parts), std::move(ext), n, depth};
}

}  // namespace delaydiff
