#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "delaydiff/model.hpp"
#include "delaydiff/topology.hpp"

namespace delaydiff {

// Per-iteration network mean-square deviation, linear scale.
struct MsdCurve {
  enum class Source { theory, simulation };

  Source source = Source::theory;
  std::vector<double> values;
  std::string label;
  Eigen::VectorXd step_sizes;
  int max_delay = 0;
  std::uint64_t seed = 0;  // simulation only
  int trials = 0;          // simulation only
};

// Operators driving the delay-augmented error recursion. The augmented
// state stacks the current estimate errors with the last max_delay blocks
// of intermediate-estimate errors (dimension M*N*T, T = max_delay+1).
//
// The mean-update matrix is applied through its block structure (diagonal
// scaling of the leading block, sparse per-link combination, block shift),
// so one application costs O(N M^2 + links M) per column instead of
// O((MNT)^2). Dense materializations exist for small instances and tests.
class ExtendedOperators {
 public:
  ExtendedOperators(ExtendedCombination combination, SignalModel model,
                    Eigen::VectorXd step_sizes);

  int network_dim() const { return mn_; }   // M*N
  int ext_dim() const { return mn_ * depth(); }
  int depth() const { return combination_.depth; }
  int num_nodes() const { return model_.num_nodes(); }
  const SignalModel& model() const { return model_; }
  const Eigen::VectorXd& step_sizes() const { return step_sizes_; }
  const ExtendedCombination& combination() const { return combination_; }

  // One application of the mean-update matrix to each column of x.
  Eigen::MatrixXd apply_mean(const Eigen::MatrixXd& x) const;

  Eigen::MatrixXd dense_extended_combination() const;
  Eigen::MatrixXd dense_mean() const;
  Eigen::MatrixXd dense_noise() const;

  // Tall factor U of the shaped noise covariance, dense_noise() == U U'.
  Eigen::MatrixXd noise_factor() const;

  // Stacked initial error when estimates start at zero: each of the N*T
  // blocks equals w*.
  Eigen::VectorXd initial_error(const Eigen::VectorXd& w_star) const;

 private:
  struct Link {
    int from;
    int to;
    int delay;
    double weight;
  };

  ExtendedCombination combination_;
  SignalModel model_;
  Eigen::VectorXd step_sizes_;
  std::vector<Link> links_;
  int mn_ = 0;
};

ExtendedOperators build_extended_operators(const ExtendedCombination& combination,
                                           const SignalModel& model,
                                           const Eigen::VectorXd& step_sizes);

// Dense mean-update matrix B = A_ext (I - M R_ext).
Eigen::MatrixXd build_mean_matrix(const ExtendedOperators& ops);
// Dense shaped noise covariance G = A_ext S_ext A_ext'.
Eigen::MatrixXd build_noise_operator(const ExtendedOperators& ops);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Per-node step-size upper bounds 2 / lambda_max(R_k).
Eigen::VectorXd stepsize_bounds(const SignalModel& model);

// Max over block rows of the summed spectral norms of the blocks.
double block_max_norm(const Eigen::MatrixXd& m, int block_dim);

// Largest eigenvalue magnitude; dense solver up to dim 2000, orthogonal
// (block power) iteration above.
double spectral_radius(const Eigen::MatrixXd& m);
double spectral_radius_iterative(
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply, int dim,
    double tol = 1e-10, int max_iters = 100000, int block = 4);

struct StabilityReport {
  double block_norm = 0;        // |I - M R|_{b,inf}
  bool norm_condition = false;  // block_norm < 1 (sufficient)
  double spectral_radius = 0;   // rho of the mean-update matrix
  bool stable = false;          // spectral_radius < 1
};

StabilityReport check_mean_stability(const ExtendedOperators& ops);

// E w~_i under the mean recursion, i = 0..horizon-1, starting from the
// all-blocks-equal-w* initial error.
std::vector<Eigen::VectorXd> mean_error_trajectory(const ExtendedOperators& ops,
                                                   const Eigen::VectorXd& w_star, int horizon);

// Transient network MSD prediction, one value per iteration. Maintains the
// running matrix power by a single mean-matrix application per step.
MsdCurve transient_msd(const ExtendedOperators& ops, const Eigen::VectorXd& w_star, int horizon);

struct SteadyState {
  double value = 0.0;
  bool converged = false;
  long terms = 0;
  bool precondition_ok = true;  // spectral radius < 1
};

// Steady-state network MSD as the trace series over mean-matrix powers,
// truncated once the relative increment drops below tol. Pass the spectral
// radius when already known to avoid recomputing it.
SteadyState steady_state_msd(const ExtendedOperators& ops, double tol = 1e-12,
                             long max_terms = 1000000,
                             std::optional<double> spectral_radius_hint = std::nullopt);

struct RhoRelation {
  double rho_mean = 0;  // rho(B)
  double rho_kron = 0;  // rho(B' (x) B')
  bool holds = false;
};

// Numerically confirms rho(B' (x) B') == rho(B)^2. Guarded to dim <= 60.
RhoRelation verify_rho_relation(const Eigen::MatrixXd& mean_matrix);

}  // namespace delaydiff
