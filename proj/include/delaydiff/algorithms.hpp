#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "delaydiff/model.hpp"
#include "delaydiff/topology.hpp"

namespace delaydiff {

enum class Algorithm {
  noncooperative,
  atc_ideal,
  atc_delayed,
  atc_synchronous,
};

std::string to_string(Algorithm algorithm);
std::optional<Algorithm> algorithm_from_string(std::string_view name);
// Closed-form mean/mean-square predictions exist for all but the
// synchronous baseline.
bool has_theory(Algorithm algorithm);

struct RunConfig {
  Algorithm algorithm = Algorithm::atc_delayed;
  Eigen::VectorXd step_sizes;        // one per node, all > 0
  int horizon = 1;                   // time ticks
  Eigen::VectorXd initial_estimate;  // empty means zeros
  double divergence_guard = 1e9;     // estimate-norm threshold
};

// psi = w + mu x (d - x'w).
Eigen::VectorXd adapt_step(const Eigen::VectorXd& w, const DataSample& sample, double mu);

// Per-node ring buffer over the last `depth` intermediate estimates,
// zero-initialized so that lags reaching before the start read zeros.
class PsiHistory {
 public:
  PsiHistory(int depth, int dim);
  void push(const Eigen::VectorXd& psi);  // becomes lag 0
  const Eigen::VectorXd& at_lag(int lag) const;
  int depth() const { return static_cast<int>(slots_.size()); }

 private:
  std::vector<Eigen::VectorXd> slots_;
  int head_ = 0;
};

// One trial of one algorithm over the network; advances tick by tick so the
// combination semantics stay inspectable.
class NetworkRun {
 public:
  NetworkRun(const RunConfig& config, const NetworkTopology& topology,
             const CombinationMatrix& combination, const DelayProfile& delays,
             const SignalModel& model, std::uint64_t seed);

  // Executes one time tick; returns false if the run has diverged.
  bool advance();

  int ticks_done() const { return tick_; }
  bool diverged() const { return diverged_; }
  const std::vector<Eigen::VectorXd>& estimates() const { return w_; }
  const std::vector<Eigen::VectorXd>& intermediates() const { return psi_; }

 private:
  void adapt_all();
  void combine_ideal();
  void combine_delayed();

  const NetworkTopology& topology_;
  const CombinationMatrix& combination_;
  const DelayProfile& delays_;
  const SignalModel& model_;
  RunConfig config_;
  std::vector<std::mt19937_64> engines_;
  std::vector<Eigen::VectorXd> w_;
  std::vector<Eigen::VectorXd> psi_;
  std::vector<PsiHistory> history_;
  int tick_ = 0;
  bool diverged_ = false;
};

struct TrialResult {
  // squared_errors(i, k) = |w* - w_{k,i}|^2; rows past a divergence are NaN.
  Eigen::MatrixXd squared_errors;
  bool diverged = false;
  int diverged_at = -1;
};

TrialResult run_trial(const RunConfig& config, const NetworkTopology& topology,
                      const CombinationMatrix& combination, const DelayProfile& delays,
                      const SignalModel& model, std::uint64_t seed);

}  // namespace delaydiff
