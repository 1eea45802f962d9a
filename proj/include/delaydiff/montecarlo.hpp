#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "delaydiff/algorithms.hpp"
#include "delaydiff/analysis.hpp"
#include "delaydiff/model.hpp"
#include "delaydiff/topology.hpp"

namespace delaydiff {

struct ArmSpec {
  std::string label;
  Algorithm algorithm = Algorithm::atc_delayed;
  Eigen::VectorXd step_sizes;
};

struct ExperimentPlan {
  std::vector<ArmSpec> arms;
  int trials = 1;
  int horizon = 1;
  std::uint64_t master_seed = 0;
  Eigen::VectorXd initial_estimate;  // empty means zeros
  double divergence_guard = 1e9;
};

struct ArmEstimate {
  MsdCurve curve;
  int diverged_trials = 0;
};

// Stable per-trial seed; determinism must not depend on worker count or
// execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t arm_index,
                         std::size_t trial_index);

// Simulated network MSD per arm, averaged over trials and nodes. Diverged
// trials are excluded from the average and counted. Trials run on up to
// `workers` threads; the reduction is performed in trial-index order.
std::vector<ArmEstimate> estimate_msd(const ExperimentPlan& plan,
                                      const NetworkTopology& topology,
                                      const CombinationMatrix& combination,
                                      const DelayProfile& delays, const SignalModel& model,
                                      int workers = 1);

// Mean of the last `window` values; window <= 0 selects the final 10%.
double steady_state_estimate(const MsdCurve& curve, int window = 0);

}  // namespace delaydiff
