#include "delaydiff/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "delaydiff/seeding.hpp"

namespace delaydiff {

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t arm_index,
                         std::size_t trial_index) {
  return derive_seed(derive_seed(master_seed, stream_tag::trial, arm_index), trial_index);
}

std::vector<ArmEstimate> estimate_msd(const ExperimentPlan& plan,
                                      const NetworkTopology& topology,
                                      const CombinationMatrix& combination,
                                      const DelayProfile& delays, const SignalModel& model,
                                      int workers) {
  if (plan.trials < 1) throw std::invalid_argument("plan: trials must be at least 1");
  if (plan.horizon < 1) throw std::invalid_argument("plan: horizon must be at least 1");
  if (plan.arms.empty()) throw std::invalid_argument("plan: no arms");
  workers = std::max(1, workers);

  const int n = topology.num_nodes();
  std::vector<ArmEstimate> out;
  out.reserve(plan.arms.size());

  for (std::size_t arm_index = 0; arm_index < plan.arms.size(); ++arm_index) {
    const ArmSpec& arm = plan.arms[arm_index];
    RunConfig config;
    config.algorithm = arm.algorithm;
    config.step_sizes = arm.step_sizes;
    config.horizon = plan.horizon;
    config.initial_estimate = plan.initial_estimate;
    config.divergence_guard = plan.divergence_guard;

    // Per-trial node-summed squared errors, filled by any worker but always
    // reduced in trial order afterwards.
    std::vector<Eigen::VectorXd> per_trial(plan.trials);
    std::vector<char> diverged(plan.trials, 0);
    std::atomic<int> next{0};
    auto body = [&]() {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= plan.trials) return;
        const TrialResult trial =
            run_trial(config, topology, combination, delays, model,
                      trial_seed(plan.master_seed, arm_index, static_cast<std::size_t>(t)));
        diverged[t] = trial.diverged ? 1 : 0;
        if (!trial.diverged) per_trial[t] = trial.squared_errors.rowwise().sum();
      }
    };
    if (workers == 1 || plan.trials == 1) {
      body();
    } else {
      std::vector<std::thread> pool;
      const int count = std::min(workers, plan.trials);
      pool.reserve(count);
      for (int i = 0; i < count; ++i) pool.emplace_back(body);
      for (auto& th : pool) th.join();
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(plan.horizon);
    int kept = 0;
    int dropped = 0;
    for (int t = 0; t < plan.trials; ++t) {
      if (diverged[t]) {
        ++dropped;
        continue;
      }
      sum += per_trial[t];
      ++kept;
    }

    ArmEstimate estimate;
    estimate.diverged_trials = dropped;
    estimate.curve.source = MsdCurve::Source::simulation;
    estimate.curve.label = arm.label;
    estimate.curve.step_sizes = arm.step_sizes;
    estimate.curve.max_delay = delays.max_delay;
    estimate.curve.seed = plan.master_seed;
    estimate.curve.trials = kept;
    estimate.curve.values.resize(plan.horizon,
                                 std::numeric_limits<double>::quiet_NaN());
    if (kept > 0) {
      const double scale = 1.0 / (static_cast<double>(kept) * n);
      for (int i = 0; i < plan.horizon; ++i) estimate.curve.values[i] = sum(i) * scale;
    }
    out.push_back(std::move(estimate));
  }
  return out;
}

double steady_state_estimate(const MsdCurve& curve, int window) {
  const int len = static_cast<int>(curve.values.size());
  if (len == 0) throw std::invalid_argument("steady_state_estimate: empty curve");
  if (window <= 0) window = std::max(1, len / 10);
  if (window > len) throw std::invalid_argument("steady_state_estimate: window exceeds curve");
  double sum = 0;
  for (int i = len - window; i < len; ++i) sum += curve.values[i];
  return sum / window;
}

}  // namespace delaydiff
