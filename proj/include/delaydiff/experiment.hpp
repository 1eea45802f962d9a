#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "delaydiff/analysis.hpp"
#include "delaydiff/config.hpp"
#include "delaydiff/montecarlo.hpp"

namespace delaydiff {

// Raised when every trial of some arm diverged; nothing sensible to average.
class AllTrialsDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmOutcome {
  std::string label;
  Algorithm algorithm = Algorithm::atc_delayed;
  Eigen::VectorXd step_sizes;
  MsdCurve simulated;
  int diverged_trials = 0;
  double sim_steady_db = 0.0;
  std::optional<MsdCurve> theory;
  std::optional<SteadyState> theory_steady;
  std::optional<StabilityReport> stability;
};

struct ResultBundle {
  std::vector<ArmOutcome> arms;
  std::string resolved_config;  // JSON text
  std::string stability_text;
  int horizon = 0;
};

// Runs every arm (simulation plus theory where available).
ResultBundle run_experiment(const ResolvedScenario& scenario, int workers = 1);

// Theory-only pass: step-size bounds, norm condition, spectral radii.
std::string stability_report_text(const ResolvedScenario& scenario);

// Writes <label>_sim.csv / <label>_theory.csv, stability_report.txt and
// metadata.json into `dir` (created if needed).
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir);

// Steady-state level and settling time per arm across bundles written by
// write_bundle; all bundles must share the horizon.
std::string compare_bundles(const std::vector<std::filesystem::path>& dirs);

// First tick from which the curve stays within 1 dB of its steady level.
int settling_tick(const MsdCurve& curve, double steady_linear);

}  // namespace delaydiff
