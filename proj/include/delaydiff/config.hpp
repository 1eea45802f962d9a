#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "delaydiff/algorithms.hpp"
#include "delaydiff/model.hpp"
#include "delaydiff/montecarlo.hpp"
#include "delaydiff/topology.hpp"

namespace delaydiff {

// Raised for unreadable, malformed, or schema-violating configurations; the
// message carries the failing location (line/column or JSON path).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkSpec {
  int nodes = 0;
  std::optional<double> geometric_radius;  // random geometric generation
  std::optional<std::vector<std::pair<int, int>>> edges;
  std::optional<std::vector<std::array<double, 2>>> positions;
};

struct CombinationSpec {
  bool uniform = true;
  std::vector<std::vector<double>> matrix;  // when not uniform
};

struct DelaySpec {
  enum class Mode { constant, distance_proportional, explicit_matrix };
  Mode mode = Mode::constant;
  int constant = 0;
  double scale = 0.0;
  std::vector<std::vector<int>> tau;
};

struct VarianceSpec {
  std::optional<std::array<double, 2>> uniform_range;  // drawn once per experiment
  std::optional<std::vector<double>> values;
};

struct ModelSpec {
  int dimension = 0;
  std::vector<double> w_star;
  VarianceSpec regressor_variances;
  VarianceSpec noise_variances;
};

struct ArmConfig {
  std::string label;  // defaults to the algorithm name, deduplicated
  Algorithm algorithm = Algorithm::atc_delayed;
  std::vector<double> step_sizes;  // length 1 (shared) or num_nodes
};

struct ExperimentConfig {
  int schema_version = 1;
  NetworkSpec network;
  CombinationSpec combination;
  DelaySpec delays;
  ModelSpec model;
  std::vector<ArmConfig> arms;
  int trials = 1;
  int horizon = 1;
  std::uint64_t master_seed = 0;
  std::string output = "out";
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin = "<string>");

// Fully materialized scenario: every random choice (topology, variances)
// already drawn from streams derived from the master seed.
struct ResolvedScenario {
  NetworkTopology topology;
  CombinationMatrix combination;
  DelayProfile delays;
  SignalModel model;
  std::vector<ArmSpec> arms;
  bool uniform_combination = true;
  int trials = 1;
  int horizon = 1;
  std::uint64_t master_seed = 0;
  std::string output;
};

ResolvedScenario resolve_scenario(const ExperimentConfig& config,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

// Echo of the resolved scenario in the config schema, with all generated
// quantities written out explicitly; feeding it back through
// parse/resolve reproduces the same outputs.
std::string resolved_config_json(const ResolvedScenario& scenario);

}  // namespace delaydiff
