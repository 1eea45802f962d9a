#include "delaydiff/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace delaydiff {

namespace {

double to_db(double linear) { return 10.0 * std::log10(linear); }

std::string format_double(double value, const char* fmt = "%.17g") {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, value);
  return buffer;
}

// Operators behind each arm's mean/mean-square predictions. The synchronous
// baseline performs plain no-delay updates once per cycle, so its stability
// verdict reuses the no-delay operator; it has no MSD theory here.
ExtendedOperators theory_operators(const ResolvedScenario& scenario, const ArmSpec& arm) {
  const int n = scenario.topology.num_nodes();
  switch (arm.algorithm) {
    case Algorithm::noncooperative: {
      const auto parts = partition_combination(identity_combination(n),
                                               build_constant_delays(scenario.topology, 0));
      return build_extended_operators(parts, scenario.model, arm.step_sizes);
    }
    case Algorithm::atc_ideal:
    case Algorithm::atc_synchronous: {
      const auto parts = partition_combination(scenario.combination,
                                               build_constant_delays(scenario.topology, 0));
      return build_extended_operators(parts, scenario.model, arm.step_sizes);
    }
    case Algorithm::atc_delayed: {
      const auto parts = partition_combination(scenario.combination, scenario.delays);
      return build_extended_operators(parts, scenario.model, arm.step_sizes);
    }
  }
  throw std::logic_error("theory_operators: unhandled algorithm");
}

void append_stability_lines(std::ostringstream& out, const ArmSpec& arm,
                            const StabilityReport& report, const ExtendedOperators& ops) {
  const bool shared = (arm.step_sizes.array() == arm.step_sizes(0)).all();
  out << "arm " << arm.label << " (" << to_string(arm.algorithm) << ", mu="
      << (shared ? format_double(arm.step_sizes(0), "%.6g")
                 : std::string("per-node"))
      << ", max_delay=" << (ops.depth() - 1) << ")\n";
  if (arm.algorithm == Algorithm::atc_synchronous) {
    out << "  verdict from the per-cycle no-delay update; no MSD theory for this baseline\n";
  }
  out << "  block max norm |I - M R|_{b,inf} = " << format_double(report.block_norm, "%.10g")
      << (report.norm_condition ? "  (< 1, sufficient condition holds)\n"
                                : "  (>= 1, sufficient condition not met)\n");
  out << "  spectral radius of mean update   = "
      << format_double(report.spectral_radius, "%.10g")
      << (report.stable ? "  -> stable\n" : "  -> UNSTABLE\n");
  if (ops.ext_dim() <= 60) {
    const RhoRelation relation = verify_rho_relation(ops.dense_mean());
    out << "  kron spectral radius check: rho_kron = "
        << format_double(relation.rho_kron, "%.10g")
        << ", rho^2 = " << format_double(relation.rho_mean * relation.rho_mean, "%.10g")
        << (relation.holds ? "  -> holds\n" : "  -> VIOLATED\n");
  } else {
    out << "  kron spectral radius check: skipped (dimension " << ops.ext_dim() << " > 60)\n";
  }
}

}  // namespace

int settling_tick(const MsdCurve& curve, double steady_linear) {
  const double lo = steady_linear * std::pow(10.0, -0.1);
  const double hi = steady_linear * std::pow(10.0, 0.1);
  int first = static_cast<int>(curve.values.size());
  for (int i = static_cast<int>(curve.values.size()) - 1; i >= 0; --i) {
    const double v = curve.values[i];
    const bool inside = steady_linear > 0 ? (v >= lo && v <= hi) : (v == steady_linear);
    if (!inside) break;
    first = i;
  }
  return first;
}

std::string stability_report_text(const ResolvedScenario& scenario) {
  std::ostringstream out;
  const int n = scenario.topology.num_nodes();
  out << "stability report\n";
  out << "nodes=" << n << " dimension=" << scenario.model.dimension()
      << " max_delay=" << scenario.delays.max_delay << "\n\n";

  const Eigen::VectorXd bounds = stepsize_bounds(scenario.model);
  out << "step-size bounds 2/lambda_max(R_k): min=" << format_double(bounds.minCoeff(), "%.6g")
      << " max=" << format_double(bounds.maxCoeff(), "%.6g") << "\n";
  out << "per node:";
  for (int k = 0; k < n; ++k) out << " " << format_double(bounds(k), "%.4g");
  out << "\n\n";

  for (const ArmSpec& arm : scenario.arms) {
    const ExtendedOperators ops = theory_operators(scenario, arm);
    const StabilityReport report = check_mean_stability(ops);
    append_stability_lines(out, arm, report, ops);
    out << "\n";
  }
  return out.str();
}

ResultBundle run_experiment(const ResolvedScenario& scenario, int workers) {
  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw == 0 ? 1 : static_cast<int>(hw);
  }

  ExperimentPlan plan;
  plan.arms = scenario.arms;
  plan.trials = scenario.trials;
  plan.horizon = scenario.horizon;
  plan.master_seed = scenario.master_seed;

  const std::vector<ArmEstimate> estimates = estimate_msd(
      plan, scenario.topology, scenario.combination, scenario.delays, scenario.model, workers);

  ResultBundle bundle;
  bundle.horizon = scenario.horizon;
  bundle.resolved_config = resolved_config_json(scenario);

  std::ostringstream stability;
  stability << "stability report\n";
  stability << "nodes=" << scenario.topology.num_nodes()
            << " dimension=" << scenario.model.dimension()
            << " max_delay=" << scenario.delays.max_delay << "\n\n";
  const Eigen::VectorXd bounds = stepsize_bounds(scenario.model);
  stability << "step-size bounds 2/lambda_max(R_k): min="
            << format_double(bounds.minCoeff(), "%.6g")
            << " max=" << format_double(bounds.maxCoeff(), "%.6g") << "\n\n";

  for (std::size_t i = 0; i < scenario.arms.size(); ++i) {
    const ArmSpec& arm = scenario.arms[i];
    ArmOutcome outcome;
    outcome.label = arm.label;
    outcome.algorithm = arm.algorithm;
    outcome.step_sizes = arm.step_sizes;
    outcome.simulated = estimates[i].curve;
    outcome.diverged_trials = estimates[i].diverged_trials;
    if (outcome.simulated.trials == 0) {
      throw AllTrialsDiverged("arm " + arm.label + ": every trial diverged");
    }
    outcome.sim_steady_db = to_db(steady_state_estimate(outcome.simulated));

    const ExtendedOperators ops = theory_operators(scenario, arm);
    outcome.stability = check_mean_stability(ops);
    append_stability_lines(stability, arm, *outcome.stability, ops);
    if (estimates[i].diverged_trials > 0) {
      stability << "  simulation: " << estimates[i].diverged_trials
                << " diverged trial(s) excluded from the average\n";
    }
    stability << "\n";

    if (has_theory(arm.algorithm)) {
      MsdCurve theory = transient_msd(ops, scenario.model.w_star(), scenario.horizon);
      theory.label = arm.label;
      outcome.theory = std::move(theory);
      outcome.theory_steady =
          steady_state_msd(ops, 1e-12, 1000000, outcome.stability->spectral_radius);
    }
    bundle.arms.push_back(std::move(outcome));
  }
  bundle.stability_text = stability.str();
  return bundle;
}

namespace {

void write_curve_csv(const std::filesystem::path& path, const MsdCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,msd_linear,msd_db\n";
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    out << i << ',' << format_double(curve.values[i]) << ','
        << format_double(to_db(curve.values[i])) << '\n';
  }
}

}  // namespace

void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

  for (const ArmOutcome& arm : bundle.arms) {
    write_curve_csv(dir / (arm.label + "_sim.csv"), arm.simulated);
    if (arm.theory) write_curve_csv(dir / (arm.label + "_theory.csv"), *arm.theory);
  }

  {
    std::ofstream out(dir / "stability_report.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write stability report");
    out << bundle.stability_text;
  }

  nlohmann::json meta = nlohmann::json::parse(bundle.resolved_config);
  nlohmann::json arms = nlohmann::json::array();
  for (const ArmOutcome& arm : bundle.arms) {
    nlohmann::json entry;
    entry["label"] = arm.label;
    entry["algorithm"] = to_string(arm.algorithm);
    entry["diverged_trials"] = arm.diverged_trials;
    entry["sim_steady_db"] = arm.sim_steady_db;
    if (arm.theory_steady) {
      entry["theory_steady_db"] = to_db(arm.theory_steady->value);
      entry["theory_steady_converged"] = arm.theory_steady->converged;
    }
    if (arm.stability) {
      entry["spectral_radius"] = arm.stability->spectral_radius;
      entry["block_max_norm"] = arm.stability->block_norm;
      entry["stable"] = arm.stability->stable;
    }
    arms.push_back(std::move(entry));
  }
  meta["results"] = {{"arms", std::move(arms)}};
  std::ofstream out(dir / "metadata.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metadata.json");
  out << meta.dump(2) << '\n';
}

namespace {

MsdCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,msd_linear,msd_db", 0) != 0)
    throw std::runtime_error(path.string() + ": unexpected CSV header");
  MsdCurve curve;
  curve.source = MsdCurve::Source::simulation;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos)
      throw std::runtime_error(path.string() + ": malformed CSV row");
    curve.values.push_back(std::stod(line.substr(first + 1, second - first - 1)));
  }
  return curve;
}

}  // namespace

std::string compare_bundles(const std::vector<std::filesystem::path>& dirs) {
  if (dirs.empty()) throw std::invalid_argument("compare: no bundles given");

  struct Row {
    std::string bundle;
    std::string arm;
    double steady_db;
    int settle;
  };
  std::vector<Row> rows;
  int horizon = -1;
  for (const auto& dir : dirs) {
    std::ifstream meta_in(dir / "metadata.json", std::ios::binary);
    if (!meta_in) throw std::runtime_error("cannot read " + (dir / "metadata.json").string());
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    const int h = meta.at("horizon").get<int>();
    if (horizon < 0) horizon = h;
    if (h != horizon)
      throw std::invalid_argument("compare: bundle " + dir.string() + " has horizon " +
                                  std::to_string(h) + ", expected " + std::to_string(horizon));
    for (const auto& arm : meta.at("results").at("arms")) {
      const std::string label = arm.at("label").get<std::string>();
      const MsdCurve curve = read_curve_csv(dir / (label + "_sim.csv"));
      const double steady = steady_state_estimate(curve);
      rows.push_back(Row{dir.string(), label, to_db(steady), settling_tick(curve, steady)});
    }
  }

  std::size_t bundle_width = 6;
  std::size_t arm_width = 3;
  for (const Row& row : rows) {
    bundle_width = std::max(bundle_width, row.bundle.size());
    arm_width = std::max(arm_width, row.arm.size());
  }
  std::ostringstream out;
  auto pad = [](const std::string& s, std::size_t width) {
    return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
  };
  out << pad("bundle", bundle_width) << "  " << pad("arm", arm_width)
      << "  steady_db  settle_ticks\n";
  for (const Row& row : rows) {
    char value[32];
    std::snprintf(value, sizeof(value), "%9.3f", row.steady_db);
    out << pad(row.bundle, bundle_width) << "  " << pad(row.arm, arm_width) << "  " << value
        << "  " << row.settle << "\n";
  }
  return out.str();
}

}  // namespace delaydiff
