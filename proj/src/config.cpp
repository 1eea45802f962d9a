#include "delaydiff/config.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "delaydiff/seeding.hpp"

namespace delaydiff {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key \"" + item.key() + "\"");
  }
}

const json& get(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  return *it;
}

int get_int(const json& obj, const std::string& where, const char* key) {
  const json& v = get(obj, where, key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

double get_double(const json& obj, const std::string& where, const char* key) {
  const json& v = get(obj, where, key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> as_double_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) fail(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

VarianceSpec parse_variances(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where, {"uniform_range", "values"});
  VarianceSpec spec;
  if (v.contains("uniform_range")) {
    const auto range = as_double_vector(v["uniform_range"], where + ".uniform_range");
    if (range.size() != 2 || !(range[0] < range[1]) || range[0] <= 0)
      fail(where + ".uniform_range", "expected [low, high] with 0 < low < high");
    spec.uniform_range = {range[0], range[1]};
  }
  if (v.contains("values")) spec.values = as_double_vector(v["values"], where + ".values");
  if (spec.uniform_range.has_value() == spec.values.has_value())
    fail(where, "exactly one of \"uniform_range\" or \"values\" required");
  return spec;
}

NetworkSpec parse_network(const json& v) {
  const std::string where = "network";
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where, {"nodes", "random_geometric", "edges", "positions"});
  NetworkSpec spec;
  spec.nodes = get_int(v, where, "nodes");
  if (spec.nodes < 1) fail(where + ".nodes", "must be at least 1");
  if (v.contains("random_geometric")) {
    const json& g = v["random_geometric"];
    check_keys(g, where + ".random_geometric", {"radius"});
    spec.geometric_radius = get_double(g, where + ".random_geometric", "radius");
    if (*spec.geometric_radius <= 0) fail(where + ".random_geometric.radius", "must be positive");
  }
  if (v.contains("edges")) {
    const json& e = v["edges"];
    if (!e.is_array()) fail(where + ".edges", "expected an array of [a, b] pairs");
    std::vector<std::pair<int, int>> edges;
    for (const auto& pair : e) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer())
        fail(where + ".edges", "expected [a, b] integer pairs");
      const int a = pair[0].get<int>();
      const int b = pair[1].get<int>();
      if (a < 0 || a >= spec.nodes || b < 0 || b >= spec.nodes)
        fail(where + ".edges", "edge endpoint out of range");
      edges.emplace_back(a, b);
    }
    spec.edges = std::move(edges);
  }
  if (v.contains("positions")) {
    const json& p = v["positions"];
    if (!p.is_array() || static_cast<int>(p.size()) != spec.nodes)
      fail(where + ".positions", "expected one [x, y] entry per node");
    std::vector<std::array<double, 2>> positions;
    for (const auto& xy : p) {
      if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
        fail(where + ".positions", "expected [x, y] number pairs");
      positions.push_back({xy[0].get<double>(), xy[1].get<double>()});
    }
    spec.positions = std::move(positions);
  }
  if (spec.geometric_radius.has_value() == spec.edges.has_value())
    fail(where, "exactly one of \"random_geometric\" or \"edges\" required");
  return spec;
}

CombinationSpec parse_combination(const json& v) {
  CombinationSpec spec;
  if (v.is_string()) {
    if (v.get<std::string>() != "uniform")
      fail("combination", "unknown rule \"" + v.get<std::string>() + "\"");
    return spec;
  }
  if (!v.is_object()) fail("combination", "expected \"uniform\" or {\"matrix\": ...}");
  check_keys(v, "combination", {"matrix"});
  const json& m = get(v, "combination", "matrix");
  if (!m.is_array()) fail("combination.matrix", "expected an array of rows");
  spec.uniform = false;
  for (const auto& row : m)
    spec.matrix.push_back(as_double_vector(row, "combination.matrix"));
  return spec;
}

DelaySpec parse_delays(const json& v) {
  const std::string where = "delays";
  if (!v.is_object()) fail(where, "expected an object");
  const json& mode_value = get(v, where, "mode");
  if (!mode_value.is_string()) fail(where + ".mode", "expected a string");
  const std::string mode = mode_value.get<std::string>();
  DelaySpec spec;
  if (mode == "constant") {
    check_keys(v, where, {"mode", "value"});
    spec.mode = DelaySpec::Mode::constant;
    spec.constant = get_int(v, where, "value");
    if (spec.constant < 0) fail(where + ".value", "must be nonnegative");
  } else if (mode == "distance_proportional") {
    check_keys(v, where, {"mode", "scale"});
    spec.mode = DelaySpec::Mode::distance_proportional;
    spec.scale = get_double(v, where, "scale");
    if (spec.scale <= 0) fail(where + ".scale", "must be positive");
  } else if (mode == "explicit") {
    check_keys(v, where, {"mode", "tau"});
    spec.mode = DelaySpec::Mode::explicit_matrix;
    const json& t = get(v, where, "tau");
    if (!t.is_array()) fail(where + ".tau", "expected an array of rows");
    for (const auto& row : t) {
      if (!row.is_array()) fail(where + ".tau", "expected an array of rows");
      std::vector<int> r;
      for (const auto& e : row) {
        if (!e.is_number_integer()) fail(where + ".tau", "entries must be integers");
        r.push_back(e.get<int>());
        if (r.back() < 0) fail(where + ".tau", "entries must be nonnegative");
      }
      spec.tau.push_back(std::move(r));
    }
  } else {
    fail(where + ".mode",
         "expected one of \"constant\", \"distance_proportional\", \"explicit\"");
  }
  return spec;
}

ModelSpec parse_model(const json& v) {
  const std::string where = "model";
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where, {"dimension", "w_star", "regressor_variances", "noise_variances"});
  ModelSpec spec;
  spec.dimension = get_int(v, where, "dimension");
  if (spec.dimension < 1) fail(where + ".dimension", "must be at least 1");
  spec.w_star = as_double_vector(get(v, where, "w_star"), where + ".w_star");
  if (static_cast<int>(spec.w_star.size()) != spec.dimension)
    fail(where + ".w_star", "length must equal \"dimension\"");
  spec.regressor_variances =
      parse_variances(get(v, where, "regressor_variances"), where + ".regressor_variances");
  spec.noise_variances =
      parse_variances(get(v, where, "noise_variances"), where + ".noise_variances");
  return spec;
}

std::vector<ArmConfig> parse_arms(const json& v) {
  const std::string where = "arms";
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array");
  std::vector<ArmConfig> arms;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& a = v[i];
    if (!a.is_object()) fail(at, "expected an object");
    check_keys(a, at, {"algorithm", "step_size", "label"});
    ArmConfig arm;
    const json& alg = get(a, at, "algorithm");
    if (!alg.is_string()) fail(at + ".algorithm", "expected a string");
    const auto parsed = algorithm_from_string(alg.get<std::string>());
    if (!parsed)
      fail(at + ".algorithm", "unknown algorithm \"" + alg.get<std::string>() + "\"");
    arm.algorithm = *parsed;
    const json& mu = get(a, at, "step_size");
    if (mu.is_number()) {
      arm.step_sizes = {mu.get<double>()};
    } else {
      arm.step_sizes = as_double_vector(mu, at + ".step_size");
    }
    for (double s : arm.step_sizes)
      if (s <= 0) fail(at + ".step_size", "step sizes must be positive");
    if (a.contains("label")) {
      if (!a["label"].is_string()) fail(at + ".label", "expected a string");
      arm.label = a["label"].get<std::string>();
    } else {
      arm.label = to_string(arm.algorithm);
    }
    // Deduplicate default labels so file names stay unique.
    std::string candidate = arm.label;
    int suffix = 2;
    while (!labels.insert(candidate).second) candidate = arm.label + "_" + std::to_string(suffix++);
    arm.label = candidate;
    arms.push_back(std::move(arm));
  }
  return arms;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // nlohmann reports byte offsets; recover the line for the message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < json_text.size(); ++i)
      if (json_text[i] == '\n') ++line;
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    if (!root.is_object()) fail("config", "top level must be an object");
    check_keys(root, "config",
               {"schema_version", "network", "combination", "delays", "model", "arms", "trials",
                "horizon", "master_seed", "output", "results"});
    ExperimentConfig config;
    config.schema_version = get_int(root, "config", "schema_version");
    if (config.schema_version != 1) fail("config.schema_version", "only version 1 is supported");
    config.network = parse_network(get(root, "config", "network"));
    config.combination = parse_combination(get(root, "config", "combination"));
    config.delays = parse_delays(get(root, "config", "delays"));
    config.model = parse_model(get(root, "config", "model"));
    config.arms = parse_arms(get(root, "config", "arms"));
    config.trials = get_int(root, "config", "trials");
    if (config.trials < 1) fail("config.trials", "must be at least 1");
    config.horizon = get_int(root, "config", "horizon");
    if (config.horizon < 1) fail("config.horizon", "must be at least 1");
    const json& seed = get(root, "config", "master_seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
      fail("config.master_seed", "expected an unsigned integer");
    config.master_seed = seed.get<std::uint64_t>();
    const json& output = get(root, "config", "output");
    if (!output.is_string()) fail("config.output", "expected a string");
    config.output = output.get<std::string>();
    return config;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

namespace {

std::vector<double> resolve_variances(const VarianceSpec& spec, int nodes,
                                      std::mt19937_64& rng, const std::string& where) {
  if (spec.values) {
    if (static_cast<int>(spec.values->size()) != nodes)
      fail(where + ".values", "expected one value per node");
    return *spec.values;
  }
  std::uniform_real_distribution<double> dist((*spec.uniform_range)[0],
                                              (*spec.uniform_range)[1]);
  std::vector<double> values(nodes);
  for (double& v : values) v = dist(rng);
  return values;
}

}  // namespace

ResolvedScenario resolve_scenario(const ExperimentConfig& config,
                                  std::optional<std::uint64_t> seed_override) {
  const std::uint64_t master = seed_override.value_or(config.master_seed);
  const int n = config.network.nodes;

  // Topology: explicit edge list, or a seeded geometric draw.
  std::optional<Eigen::MatrixX2d> positions;
  if (config.network.positions) {
    Eigen::MatrixX2d pos(n, 2);
    for (int k = 0; k < n; ++k) {
      pos(k, 0) = (*config.network.positions)[k][0];
      pos(k, 1) = (*config.network.positions)[k][1];
    }
    positions = std::move(pos);
  }
  NetworkTopology topology =
      config.network.edges
          ? NetworkTopology(n, *config.network.edges, std::move(positions))
          : NetworkTopology::random_geometric(n, *config.network.geometric_radius,
                                              derive_seed(master, stream_tag::topology));

  CombinationMatrix combination = [&] {
    if (config.combination.uniform) return build_uniform_combination(topology);
    Eigen::MatrixXd m(n, n);
    if (static_cast<int>(config.combination.matrix.size()) != n)
      fail("combination.matrix", "expected N rows");
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(config.combination.matrix[r].size()) != n)
        fail("combination.matrix", "expected N columns per row");
      for (int c = 0; c < n; ++c) m(r, c) = config.combination.matrix[r][c];
    }
    try {
      return build_explicit_combination(topology, m);
    } catch (const std::invalid_argument& e) {
      fail("combination.matrix", e.what());
    }
  }();

  DelayProfile delays = [&]() -> DelayProfile {
    try {
      switch (config.delays.mode) {
        case DelaySpec::Mode::constant:
          return build_constant_delays(topology, config.delays.constant);
        case DelaySpec::Mode::distance_proportional:
          return build_distance_delays(topology, config.delays.scale);
        case DelaySpec::Mode::explicit_matrix: {
          Eigen::MatrixXi tau(n, n);
          if (static_cast<int>(config.delays.tau.size()) != n)
            fail("delays.tau", "expected N rows");
          for (int r = 0; r < n; ++r) {
            if (static_cast<int>(config.delays.tau[r].size()) != n)
              fail("delays.tau", "expected N columns per row");
            for (int c = 0; c < n; ++c) tau(r, c) = config.delays.tau[r][c];
          }
          return build_explicit_delays(topology, tau);
        }
      }
      fail("delays", "unreachable");
    } catch (const std::invalid_argument& e) {
      fail("delays", e.what());
    }
  }();

  // Model variances: regressor first, then noise, from one derived stream.
  std::mt19937_64 model_rng(derive_seed(master, stream_tag::model));
  const std::vector<double> sigma_x =
      resolve_variances(config.model.regressor_variances, n, model_rng,
                        "model.regressor_variances");
  const std::vector<double> sigma_v =
      resolve_variances(config.model.noise_variances, n, model_rng, "model.noise_variances");
  for (double v : sigma_v)
    if (v < 0) fail("model.noise_variances", "must be nonnegative");

  Eigen::VectorXd w_star(config.model.dimension);
  for (int i = 0; i < config.model.dimension; ++i) w_star(i) = config.model.w_star[i];
  SignalModel model = [&] {
    try {
      return SignalModel::isotropic(w_star, sigma_x, sigma_v);
    } catch (const std::invalid_argument& e) {
      fail("model", e.what());
    }
  }();

  ResolvedScenario scenario{std::move(topology), std::move(combination), std::move(delays),
                            std::move(model),    {},
                            config.combination.uniform,
                            config.trials,       config.horizon,
                            master,              config.output};
  for (const ArmConfig& arm : config.arms) {
    Eigen::VectorXd mu(n);
    if (arm.step_sizes.size() == 1) {
      mu.setConstant(arm.step_sizes[0]);
    } else if (static_cast<int>(arm.step_sizes.size()) == n) {
      for (int k = 0; k < n; ++k) mu(k) = arm.step_sizes[k];
    } else {
      fail("arms", "step_size must be a scalar or one value per node");
    }
    scenario.arms.push_back(ArmSpec{arm.label, arm.algorithm, std::move(mu)});
  }
  return scenario;
}

std::string resolved_config_json(const ResolvedScenario& scenario) {
  json root;
  root["schema_version"] = 1;

  json network;
  network["nodes"] = scenario.topology.num_nodes();
  json edges = json::array();
  for (const auto& [a, b] : scenario.topology.edges()) edges.push_back({a, b});
  network["edges"] = std::move(edges);
  if (scenario.topology.has_positions()) {
    json positions = json::array();
    for (int k = 0; k < scenario.topology.num_nodes(); ++k) {
      positions.push_back(
          {scenario.topology.positions()(k, 0), scenario.topology.positions()(k, 1)});
    }
    network["positions"] = std::move(positions);
  }
  root["network"] = std::move(network);

  if (scenario.uniform_combination) {
    root["combination"] = "uniform";
  } else {
    json rows = json::array();
    const Eigen::MatrixXd& a = scenario.combination.weights;
    for (int r = 0; r < a.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
      rows.push_back(std::move(row));
    }
    root["combination"] = {{"matrix", std::move(rows)}};
  }

  json tau_rows = json::array();
  for (int r = 0; r < scenario.delays.tau.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < scenario.delays.tau.cols(); ++c) row.push_back(scenario.delays.tau(r, c));
    tau_rows.push_back(std::move(row));
  }
  root["delays"] = {{"mode", "explicit"}, {"tau", std::move(tau_rows)}};

  json model;
  model["dimension"] = scenario.model.dimension();
  json w_star = json::array();
  for (int i = 0; i < scenario.model.dimension(); ++i)
    w_star.push_back(scenario.model.w_star()(i));
  model["w_star"] = std::move(w_star);
  json sigma_x = json::array();
  json sigma_v = json::array();
  for (int k = 0; k < scenario.model.num_nodes(); ++k) {
    sigma_x.push_back(scenario.model.covariance(k)(0, 0));
    sigma_v.push_back(scenario.model.noise_variance(k));
  }
  model["regressor_variances"] = {{"values", std::move(sigma_x)}};
  model["noise_variances"] = {{"values", std::move(sigma_v)}};
  root["model"] = std::move(model);

  json arms = json::array();
  for (const ArmSpec& arm : scenario.arms) {
    json entry;
    entry["label"] = arm.label;
    entry["algorithm"] = to_string(arm.algorithm);
    const bool shared = (arm.step_sizes.array() == arm.step_sizes(0)).all();
    if (shared) {
      entry["step_size"] = arm.step_sizes(0);
    } else {
      json mu = json::array();
      for (int k = 0; k < arm.step_sizes.size(); ++k) mu.push_back(arm.step_sizes(k));
      entry["step_size"] = std::move(mu);
    }
    arms.push_back(std::move(entry));
  }
  root["arms"] = std::move(arms);

  root["trials"] = scenario.trials;
  root["horizon"] = scenario.horizon;
  root["master_seed"] = scenario.master_seed;
  root["output"] = scenario.output;
  return root.dump(2);
}

}  // namespace delaydiff
