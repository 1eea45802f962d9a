#include "delaydiff/algorithms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaydiff/seeding.hpp"

namespace delaydiff {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::noncooperative: return "noncooperative";
    case Algorithm::atc_ideal: return "atc_ideal";
    case Algorithm::atc_delayed: return "atc_delayed";
    case Algorithm::atc_synchronous: return "atc_synchronous";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_string(std::string_view name) {
  if (name == "noncooperative") return Algorithm::noncooperative;
  if (name == "atc_ideal") return Algorithm::atc_ideal;
  if (name == "atc_delayed") return Algorithm::atc_delayed;
  if (name == "atc_synchronous") return Algorithm::atc_synchronous;
  return std::nullopt;
}

bool has_theory(Algorithm algorithm) { return algorithm != Algorithm::atc_synchronous; }

Eigen::VectorXd adapt_step(const Eigen::VectorXd& w, const DataSample& sample, double mu) {
  const double error = sample.measurement - sample.regressor.dot(w);
  return w + mu * error * sample.regressor;
}

PsiHistory::PsiHistory(int depth, int dim) {
  if (depth < 1) throw std::invalid_argument("history: depth must be at least 1");
  slots_.assign(depth, Eigen::VectorXd::Zero(dim));
}

void PsiHistory::push(const Eigen::VectorXd& psi) {
  head_ = (head_ + static_cast<int>(slots_.size()) - 1) % static_cast<int>(slots_.size());
  slots_[head_] = psi;
}

const Eigen::VectorXd& PsiHistory::at_lag(int lag) const {
  return slots_[(head_ + lag) % static_cast<int>(slots_.size())];
}

NetworkRun::NetworkRun(const RunConfig& config, const NetworkTopology& topology,
                       const CombinationMatrix& combination, const DelayProfile& delays,
                       const SignalModel& model, std::uint64_t seed)
    : topology_(topology),
      combination_(combination),
      delays_(delays),
      model_(model),
      config_(config) {
  const int n = topology.num_nodes();
  const int m = model.dimension();
  if (model.num_nodes() != n) throw std::invalid_argument("run: model/topology node mismatch");
  if (config_.step_sizes.size() != n)
    throw std::invalid_argument("run: need one step size per node");
  if ((config_.step_sizes.array() <= 0).any())
    throw std::invalid_argument("run: step sizes must be positive");
  if (config_.horizon < 1) throw std::invalid_argument("run: horizon must be at least 1");

  Eigen::VectorXd w0 = config_.initial_estimate;
  if (w0.size() == 0) w0 = Eigen::VectorXd::Zero(m);
  if (w0.size() != m) throw std::invalid_argument("run: initial estimate has wrong dimension");

  engines_.reserve(n);
  for (int k = 0; k < n; ++k) {
    engines_.emplace_back(derive_seed(seed, stream_tag::node, static_cast<std::uint64_t>(k)));
  }
  w_.assign(n, w0);
  psi_.assign(n, w0);
  history_.assign(n, PsiHistory(delays_.depth(), m));
}

void NetworkRun::adapt_all() {
  const int n = topology_.num_nodes();
  for (int k = 0; k < n; ++k) {
    const DataSample sample = sample_data(model_, k, engines_[k]);
    psi_[k] = adapt_step(w_[k], sample, config_.step_sizes(k));
  }
}

void NetworkRun::combine_ideal() {
  const int n = topology_.num_nodes();
  for (int k = 0; k < n; ++k) {
    w_[k].setZero();
    for (int l : topology_.neighbors(k)) {
      w_[k].noalias() += combination_.weights(l, k) * psi_[l];
    }
  }
}

void NetworkRun::combine_delayed() {
  const int n = topology_.num_nodes();
  for (int k = 0; k < n; ++k) {
    w_[k].setZero();
    for (int l : topology_.neighbors(k)) {
      w_[k].noalias() += combination_.weights(l, k) * history_[l].at_lag(delays_.tau(l, k));
    }
  }
}

bool NetworkRun::advance() {
  if (diverged_) return false;
  const int n = topology_.num_nodes();

  switch (config_.algorithm) {
    case Algorithm::noncooperative:
      adapt_all();
      w_ = psi_;
      break;
    case Algorithm::atc_ideal:
      adapt_all();
      combine_ideal();
      break;
    case Algorithm::atc_delayed:
      adapt_all();
      for (int k = 0; k < n; ++k) history_[k].push(psi_[k]);
      combine_delayed();
      break;
    case Algorithm::atc_synchronous: {
      // One adapt+combine cycle per depth() ticks: data is taken at the
      // cycle start, the combined estimate lands once the slowest link
      // would have delivered, and estimates hold in between.
      const int phase = tick_ % delays_.depth();
      if (phase == 0) adapt_all();
      if (phase == delays_.depth() - 1) combine_ideal();
      break;
    }
  }

  ++tick_;
  const double guard = config_.divergence_guard;
  for (int k = 0; k < n; ++k) {
    if (!w_[k].allFinite() || w_[k].norm() > guard) {
      diverged_ = true;
      return false;
    }
  }
  return true;
}

TrialResult run_trial(const RunConfig& config, const NetworkTopology& topology,
                      const CombinationMatrix& combination, const DelayProfile& delays,
                      const SignalModel& model, std::uint64_t seed) {
  const int n = topology.num_nodes();
  NetworkRun run(config, topology, combination, delays, model, seed);

  TrialResult result;
  result.squared_errors.setConstant(config.horizon, n,
                                    std::numeric_limits<double>::quiet_NaN());
  const Eigen::VectorXd& target = model.w_star();
  for (int i = 0; i < config.horizon; ++i) {
    const bool ok = run.advance();
    if (!ok) {
      result.diverged = true;
      result.diverged_at = i;
      break;
    }
    for (int k = 0; k < n; ++k) {
      result.squared_errors(i, k) = (target - run.estimates()[k]).squaredNorm();
    }
  }
  return result;
}

}  // namespace delaydiff
