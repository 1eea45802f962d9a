#include "delaydiff/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace delaydiff {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// Symmetric square root via the eigendecomposition; also validates SPD.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& r, int node) {
  require((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, r.cwiseAbs().maxCoeff()),
          "model: covariance of node " + std::to_string(node) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  require(es.info() == Eigen::Success,
          "model: eigendecomposition failed for node " + std::to_string(node));
  require(es.eigenvalues().minCoeff() > 0,
          "model: covariance of node " + std::to_string(node) + " is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

SignalModel::SignalModel(Eigen::VectorXd w_star, std::vector<Eigen::MatrixXd> covariances,
                         std::vector<double> noise_variances)
    : w_star_(std::move(w_star)),
      covariances_(std::move(covariances)),
      noise_variances_(std::move(noise_variances)) {
  const int m = static_cast<int>(w_star_.size());
  require(m >= 1, "model: dimension must be positive");
  require(!covariances_.empty(), "model: need at least one node");
  require(covariances_.size() == noise_variances_.size(),
          "model: covariance and noise variance counts differ");
  sqrts_.reserve(covariances_.size());
  noise_stddevs_.reserve(noise_variances_.size());
  for (std::size_t k = 0; k < covariances_.size(); ++k) {
    require(covariances_[k].rows() == m && covariances_[k].cols() == m,
            "model: covariance of node " + std::to_string(k) + " must be M x M");
    sqrts_.push_back(spd_sqrt(covariances_[k], static_cast<int>(k)));
    // Zero noise is admitted for noise-free studies; negative is not.
    require(noise_variances_[k] >= 0,
            "model: negative noise variance at node " + std::to_string(k));
    noise_stddevs_.push_back(std::sqrt(noise_variances_[k]));
  }
}

SignalModel SignalModel::isotropic(Eigen::VectorXd w_star,
                                   const std::vector<double>& regressor_variances,
                                   std::vector<double> noise_variances) {
  const int m = static_cast<int>(w_star.size());
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(regressor_variances.size());
  for (std::size_t k = 0; k < regressor_variances.size(); ++k) {
    require(regressor_variances[k] > 0,
            "model: regressor variance must be positive at node " + std::to_string(k));
    covs.push_back(regressor_variances[k] * Eigen::MatrixXd::Identity(m, m));
  }
  return SignalModel(std::move(w_star), std::move(covs), std::move(noise_variances));
}

DataSample sample_data(const SignalModel& model, int node, std::mt19937_64& rng) {
  const int m = model.dimension();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z(i) = gauss(rng);
  DataSample sample;
  sample.regressor = model.covariance_sqrt(node) * z;
  const double noise = model.noise_stddev(node) * gauss(rng);
  sample.measurement = sample.regressor.dot(model.w_star()) + noise;
  return sample;
}

Eigen::VectorXd optimal_weights(const std::vector<Eigen::MatrixXd>& covariances,
                                const std::vector<Eigen::VectorXd>& cross_correlations) {
  require(!covariances.empty() && covariances.size() == cross_correlations.size(),
          "optimal_weights: inconsistent inputs");
  Eigen::MatrixXd r_sum = covariances[0];
  Eigen::VectorXd rhs = cross_correlations[0];
  for (std::size_t k = 1; k < covariances.size(); ++k) {
    r_sum += covariances[k];
    rhs += cross_correlations[k];
  }
  Eigen::LDLT<Eigen::MatrixXd> solver(r_sum);
  require(solver.info() == Eigen::Success && solver.isPositive(),
          "optimal_weights: aggregate covariance is singular");
  return solver.solve(rhs);
}

Eigen::VectorXd optimal_weights(const SignalModel& model) {
  std::vector<Eigen::MatrixXd> covs;
  std::vector<Eigen::VectorXd> cross;
  covs.reserve(model.num_nodes());
  cross.reserve(model.num_nodes());
  for (int k = 0; k < model.num_nodes(); ++k) {
    covs.push_back(model.covariance(k));
    cross.push_back(model.covariance(k) * model.w_star());
  }
  return optimal_weights(covs, cross);
}

Eigen::MatrixXd network_covariance(const SignalModel& model) {
  const int m = model.dimension();
  const int n = model.num_nodes();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m * n, m * n);
  for (int k = 0; k < n; ++k) r.block(k * m, k * m, m, m) = model.covariance(k);
  return r;
}

Eigen::MatrixXd noise_matrix(const SignalModel& model, const Eigen::VectorXd& step_sizes) {
  const int m = model.dimension();
  const int n = model.num_nodes();
  require(step_sizes.size() == n, "noise_matrix: need one step size per node");
  require((step_sizes.array() >= 0).all(), "noise_matrix: step sizes must be nonnegative");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m * n, m * n);
  for (int k = 0; k < n; ++k) {
    s.block(k * m, k * m, m, m) =
        step_sizes(k) * step_sizes(k) * model.noise_variance(k) * model.covariance(k);
  }
  return s;
}

}  // namespace delaydiff
