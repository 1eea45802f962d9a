#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace delaydiff {

// Linear regression data model d = x'w* + v with per-node regressor
// covariance R_k and noise variance sigma2_v,k. Regressors are zero-mean
// Gaussian; only second-order moments enter the analysis.
class SignalModel {
 public:
  SignalModel(Eigen::VectorXd w_star, std::vector<Eigen::MatrixXd> covariances,
              std::vector<double> noise_variances);

  // R_k = sigma2_x,k * I.
  static SignalModel isotropic(Eigen::VectorXd w_star,
                               const std::vector<double>& regressor_variances,
                               std::vector<double> noise_variances);

  int dimension() const { return static_cast<int>(w_star_.size()); }
  int num_nodes() const { return static_cast<int>(covariances_.size()); }
  const Eigen::VectorXd& w_star() const { return w_star_; }
  const Eigen::MatrixXd& covariance(int node) const { return covariances_[node]; }
  const Eigen::MatrixXd& covariance_sqrt(int node) const { return sqrts_[node]; }
  double noise_variance(int node) const { return noise_variances_[node]; }
  double noise_stddev(int node) const { return noise_stddevs_[node]; }

 private:
  Eigen::VectorXd w_star_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> sqrts_;  // symmetric square roots
  std::vector<double> noise_variances_;
  std::vector<double> noise_stddevs_;
};

struct DataSample {
  Eigen::VectorXd regressor;
  double measurement = 0.0;
};

// One draw of (x, d) for `node`; temporally white, and independent across
// nodes/trials as long as each uses its own engine.
DataSample sample_data(const SignalModel& model, int node, std::mt19937_64& rng);

// (sum_k R_k)^{-1} (sum_k r_k): minimizer of the aggregate quadratic cost.
Eigen::VectorXd optimal_weights(const std::vector<Eigen::MatrixXd>& covariances,
                                const std::vector<Eigen::VectorXd>& cross_correlations);
// Synthetic-model shortcut: r_k = R_k w*, so the result must recover w*.
Eigen::VectorXd optimal_weights(const SignalModel& model);

// bdiag{R_1, ..., R_N}.
Eigen::MatrixXd network_covariance(const SignalModel& model);

// bdiag{mu_k^2 sigma2_v,k R_k}.
Eigen::MatrixXd noise_matrix(const SignalModel& model, const Eigen::VectorXd& step_sizes);

}  // namespace delaydiff
