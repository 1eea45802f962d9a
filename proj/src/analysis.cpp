#include "delaydiff/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace delaydiff {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

ExtendedOperators::ExtendedOperators(ExtendedCombination combination, SignalModel model,
                                     Eigen::VectorXd step_sizes)
    : combination_(std::move(combination)),
      model_(std::move(model)),
      step_sizes_(std::move(step_sizes)) {
  const int n = model_.num_nodes();
  require(combination_.num_nodes == n, "operators: combination/model node mismatch");
  require(step_sizes_.size() == n, "operators: need one step size per node");
  require((step_sizes_.array() >= 0).all(), "operators: step sizes must be nonnegative");
  mn_ = model_.dimension() * n;
  for (int t = 0; t < combination_.depth; ++t) {
    const Eigen::MatrixXd& part = combination_.parts[t];
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        if (part(l, k) > 0) links_.push_back(Link{l, k, t, part(l, k)});
      }
    }
  }
}

Eigen::MatrixXd ExtendedOperators::apply_mean(const Eigen::MatrixXd& x) const {
  const int m = model_.dimension();
  const int n = model_.num_nodes();
  const int t = depth();
  require(x.rows() == mn_ * t, "apply_mean: input has wrong row count");
  const auto cols = x.cols();

  // Leading block through (I - M R): z_k = x_k - mu_k R_k x_k.
  Eigen::MatrixXd z0(mn_, cols);
  for (int k = 0; k < n; ++k) {
    const auto xk = x.middleRows(k * m, m);
    z0.middleRows(k * m, m) = xk - step_sizes_(k) * (model_.covariance(k) * xk);
  }

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(mn_ * t, cols);
  // Combination block row: every link pulls the block at its own delay.
  for (const Link& link : links_) {
    const auto source = link.delay == 0 ? z0.middleRows(link.from * m, m)
                                        : x.middleRows(link.delay * mn_ + link.from * m, m);
    y.middleRows(link.to * m, m).noalias() += link.weight * source;
  }
  // Shift: the remaining block rows repeat the previous stack top-down.
  if (t > 1) {
    y.middleRows(mn_, mn_) = z0;
    if (t > 2) y.middleRows(2 * mn_, mn_ * (t - 2)) = x.middleRows(mn_, mn_ * (t - 2));
  }
  return y;
}

Eigen::MatrixXd ExtendedOperators::dense_extended_combination() const {
  return kron(combination_.node_extended, Eigen::MatrixXd::Identity(model_.dimension(),
                                                                    model_.dimension()));
}

Eigen::MatrixXd ExtendedOperators::dense_mean() const {
  const int m = model_.dimension();
  const int n = model_.num_nodes();
  Eigen::MatrixXd b = dense_extended_combination();
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXd scale =
        Eigen::MatrixXd::Identity(m, m) - step_sizes_(k) * model_.covariance(k);
    b.middleCols(k * m, m) = (b.middleCols(k * m, m) * scale).eval();
  }
  return b;
}

Eigen::MatrixXd ExtendedOperators::noise_factor() const {
  const int m = model_.dimension();
  const int n = model_.num_nodes();
  const int t = depth();

  // Per-node lower factor of mu^2 sigma2_v R: mu sigma_v chol(R).
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(n);
  for (int k = 0; k < n; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(model_.covariance(k));
    require(llt.info() == Eigen::Success, "noise_factor: covariance not positive definite");
    factors.push_back(step_sizes_(k) * model_.noise_stddev(k) *
                      Eigen::MatrixXd(llt.matrixL()));
  }

  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(mn_ * t, mn_);
  for (const Link& link : links_) {
    if (link.delay != 0) continue;
    u.block(link.to * m, link.from * m, m, m) = link.weight * factors[link.from];
  }
  if (t > 1) {
    for (int k = 0; k < n; ++k) u.block(mn_ + k * m, k * m, m, m) = factors[k];
  }
  return u;
}

Eigen::MatrixXd ExtendedOperators::dense_noise() const {
  const Eigen::MatrixXd u = noise_factor();
  return u * u.transpose();
}

Eigen::VectorXd ExtendedOperators::initial_error(const Eigen::VectorXd& w_star) const {
  const int m = model_.dimension();
  require(w_star.size() == m, "initial_error: wrong dimension");
  Eigen::VectorXd e(ext_dim());
  for (int block = 0; block < ext_dim() / m; ++block) e.segment(block * m, m) = w_star;
  return e;
}

ExtendedOperators build_extended_operators(const ExtendedCombination& combination,
                                           const SignalModel& model,
                                           const Eigen::VectorXd& step_sizes) {
  return ExtendedOperators(combination, model, step_sizes);
}

Eigen::MatrixXd build_mean_matrix(const ExtendedOperators& ops) { return ops.dense_mean(); }

Eigen::MatrixXd build_noise_operator(const ExtendedOperators& ops) { return ops.dense_noise(); }

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::VectorXd stepsize_bounds(const SignalModel& model) {
  Eigen::VectorXd bounds(model.num_nodes());
  for (int k = 0; k < model.num_nodes(); ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.covariance(k));
    bounds(k) = 2.0 / es.eigenvalues().maxCoeff();
  }
  return bounds;
}

double block_max_norm(const Eigen::MatrixXd& m, int block_dim) {
  require(block_dim >= 1 && m.rows() % block_dim == 0 && m.cols() % block_dim == 0,
          "block_max_norm: dimensions not divisible by block size");
  const int rows = static_cast<int>(m.rows()) / block_dim;
  const int cols = static_cast<int>(m.cols()) / block_dim;
  double best = 0;
  for (int i = 0; i < rows; ++i) {
    double row_sum = 0;
    for (int j = 0; j < cols; ++j) {
      const Eigen::MatrixXd block = m.block(i * block_dim, j * block_dim, block_dim, block_dim);
      if (block.isZero(0.0)) continue;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
      row_sum += svd.singularValues()(0);
    }
    best = std::max(best, row_sum);
  }
  return best;
}

namespace {

constexpr int kDenseEigLimit = 2000;

double dense_spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
  if (m.rows() == 0) return 0.0;
  if (m.rows() <= kDenseEigLimit) return dense_spectral_radius(m);
  return spectral_radius_iterative([&m](const Eigen::MatrixXd& x) { return m * x; },
                                   static_cast<int>(m.rows()));
}

double spectral_radius_iterative(
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply, int dim, double tol,
    int max_iters, int block) {
  require(dim >= 1, "spectral_radius_iterative: empty operator");
  block = std::min(block, dim);
  std::mt19937_64 rng(0x5eed5eedull);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd q(dim, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < dim; ++i) q(i, j) = gauss(rng);
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
      Eigen::MatrixXd::Identity(dim, block);

  double estimate = 0;
  int stable = 0;
  constexpr int kStableIters = 20;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::MatrixXd z = apply(q);
    const Eigen::MatrixXd h = q.transpose() * z;  // projected block
    const double next = dense_spectral_radius(h);
    if (std::abs(next - estimate) <= tol * std::max(1.0, std::abs(next))) {
      if (++stable >= kStableIters) return next;
    } else {
      stable = 0;
    }
    estimate = next;
    if (z.isZero(0.0)) return 0.0;  // nilpotent directions collapsed
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() *
        Eigen::MatrixXd::Identity(dim, block);
  }
  return estimate;
}

StabilityReport check_mean_stability(const ExtendedOperators& ops) {
  const SignalModel& model = ops.model();
  const int m = model.dimension();
  const int n = model.num_nodes();
  Eigen::MatrixXd contraction = Eigen::MatrixXd::Zero(ops.network_dim(), ops.network_dim());
  for (int k = 0; k < n; ++k) {
    contraction.block(k * m, k * m, m, m) =
        Eigen::MatrixXd::Identity(m, m) - ops.step_sizes()(k) * model.covariance(k);
  }

  StabilityReport report;
  report.block_norm = block_max_norm(contraction, m);
  report.norm_condition = report.block_norm < 1.0;
  if (ops.ext_dim() <= kDenseEigLimit) {
    report.spectral_radius = spectral_radius(ops.dense_mean());
  } else {
    report.spectral_radius = spectral_radius_iterative(
        [&ops](const Eigen::MatrixXd& x) { return ops.apply_mean(x); }, ops.ext_dim());
  }
  report.stable = report.spectral_radius < 1.0;
  return report;
}

std::vector<Eigen::VectorXd> mean_error_trajectory(const ExtendedOperators& ops,
                                                   const Eigen::VectorXd& w_star, int horizon) {
  require(horizon >= 0, "mean_error_trajectory: negative horizon");
  std::vector<Eigen::VectorXd> out;
  out.reserve(horizon);
  Eigen::VectorXd err = ops.initial_error(w_star);
  for (int i = 0; i < horizon; ++i) {
    err = ops.apply_mean(err);
    out.push_back(err);
  }
  return out;
}

MsdCurve transient_msd(const ExtendedOperators& ops, const Eigen::VectorXd& w_star,
                       int horizon) {
  const int mn = ops.network_dim();
  const double n = static_cast<double>(ops.num_nodes());

  Eigen::VectorXd power = ops.initial_error(w_star);  // mean-matrix power applied to w~_{-1}
  Eigen::MatrixXd shaped = ops.noise_factor();        // and to the noise factor
  double zeta = power.head(mn).squaredNorm() / n;     // value at i = -1

  MsdCurve curve;
  curve.source = MsdCurve::Source::theory;
  curve.step_sizes = ops.step_sizes();
  curve.max_delay = ops.depth() - 1;
  curve.values.reserve(horizon);
  for (int i = 0; i < horizon; ++i) {
    const Eigen::VectorXd power_next = ops.apply_mean(power);
    zeta += (power_next.head(mn).squaredNorm() - power.head(mn).squaredNorm() +
             shaped.topRows(mn).squaredNorm()) /
            n;
    curve.values.push_back(zeta);
    power = power_next;
    shaped = ops.apply_mean(shaped);
  }
  return curve;
}

SteadyState steady_state_msd(const ExtendedOperators& ops, double tol, long max_terms,
                             std::optional<double> spectral_radius_hint) {
  require(tol > 0, "steady_state_msd: tolerance must be positive");
  require(max_terms >= 1, "steady_state_msd: need at least one term");

  SteadyState result;
  double rho = spectral_radius_hint.value_or(-1.0);
  if (!spectral_radius_hint) {
    rho = ops.ext_dim() <= kDenseEigLimit
              ? spectral_radius(ops.dense_mean())
              : spectral_radius_iterative(
                    [&ops](const Eigen::MatrixXd& x) { return ops.apply_mean(x); },
                    ops.ext_dim());
  }
  if (rho >= 1.0) {
    result.precondition_ok = false;
    result.value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  const int mn = ops.network_dim();
  const double n = static_cast<double>(ops.num_nodes());
  // Early increments can vanish while information is still in transit
  // through the delay blocks, so the relative test waits a few sweeps.
  const long min_terms = 4L * ops.depth() + 4;

  Eigen::MatrixXd shaped = ops.noise_factor();
  double total = 0;
  for (long t = 0; t < max_terms; ++t) {
    const double increment = shaped.topRows(mn).squaredNorm() / n;
    total += increment;
    ++result.terms;
    if (result.terms >= min_terms &&
        increment <= tol * std::max(total, std::numeric_limits<double>::min())) {
      result.converged = true;
      break;
    }
    shaped = ops.apply_mean(shaped);
  }
  result.value = total;
  return result;
}

RhoRelation verify_rho_relation(const Eigen::MatrixXd& mean_matrix) {
  require(mean_matrix.rows() == mean_matrix.cols(), "verify_rho_relation: square input");
  const int dim = static_cast<int>(mean_matrix.rows());
  require(dim <= 60, "verify_rho_relation: instance too large (dim must be <= 60)");

  RhoRelation relation;
  relation.rho_mean = spectral_radius(mean_matrix);

  const Eigen::MatrixXd bt = mean_matrix.transpose();
  if (static_cast<long>(dim) * dim <= kDenseEigLimit) {
    relation.rho_kron = spectral_radius(kron(bt, bt));
  } else {
    // The Kronecker image acts as X -> B' X B on the unstacked argument.
    auto apply = [&](const Eigen::MatrixXd& x) {
      Eigen::MatrixXd out(x.rows(), x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Eigen::Map<const Eigen::MatrixXd> sq(x.col(j).data(), dim, dim);
        Eigen::MatrixXd image = bt * sq * mean_matrix;
        out.col(j) = Eigen::Map<Eigen::VectorXd>(image.data(), dim * dim);
      }
      return out;
    };
    relation.rho_kron = spectral_radius_iterative(apply, dim * dim, 1e-12, 200000, 8);
  }
  const double squared = relation.rho_mean * relation.rho_mean;
  relation.holds = std::abs(relation.rho_kron - squared) <= 1e-8 * std::max(1.0, squared);
  return relation;
}

}  // namespace delaydiff
