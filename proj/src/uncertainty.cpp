#include "semiadapt/uncertainty.hpp"

#include <cmath>

#include "semiadapt/errors.hpp"

namespace semiadapt {

UncertaintyState init_uncertainty(int n_outputs, int block_dim, const UncertaintyConfig& config) {
  if (config.window_size < 1) throw ConfigError("uncertainty window_size must be >= 1");
  if (config.noise_window < 2) throw ConfigError("uncertainty noise_window must be >= 2");
  if (config.noise_prior < 0.0) throw ConfigError("uncertainty noise_prior must be >= 0");

  UncertaintyState u;
  u.config = config;
  u.block_dim = block_dim;
  u.n_outputs = n_outputs;
  u.x_theta_theta.assign(n_outputs, Eigen::MatrixXd::Zero(block_dim, block_dim));
  u.e_theta_tilde.assign(n_outputs, Eigen::VectorXd::Zero(block_dim));
  u.noise_var = Eigen::VectorXd::Constant(n_outputs, config.noise_prior);
  return u;
}

Eigen::VectorXd delta_theta(const UncertaintyState& u) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(u.n_outputs * u.block_dim);
  if (u.config.assume_stationary || u.dtheta_window.empty()) return mean;
  for (const auto& d : u.dtheta_window) mean += d;
  mean /= static_cast<double>(u.dtheta_window.size());
  return mean;
}

Eigen::MatrixXd propagate_state_msee(const UncertaintyState& u, const Eigen::VectorXd& features) {
  if (features.size() != u.block_dim)
    throw DimensionError("propagate_state_msee: feature length " +
                         std::to_string(features.size()) + " != " + std::to_string(u.block_dim));
  Eigen::MatrixXd msee = Eigen::MatrixXd::Zero(u.n_outputs, u.n_outputs);
  for (int d = 0; d < u.n_outputs; ++d)
    msee(d, d) = features.dot(u.x_theta_theta[d] * features) + u.noise_var[d];
  return msee;
}

void update_param_msee(UncertaintyState& u, const RlsState& state_before,
                       const Eigen::VectorXd& features, const Eigen::VectorXd& apriori_error,
                       const Eigen::MatrixXd& x_msee) {
  if (u.config.window_size < 1) throw ConfigError("uncertainty window_size must be >= 1");
  if (features.size() != u.block_dim || apriori_error.size() != u.n_outputs ||
      x_msee.rows() != u.n_outputs || x_msee.cols() != u.n_outputs)
    throw DimensionError("update_param_msee: dimension mismatch");

  const Eigen::VectorXd drift = delta_theta(u);
  Eigen::VectorXd increment(u.n_outputs * u.block_dim);

  for (int d = 0; d < u.n_outputs; ++d) {
    const GainStep step = rls_gain_step(state_before.gain[d], features,
                                        state_before.config.lambda1,
                                        state_before.config.lambda2);
    const Eigen::VectorXd& g = step.gain_phi;  // the vector applied to the innovation
    increment.segment(d * u.block_dim, u.block_dim) = g * apriori_error[d];

    const Eigen::VectorXd drift_d = drift.segment(d * u.block_dim, u.block_dim);

    // Bias recursion: E' = (I - F phi phi^T) E + drift.
    Eigen::VectorXd& e = u.e_theta_tilde[d];
    e = e - g * features.dot(e) + drift_d;

    // Parameter MSEE, written term by term as derived from the update law,
    // then projected back to PSD (the drift outer product enters negatively
    // and can push eigenvalues below zero).
    Eigen::MatrixXd& x = u.x_theta_theta[d];
    const Eigen::VectorXd xphi = x * features;
    Eigen::MatrixXd next = x_msee(d, d) * (g * g.transpose());
    next.noalias() -= xphi * g.transpose();
    next.noalias() -= g * xphi.transpose();
    next.noalias() += e * drift_d.transpose();
    next.noalias() += drift_d * e.transpose();
    next.noalias() -= drift_d * drift_d.transpose();
    next += x;
    next = 0.5 * (next + next.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(next);
    if (eig.info() != Eigen::Success)
      throw NumericalError("update_param_msee: eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() < 0.0) {
      ++u.psd_clip_count;
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      next = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
      next = 0.5 * (next + next.transpose().eval());
    }
    x = std::move(next);
  }

  u.dtheta_window.push_back(std::move(increment));
  while (static_cast<int>(u.dtheta_window.size()) > u.config.window_size)
    u.dtheta_window.pop_front();
}

Eigen::VectorXd estimate_noise_variance(const std::deque<Eigen::VectorXd>& residuals, int window,
                                        const Eigen::VectorXd& prior) {
  if (window < 2) throw ConfigError("estimate_noise_variance: window must be >= 2");
  const int have = static_cast<int>(residuals.size());
  if (have < 2) return prior;

  const int use = std::min(window, have);
  const int dim = static_cast<int>(residuals.back().size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (int i = have - use; i < have; ++i) mean += residuals[static_cast<std::size_t>(i)];
  mean /= static_cast<double>(use);

  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (int i = have - use; i < have; ++i) {
    const Eigen::VectorXd dev = residuals[static_cast<std::size_t>(i)] - mean;
    var += dev.cwiseProduct(dev);
  }
  var /= static_cast<double>(use - 1);
  return var;
}

namespace {

double chi2_cdf_3dof(double x) {
  if (x <= 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * x)) - std::sqrt(2.0 / M_PI) * std::sqrt(x) * std::exp(-0.5 * x);
}

}  // namespace

double chi2_quantile_3dof(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("confidence must be in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_cdf_3dof(hi) < confidence) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf_3dof(mid) < confidence)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

bool Ellipsoid::contains(const Eigen::Vector3d& point) const {
  const Eigen::Vector3d dev = point - center;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(shape);
  const double lam_max = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double zero_tol = 1e-15 * (1.0 + lam_max);
  const double exact_tol = 1e-12 * (1.0 + center.norm());
  double quad = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double lam = eig.eigenvalues()[i];
    const double comp = eig.eigenvectors().col(i).dot(dev);
    if (lam <= zero_tol) {
      if (std::abs(comp) > exact_tol) return false;  // exact direction
    } else {
      quad += comp * comp / lam;
    }
  }
  return quad <= 1.0;
}

std::vector<Ellipsoid> error_ellipsoids(const Eigen::VectorXd& mean, const Eigen::MatrixXd& msee,
                                        double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("confidence must be in (0, 1)");
  if (mean.size() % 3 != 0 || msee.rows() != mean.size() || msee.cols() != mean.size())
    throw DimensionError("error_ellipsoids: mean/msee dimensions inconsistent");

  const double q = chi2_quantile_3dof(confidence);
  const int horizon = static_cast<int>(mean.size() / 3);
  std::vector<Ellipsoid> out;
  out.reserve(horizon);
  for (int m = 0; m < horizon; ++m) {
    Ellipsoid e;
    e.center = mean.segment<3>(3 * m);
    e.shape = q * msee.block<3, 3>(3 * m, 3 * m);
    e.confidence = confidence;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace semiadapt
