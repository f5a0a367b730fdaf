#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "semiadapt/rls.hpp"

namespace semiadapt {

struct UncertaintyConfig {
  int window_size = 10;       // parameter-increment window n_w
  int noise_window = 50;      // residual window for the noise-variance estimate
  double noise_prior = 1e-4;  // per-coordinate variance before 2 residuals exist
  bool assume_stationary = false;  // force the drift estimate to zero
};

// Parameter mean-squared-error bookkeeping, kept block diagonal like the
// adaptation gain: the recursion never couples output blocks, so no
// cross-block covariance is generated.
struct UncertaintyState {
  UncertaintyConfig config;
  std::vector<Eigen::MatrixXd> x_theta_theta;  // per-block parameter MSEE
  std::vector<Eigen::VectorXd> e_theta_tilde;  // per-block estimation-bias recursion
  std::deque<Eigen::VectorXd> dtheta_window;   // increments realized by previous updates
  Eigen::VectorXd noise_var;                   // per output coordinate
  long psd_clip_count = 0;
  int block_dim = 0;
  int n_outputs = 0;
};

struct Ellipsoid {
  Eigen::Vector3d center;
  Eigen::Matrix3d shape;  // quadratic form matrix: inside iff (p-c)^T shape^+ (p-c) <= 1
  double confidence = 0.95;

  // Pseudo-inverse membership: zero-variance directions are exact constraints.
  bool contains(const Eigen::Vector3d& point) const;
};

struct PredictionWithUncertainty {
  Eigen::VectorXd mean;
  Eigen::MatrixXd msee;
  std::vector<Ellipsoid> ellipsoids;
};

UncertaintyState init_uncertainty(int n_outputs, int block_dim, const UncertaintyConfig& config);

// Drift estimate: mean of the increment window, zero when the window is empty
// or the state is configured stationary. The window holds increments realized
// by previous updates, so the first update sees an empty window.
Eigen::VectorXd delta_theta(const UncertaintyState& u);

// Prediction MSEE: diagonal entry d is phi^T X_d phi + noise_var(d); the
// block-diagonal regressor and block-diagonal parameter MSEE leave all
// cross terms zero.
Eigen::MatrixXd propagate_state_msee(const UncertaintyState& u, const Eigen::VectorXd& features);

// Parameter MSEE and bias recursion for one adaptation step. `state_before`
// is the adaptation state as it was when the paired parameter update ran; the
// gain that update applied is recomputed here through the shared gain step.
// Each block is symmetrized and eigenvalue-clipped to PSD; clips are counted.
void update_param_msee(UncertaintyState& u, const RlsState& state_before,
                       const Eigen::VectorXd& features, const Eigen::VectorXd& apriori_error,
                       const Eigen::MatrixXd& x_msee);

// Per-coordinate sample variance of the most recent `window` residuals.
// Fewer than 2 residuals: returns `prior`.
Eigen::VectorXd estimate_noise_variance(const std::deque<Eigen::VectorXd>& residuals, int window,
                                        const Eigen::VectorXd& prior);

// One ellipsoid per 3-D future step, scaled by the chi-square(3) quantile at
// the requested confidence.
std::vector<Ellipsoid> error_ellipsoids(const Eigen::VectorXd& mean, const Eigen::MatrixXd& msee,
                                        double confidence);

double chi2_quantile_3dof(double confidence);

}  // namespace semiadapt
