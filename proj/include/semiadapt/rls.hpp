#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semiadapt/mlp.hpp"

namespace semiadapt {

struct RlsConfig {
  double lambda1 = 0.998;    // forgetting factor, (0, 1]
  double lambda2 = 1.0;      // gain weighting, [0, 2]
  double f_init_scale = 1000.0;
};

// Flattened bias-augmented output-layer parameters and their adaptation gain.
// The parameter vector stacks one block per output coordinate; each block is
// [weights for that output | bias], length n_h + 1. The gain is kept as one
// symmetric positive-definite matrix per block: the regressor is block
// diagonal, so the recursion never couples blocks and each measurement
// coordinate drives a scalar-denominator update of its own block.
struct RlsState {
  Eigen::VectorXd theta;               // D * (n_h + 1)
  std::vector<Eigen::MatrixXd> gain;   // D blocks of (n_h + 1) x (n_h + 1)
  RlsConfig config;
  int block_dim = 0;   // n_h + 1
  int n_outputs = 0;   // D

  Eigen::VectorXd theta_block(int d) const { return theta.segment(d * block_dim, block_dim); }
};

struct RlsUpdate {
  Eigen::VectorXd apriori_error;
  bool degeneracy = false;  // a gain diagonal entry fell below 1e-12
};

// One gain-matrix step: F' = (F - lambda2 * (F phi)(F phi)^T / den) / lambda1
// with den = lambda1 + lambda2 * phi^T F phi, then symmetrized. gain_phi is
// F' * phi, the vector that scales the innovation in the parameter update.
// Shared by the parameter update and the error-propagation bookkeeping so
// both see bit-identical gains.
struct GainStep {
  Eigen::MatrixXd gain;
  Eigen::VectorXd gain_phi;
};
GainStep rls_gain_step(const Eigen::MatrixXd& gain, const Eigen::VectorXd& phi,
                       double lambda1, double lambda2);

RlsState init_rls(const MlpModel& model, const RlsConfig& config);

// Prediction for one feature vector: output d = features . theta_block(d).
// Equivalent to applying the block-diagonal regressor to theta.
Eigen::VectorXd rls_predict(const RlsState& state, const Eigen::VectorXd& features);

// Gain update first, then theta_block(d) += gain_phi * apriori_error(d).
RlsUpdate rls_update(RlsState& state, const Eigen::VectorXd& features,
                     const Eigen::VectorXd& measurement);

// Flatten / unflatten between a model's output layer and the parameter vector.
Eigen::VectorXd flatten_output_layer(const MlpModel& model);
std::pair<Eigen::MatrixXd, Eigen::VectorXd> theta_to_output_layer(const Eigen::VectorXd& theta,
                                                                  int hidden_dim, int n_outputs);

nlohmann::json rls_state_to_json(const RlsState& state);
RlsState rls_state_from_json(const nlohmann::json& j);

}  // namespace semiadapt
