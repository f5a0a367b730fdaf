#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "semiadapt/datagen.hpp"

namespace semiadapt {

struct MlpConfig {
  int input_dim = 9;
  std::vector<int> hidden_dims = {40};
  int output_dim = 9;
  std::uint64_t seed = 0;
};

struct MlpLayer {
  Eigen::MatrixXd weights;  // rows = units, cols = inputs
  Eigen::VectorXd bias;
};

// Feedforward ReLU network. Hidden layers apply max(0, W*h + b); the output
// layer is affine. Models are immutable values once built; training works on
// a copy.
struct MlpModel {
  MlpConfig config;
  std::vector<MlpLayer> layers;  // hidden layers..., output layer

  int last_hidden_dim() const { return config.hidden_dims.back(); }
  bool operator==(const MlpModel& other) const;
};

struct TrainHyperparams {
  double learning_rate = 0.001;
  int epochs = 100;
  int batch_size = 0;  // 0 = auto: full batch below 256 samples, else 64
  std::uint64_t seed = 0;
};

MlpModel init_mlp(const MlpConfig& config);

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input);

// Last hidden layer's post-ReLU activations with a trailing constant 1, so the
// bias-augmented output layer reproduces forward exactly:
//   forward(m, s) == [W_out | b_out] * hidden_features(m, s)
Eigen::VectorXd hidden_features(const MlpModel& model, const Eigen::VectorXd& input);

// Mean over the batch of the squared-error norm ||f(s) - y||^2, and its
// gradients with respect to every weight and bias (same shapes as layers).
std::pair<double, std::vector<MlpLayer>> loss_and_gradients(const MlpModel& model,
                                                            const std::vector<Sample>& batch);

// Mini-batch gradient descent; seeded shuffle each epoch. Returns the trained
// model and the per-epoch mean training loss.
std::pair<MlpModel, std::vector<double>> train(const MlpModel& model,
                                               const std::vector<Sample>& dataset,
                                               const TrainHyperparams& hp);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace semiadapt
