#include "semiadapt/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "semiadapt/errors.hpp"
#include "semiadapt/rng.hpp"

namespace semiadapt {

using nlohmann::json;

namespace {

void check_config(const MlpConfig& c) {
  if (c.input_dim < 1) throw ConfigError("mlp input_dim must be >= 1");
  if (c.output_dim < 1) throw ConfigError("mlp output_dim must be >= 1");
  if (c.hidden_dims.empty()) throw ConfigError("mlp hidden_dims must be non-empty");
  for (int h : c.hidden_dims)
    if (h < 1) throw ConfigError("mlp hidden dims must be >= 1");
}

// Prepares the model input from a sample, enforcing the trailing-1 convention.
Eigen::VectorXd sample_to_input(const MlpModel& model, const Sample& s) {
  if (s.input.size() != model.config.input_dim + 1)
    throw DimensionError("sample input length " + std::to_string(s.input.size()) +
                         " does not match model input_dim+1 = " +
                         std::to_string(model.config.input_dim + 1));
  if (s.input[s.input.size() - 1] != 1.0)
    throw InputError("sample input does not end with the constant 1");
  return s.input.head(model.config.input_dim);
}

}  // namespace

bool MlpModel::operator==(const MlpModel& other) const {
  if (config.input_dim != other.config.input_dim ||
      config.hidden_dims != other.config.hidden_dims ||
      config.output_dim != other.config.output_dim || layers.size() != other.layers.size())
    return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weights != other.layers[i].weights) return false;
    if (layers[i].bias != other.layers[i].bias) return false;
  }
  return true;
}

MlpModel init_mlp(const MlpConfig& config) {
  check_config(config);
  MlpModel model;
  model.config = config;
  Rng rng(config.seed);

  std::vector<int> dims;
  dims.push_back(config.input_dim);
  for (int h : config.hidden_dims) dims.push_back(h);
  dims.push_back(config.output_dim);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    MlpLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.config.input_dim)
    throw DimensionError("forward: input length " + std::to_string(input.size()) +
                         " != input_dim " + std::to_string(model.config.input_dim));
  Eigen::VectorXd h = input;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
    h = (model.layers[l].weights * h + model.layers[l].bias).cwiseMax(0.0);
  const MlpLayer& out = model.layers.back();
  return out.weights * h + out.bias;
}

Eigen::VectorXd hidden_features(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.config.input_dim)
    throw DimensionError("hidden_features: input length " + std::to_string(input.size()) +
                         " != input_dim " + std::to_string(model.config.input_dim));
  Eigen::VectorXd h = input;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
    h = (model.layers[l].weights * h + model.layers[l].bias).cwiseMax(0.0);
  Eigen::VectorXd feat(h.size() + 1);
  feat.head(h.size()) = h;
  feat[h.size()] = 1.0;
  return feat;
}

std::pair<double, std::vector<MlpLayer>> loss_and_gradients(const MlpModel& model,
                                                            const std::vector<Sample>& batch) {
  if (batch.empty()) throw InputError("loss_and_gradients: empty batch");

  const std::size_t n_layers = model.layers.size();
  std::vector<MlpLayer> grads(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grads[l].weights = Eigen::MatrixXd::Zero(model.layers[l].weights.rows(),
                                             model.layers[l].weights.cols());
    grads[l].bias = Eigen::VectorXd::Zero(model.layers[l].bias.size());
  }

  double loss = 0.0;
  std::vector<Eigen::VectorXd> acts(n_layers + 1);  // acts[0] = input, post-ReLU after hidden
  for (const Sample& s : batch) {
    if (s.target.size() != model.config.output_dim)
      throw DimensionError("loss_and_gradients: target length " +
                           std::to_string(s.target.size()) + " != output_dim " +
                           std::to_string(model.config.output_dim));
    acts[0] = sample_to_input(model, s);
    for (std::size_t l = 0; l + 1 < n_layers; ++l)
      acts[l + 1] = (model.layers[l].weights * acts[l] + model.layers[l].bias).cwiseMax(0.0);
    acts[n_layers] = model.layers.back().weights * acts[n_layers - 1] + model.layers.back().bias;

    const Eigen::VectorXd err = acts[n_layers] - s.target;
    loss += err.squaredNorm();

    // Backprop; upstream of the output is d||err||^2/d(out) = 2*err.
    Eigen::VectorXd delta = 2.0 * err;
    for (std::size_t l = n_layers; l-- > 0;) {
      grads[l].weights.noalias() += delta * acts[l].transpose();
      grads[l].bias += delta;
      if (l > 0) {
        delta = model.layers[l].weights.transpose() * delta;
        for (Eigen::Index i = 0; i < delta.size(); ++i)
          if (acts[l][i] <= 0.0) delta[i] = 0.0;  // ReLU gate
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  loss *= inv_n;
  for (auto& g : grads) {
    g.weights *= inv_n;
    g.bias *= inv_n;
  }
  return {loss, std::move(grads)};
}

std::pair<MlpModel, std::vector<double>> train(const MlpModel& model,
                                               const std::vector<Sample>& dataset,
                                               const TrainHyperparams& hp) {
  if (dataset.empty()) throw InputError("train: empty dataset");
  if (hp.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (hp.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");

  const std::size_t n = dataset.size();
  std::size_t batch_size = hp.batch_size > 0 ? static_cast<std::size_t>(hp.batch_size)
                                             : (n < 256 ? n : 64);
  if (batch_size > n) batch_size = n;

  MlpModel m = model;
  Rng rng(hp.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> history;
  history.reserve(hp.epochs);
  std::vector<Sample> batch;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(start + batch_size, n);
      batch.assign(stop - start, Sample{});
      for (std::size_t i = start; i < stop; ++i) batch[i - start] = dataset[order[i]];
      auto [loss, grads] = loss_and_gradients(m, batch);
      if (!std::isfinite(loss)) throw NumericalError("train: loss diverged (non-finite)");
      epoch_loss += loss * static_cast<double>(stop - start);
      seen += stop - start;
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        m.layers[l].weights -= hp.learning_rate * grads[l].weights;
        m.layers[l].bias -= hp.learning_rate * grads[l].bias;
      }
    }
    history.push_back(epoch_loss / static_cast<double>(seen));
  }
  return {std::move(m), std::move(history)};
}

void save_model(const MlpModel& model, const std::string& path) {
  json j;
  j["config"] = {{"input_dim", model.config.input_dim},
                 {"hidden_dims", model.config.hidden_dims},
                 {"output_dim", model.config.output_dim},
                 {"seed", model.config.seed}};
  json layers = json::array();
  for (const MlpLayer& layer : model.layers) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias[i]);
    layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}});
  }
  j["layers"] = std::move(layers);

  std::ofstream ofs(path);
  if (!ofs) throw DataError("cannot open for writing: " + path);
  ofs << j.dump(2) << "\n";
  if (!ofs) throw DataError("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw DataError("cannot open: " + path);
  json j;
  try {
    ifs >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }

  MlpModel model;
  try {
    const json& c = j.at("config");
    model.config.input_dim = c.at("input_dim").get<int>();
    model.config.hidden_dims = c.at("hidden_dims").get<std::vector<int>>();
    model.config.output_dim = c.at("output_dim").get<int>();
    model.config.seed = c.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ParseError(path + ": config: " + e.what());
  }
  check_config(model.config);

  if (!j.contains("layers") || !j["layers"].is_array())
    throw ParseError(path + ": layers: missing or not an array");

  std::vector<int> dims;
  dims.push_back(model.config.input_dim);
  for (int h : model.config.hidden_dims) dims.push_back(h);
  dims.push_back(model.config.output_dim);

  const json& layers = j["layers"];
  if (layers.size() != dims.size() - 1)
    throw ParseError(path + ": layers: expected " + std::to_string(dims.size() - 1) +
                     " layers, got " + std::to_string(layers.size()));

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = path + ": layers[" + std::to_string(l) + "]";
    const int rows = dims[l + 1];
    const int cols = dims[l];
    MlpLayer layer;
    layer.weights.resize(rows, cols);
    try {
      const json& w = layers[l].at("weights");
      if (static_cast<int>(w.size()) != rows)
        throw ParseError(where + ".weights: expected " + std::to_string(rows) + " rows, got " +
                         std::to_string(w.size()));
      for (int r = 0; r < rows; ++r) {
        const json& row = w[r];
        if (static_cast<int>(row.size()) != cols)
          throw ParseError(where + ".weights[" + std::to_string(r) + "]: expected " +
                           std::to_string(cols) + " columns, got " + std::to_string(row.size()));
        for (int c = 0; c < cols; ++c) layer.weights(r, c) = row[c].get<double>();
      }
      const json& b = layers[l].at("bias");
      if (static_cast<int>(b.size()) != rows)
        throw ParseError(where + ".bias: expected " + std::to_string(rows) + " entries, got " +
                         std::to_string(b.size()));
      layer.bias.resize(rows);
      for (int r = 0; r < rows; ++r) layer.bias[r] = b[r].get<double>();
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw ParseError(where + ": non-finite weight");
    model.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace semiadapt
