#include "semiadapt/rls.hpp"

#include <cmath>

#include "semiadapt/errors.hpp"

namespace semiadapt {

namespace {

void check_config(const RlsConfig& c) {
  if (!(c.lambda1 > 0.0 && c.lambda1 <= 1.0))
    throw ConfigError("rls lambda1 must be in (0, 1]");
  if (!(c.lambda2 >= 0.0 && c.lambda2 <= 2.0))
    throw ConfigError("rls lambda2 must be in [0, 2]");
  if (!(c.f_init_scale > 0.0)) throw ConfigError("rls f_init_scale must be > 0");
}

constexpr double kDegeneracyFloor = 1e-12;

}  // namespace

GainStep rls_gain_step(const Eigen::MatrixXd& gain, const Eigen::VectorXd& phi,
                       double lambda1, double lambda2) {
  const Eigen::VectorXd v = gain * phi;
  const double quad = phi.dot(v);
  const double den = lambda1 + lambda2 * quad;
  if (!(den > 0.0))
    throw NumericalError("rls gain update: non-positive denominator " + std::to_string(den));

  // Rank-1 downdate on the lower triangle, mirrored afterwards: the result is
  // symmetric by construction, no drift to correct.
  GainStep step;
  step.gain = gain * (1.0 / lambda1);
  step.gain.selfadjointView<Eigen::Lower>().rankUpdate(v, -lambda2 / (den * lambda1));
  step.gain.triangularView<Eigen::StrictlyUpper>() = step.gain.transpose();
  step.gain_phi.noalias() = step.gain * phi;
  return step;
}

RlsState init_rls(const MlpModel& model, const RlsConfig& config) {
  check_config(config);
  RlsState state;
  state.config = config;
  state.block_dim = model.last_hidden_dim() + 1;
  state.n_outputs = model.config.output_dim;
  state.theta = flatten_output_layer(model);
  state.gain.assign(state.n_outputs,
                    config.f_init_scale *
                        Eigen::MatrixXd::Identity(state.block_dim, state.block_dim));
  return state;
}

Eigen::VectorXd rls_predict(const RlsState& state, const Eigen::VectorXd& features) {
  if (features.size() != state.block_dim)
    throw DimensionError("rls_predict: feature length " + std::to_string(features.size()) +
                         " != " + std::to_string(state.block_dim));
  Eigen::VectorXd out(state.n_outputs);
  for (int d = 0; d < state.n_outputs; ++d)
    out[d] = features.dot(state.theta.segment(d * state.block_dim, state.block_dim));
  return out;
}

RlsUpdate rls_update(RlsState& state, const Eigen::VectorXd& features,
                     const Eigen::VectorXd& measurement) {
  if (features.size() != state.block_dim)
    throw DimensionError("rls_update: feature length " + std::to_string(features.size()) +
                         " != " + std::to_string(state.block_dim));
  if (measurement.size() != state.n_outputs)
    throw DimensionError("rls_update: measurement length " + std::to_string(measurement.size()) +
                         " != " + std::to_string(state.n_outputs));
  if (!features.allFinite() || !measurement.allFinite())
    throw InputError("rls_update: non-finite input");

  RlsUpdate result;
  result.apriori_error = measurement - rls_predict(state, features);

  for (int d = 0; d < state.n_outputs; ++d) {
    GainStep step = rls_gain_step(state.gain[d], features, state.config.lambda1,
                                  state.config.lambda2);
    state.theta.segment(d * state.block_dim, state.block_dim) +=
        step.gain_phi * result.apriori_error[d];
    state.gain[d] = std::move(step.gain);
    if (state.gain[d].diagonal().minCoeff() < kDegeneracyFloor) result.degeneracy = true;
  }
  return result;
}

Eigen::VectorXd flatten_output_layer(const MlpModel& model) {
  const MlpLayer& out = model.layers.back();
  const int nh = static_cast<int>(out.weights.cols());
  const int d_out = static_cast<int>(out.weights.rows());
  Eigen::VectorXd theta(d_out * (nh + 1));
  for (int d = 0; d < d_out; ++d) {
    theta.segment(d * (nh + 1), nh) = out.weights.row(d).transpose();
    theta[d * (nh + 1) + nh] = out.bias[d];
  }
  return theta;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> theta_to_output_layer(const Eigen::VectorXd& theta,
                                                                  int hidden_dim, int n_outputs) {
  if (theta.size() != static_cast<Eigen::Index>(n_outputs) * (hidden_dim + 1))
    throw DimensionError("theta_to_output_layer: length " + std::to_string(theta.size()) +
                         " != " + std::to_string(n_outputs * (hidden_dim + 1)));
  Eigen::MatrixXd weights(n_outputs, hidden_dim);
  Eigen::VectorXd bias(n_outputs);
  for (int d = 0; d < n_outputs; ++d) {
    weights.row(d) = theta.segment(d * (hidden_dim + 1), hidden_dim).transpose();
    bias[d] = theta[d * (hidden_dim + 1) + hidden_dim];
  }
  return {std::move(weights), std::move(bias)};
}

nlohmann::json rls_state_to_json(const RlsState& state) {
  nlohmann::json j;
  j["lambda1"] = state.config.lambda1;
  j["lambda2"] = state.config.lambda2;
  j["f_init_scale"] = state.config.f_init_scale;
  j["block_dim"] = state.block_dim;
  j["n_outputs"] = state.n_outputs;
  j["theta"] = std::vector<double>(state.theta.data(), state.theta.data() + state.theta.size());
  nlohmann::json gains = nlohmann::json::array();
  for (const auto& g : state.gain) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
      rows.push_back(std::move(row));
    }
    gains.push_back(std::move(rows));
  }
  j["gain"] = std::move(gains);
  return j;
}

RlsState rls_state_from_json(const nlohmann::json& j) {
  RlsState state;
  try {
    state.config.lambda1 = j.at("lambda1").get<double>();
    state.config.lambda2 = j.at("lambda2").get<double>();
    state.config.f_init_scale = j.at("f_init_scale").get<double>();
    state.block_dim = j.at("block_dim").get<int>();
    state.n_outputs = j.at("n_outputs").get<int>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    state.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                    static_cast<Eigen::Index>(theta.size()));
    for (const auto& rows : j.at("gain")) {
      Eigen::MatrixXd g(state.block_dim, state.block_dim);
      for (int r = 0; r < state.block_dim; ++r)
        for (int c = 0; c < state.block_dim; ++c) g(r, c) = rows.at(r).at(c).get<double>();
      state.gain.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("rls state: ") + e.what());
  }
  if (state.theta.size() != static_cast<Eigen::Index>(state.n_outputs) * state.block_dim ||
      static_cast<int>(state.gain.size()) != state.n_outputs)
    throw ParseError("rls state: inconsistent dimensions");
  return state;
}

}  // namespace semiadapt
