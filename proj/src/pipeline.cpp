#include "semiadapt/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "semiadapt/errors.hpp"

namespace semiadapt {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

AdaptMethod adapt_method_from_string(const std::string& name) {
  if (name == "rls-paa" || name == "rls") return AdaptMethod::RlsPaa;
  if (name == "identifier" || name == "id") return AdaptMethod::Identifier;
  if (name == "none") return AdaptMethod::None;
  throw ConfigError("unknown adaptation method '" + name + "'");
}

std::string to_string(AdaptMethod method) {
  switch (method) {
    case AdaptMethod::RlsPaa: return "rls-paa";
    case AdaptMethod::Identifier: return "identifier";
    case AdaptMethod::None: return "none";
  }
  return "?";
}

Pipeline::Pipeline(MlpModel model, PipelineConfig cfg)
    : model_(std::move(model)), cfg_(std::move(cfg)) {
  if (cfg_.n_past < 1 || cfg_.m_future < 1)
    throw ConfigError("pipeline requires N >= 1 and M >= 1");
  if (!(cfg_.confidence > 0.0 && cfg_.confidence < 1.0))
    throw ConfigError("pipeline confidence must be in (0, 1)");
  if (!cfg_.adaptation_enabled) cfg_.method = AdaptMethod::None;

  const int want_in = 3 * cfg_.n_past + (cfg_.include_action ? 1 : 0);
  if (model_.config.input_dim != want_in)
    throw DimensionError("model input_dim " + std::to_string(model_.config.input_dim) +
                         " does not match stream dimension " + std::to_string(want_in) +
                         " (3*N" + (cfg_.include_action ? "+action" : "") + ")");
  const int want_out = 3 * cfg_.m_future;
  if (model_.config.output_dim != want_out)
    throw DimensionError("model output_dim " + std::to_string(model_.config.output_dim) +
                         " does not match prediction dimension " + std::to_string(want_out) +
                         " (3*M)");

  rls_ = init_rls(model_, cfg_.rls);
  unc_ = init_uncertainty(want_out, model_.last_hidden_dim() + 1, cfg_.uncertainty);
  noise_prior_ = Eigen::VectorXd::Constant(want_out, cfg_.uncertainty.noise_prior);
  noise_var_ = noise_prior_;
  window_keep_ = std::max(cfg_.n_past, cfg_.m_future);
}

void Pipeline::adapt_front(const Eigen::VectorXd& target) {
  Pending& front = pending_.front();
  last_step_diag_.degeneracy = false;
  last_step_diag_.adapt_seconds = 0.0;
  last_step_diag_.uncertainty_seconds = 0.0;

  Eigen::VectorXd innovation;
  switch (cfg_.method) {
    case AdaptMethod::RlsPaa: {
      // MSEE bookkeeping consumes the pre-update state; its inputs match the
      // parameter update that follows (shared gain step keeps them identical).
      auto t0 = std::chrono::steady_clock::now();
      const Eigen::MatrixXd x_msee = propagate_state_msee(unc_, front.features);
      innovation = target - rls_predict(rls_, front.features);
      update_param_msee(unc_, rls_, front.features, innovation, x_msee);
      last_step_diag_.uncertainty_seconds = seconds_since(t0);

      auto t1 = std::chrono::steady_clock::now();
      const RlsUpdate upd = rls_update(rls_, front.features, target);
      last_step_diag_.adapt_seconds = seconds_since(t1);
      if (upd.degeneracy) {
        last_step_diag_.degeneracy = true;
        ++diag_.degeneracy_count;
      }
      ++diag_.adaptation_count;
      break;
    }
    case AdaptMethod::Identifier: {
      Sample sample;
      sample.input = front.sample_input;
      sample.target = target;
      sample.k = front.result.k;
      auto t0 = std::chrono::steady_clock::now();
      const Eigen::VectorXd pred = identifier_step(model_, sample, cfg_.identifier);
      last_step_diag_.adapt_seconds = seconds_since(t0);
      innovation = target - pred;
      ++diag_.adaptation_count;
      break;
    }
    case AdaptMethod::None: {
      const Eigen::VectorXd input = front.sample_input.head(front.sample_input.size() - 1);
      innovation = target - forward(model_, input);
      break;
    }
  }

  residuals_.push_back(innovation);
  while (static_cast<int>(residuals_.size()) > cfg_.uncertainty.noise_window)
    residuals_.pop_front();
  const Eigen::VectorXd est =
      estimate_noise_variance(residuals_, cfg_.uncertainty.noise_window, noise_prior_);
  if (cfg_.method == AdaptMethod::RlsPaa)
    unc_.noise_var = est;
  else
    noise_var_ = est;

  diag_.adapt_seconds_total += last_step_diag_.adapt_seconds;
  diag_.uncertainty_seconds_total += last_step_diag_.uncertainty_seconds;
  diag_.psd_clips = unc_.psd_clip_count;
}

StepResult Pipeline::make_prediction(long k, double t) {
  StepResult step;
  step.k = k;
  step.t = t;

  Eigen::VectorXd input(3 * cfg_.n_past + (cfg_.include_action ? 1 : 0));
  // s_k stacks p(k), p(k-1), ..., p(k-N+1); recent_ holds oldest first.
  for (int i = 0; i < cfg_.n_past; ++i)
    input.segment<3>(3 * i) = recent_[recent_.size() - 1 - static_cast<std::size_t>(i)];
  if (cfg_.include_action) input[3 * cfg_.n_past] = static_cast<double>(last_action_);

  Pending pending;
  pending.sample_input.resize(input.size() + 1);
  pending.sample_input.head(input.size()) = input;
  pending.sample_input[input.size()] = 1.0;

  if (cfg_.method == AdaptMethod::RlsPaa) {
    pending.features = hidden_features(model_, input);
    step.prediction.mean = rls_predict(rls_, pending.features);
    step.prediction.msee = propagate_state_msee(unc_, pending.features);
  } else {
    step.prediction.mean = forward(model_, input);
    step.prediction.msee = noise_var_.asDiagonal();
  }
  step.prediction.ellipsoids =
      error_ellipsoids(step.prediction.mean, step.prediction.msee, cfg_.confidence);
  step.diag = last_step_diag_;
  step.diag.psd_clips = unc_.psd_clip_count;
  step.diag.rejected_samples = diag_.rejected_samples;

  pending.result = step;
  pending_.push_back(std::move(pending));
  return step;
}

std::optional<StepResult> Pipeline::push(double t, const Eigen::Vector3d& position, int action) {
  if (!std::isfinite(t)) {
    ++diag_.rejected_samples;
    return std::nullopt;
  }
  if (have_t_ && t <= prev_t_)
    throw StreamError("out-of-order timestamp " + std::to_string(t) + " after " +
                      std::to_string(prev_t_));
  prev_t_ = t;
  have_t_ = true;
  if (!position.allFinite()) {
    ++diag_.rejected_samples;
    return std::nullopt;
  }

  ++k_;
  last_action_ = action;
  recent_.push_back(position);
  while (static_cast<int>(recent_.size()) > window_keep_) recent_.pop_front();

  std::optional<StepResult> resolved;
  if (!pending_.empty() && k_ - pending_.front().result.k == cfg_.m_future) {
    // Ground truth for the oldest prediction is complete: p(j+1) .. p(j+M)
    // are the last M positions including the one that just arrived.
    Eigen::VectorXd target(3 * cfg_.m_future);
    for (int m = 0; m < cfg_.m_future; ++m)
      target.segment<3>(3 * m) =
          recent_[recent_.size() - static_cast<std::size_t>(cfg_.m_future - m)];

    adapt_front(target);

    StepResult done = std::move(pending_.front().result);
    pending_.pop_front();
    done.target = target;
    done.apriori_error = target - done.prediction.mean;
    done.diag = last_step_diag_;
    done.diag.psd_clips = unc_.psd_clip_count;
    done.diag.rejected_samples = diag_.rejected_samples;
    resolved = std::move(done);
  }

  if (k_ >= cfg_.n_past - 1) make_prediction(k_, t);
  return resolved;
}

StreamRun run_stream(const MlpModel& model, const Trajectory& traj, const PipelineConfig& cfg) {
  Pipeline pipeline(model, cfg);
  StreamRun run;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    auto resolved = pipeline.push(traj.timestamps[i], traj.positions[i], traj.action_label);
    if (resolved) run.results.push_back(std::move(*resolved));
  }
  run.diagnostics = pipeline.diagnostics();
  return run;
}

nlohmann::json step_result_to_json(const StepResult& step) {
  nlohmann::json j;
  j["k"] = step.k;
  j["t"] = step.t;
  j["mean"] = std::vector<double>(step.prediction.mean.data(),
                                  step.prediction.mean.data() + step.prediction.mean.size());
  std::vector<double> msee;
  msee.reserve(static_cast<std::size_t>(step.prediction.msee.size()));
  for (Eigen::Index r = 0; r < step.prediction.msee.rows(); ++r)
    for (Eigen::Index c = 0; c < step.prediction.msee.cols(); ++c)
      msee.push_back(step.prediction.msee(r, c));
  j["msee"] = std::move(msee);
  nlohmann::json ells = nlohmann::json::array();
  for (const Ellipsoid& e : step.prediction.ellipsoids) {
    std::vector<double> shape;
    shape.reserve(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) shape.push_back(e.shape(r, c));
    ells.push_back({{"center", std::vector<double>{e.center.x(), e.center.y(), e.center.z()}},
                    {"shape", std::move(shape)},
                    {"confidence", e.confidence}});
  }
  j["ellipsoids"] = std::move(ells);
  j["target"] = std::vector<double>(step.target.data(), step.target.data() + step.target.size());
  j["apriori_error"] = std::vector<double>(
      step.apriori_error.data(), step.apriori_error.data() + step.apriori_error.size());
  j["diagnostics"] = {{"psd_clips", step.diag.psd_clips},
                      {"degeneracy", step.diag.degeneracy},
                      {"rejected_samples", step.diag.rejected_samples}};
  return j;
}

}  // namespace semiadapt
