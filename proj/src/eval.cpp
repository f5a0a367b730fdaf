#include "semiadapt/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "semiadapt/errors.hpp"

namespace semiadapt {

using nlohmann::json;

std::string canonical_method(const std::string& name) {
  if (name == kMethodRls || name == "rls-paa" || name == "rls") return kMethodRls;
  if (name == kMethodIdentifier || name == "identifier" || name == "id") return kMethodIdentifier;
  if (name == kMethodNoRls || name == "none") return kMethodNoRls;
  if (name == kMethodNoIdentifier || name == "none-id") return kMethodNoIdentifier;
  throw ConfigError("unknown method '" + name + "'");
}

MseeSummary msee(const std::vector<Eigen::VectorXd>& predictions,
                 const std::vector<Eigen::VectorXd>& truths) {
  if (predictions.size() != truths.size())
    throw DimensionError("msee: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(truths.size()) + " truths");
  if (predictions.empty()) throw InputError("msee: empty input");

  const Eigen::Index dim = predictions.front().size();
  if (dim % 3 != 0) throw DimensionError("msee: vector length must be a multiple of 3");
  const int horizon = static_cast<int>(dim / 3);

  MseeSummary out;
  out.horizon = horizon;
  out.n_samples = static_cast<long>(predictions.size());
  out.per_axis_horizon = Eigen::MatrixXd::Zero(3, horizon);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != dim || truths[i].size() != dim)
      throw DimensionError("msee: inconsistent vector length at sample " + std::to_string(i));
    const Eigen::VectorXd err = predictions[i] - truths[i];
    for (int m = 0; m < horizon; ++m)
      for (int a = 0; a < 3; ++a) {
        const double e = err[3 * m + a];
        out.per_axis_horizon(a, m) += e * e;
      }
  }
  out.per_axis_horizon /= static_cast<double>(out.n_samples);
  out.pooled = out.per_axis_horizon.mean();
  return out;
}

namespace {

double unit_to_cm(const std::string& unit) {
  if (unit == "m") return 100.0;
  if (unit == "dm") return 10.0;
  if (unit == "cm") return 1.0;
  throw ConfigError("unknown length unit '" + unit + "' (expected m, dm, or cm)");
}

std::string arch_string(const MlpConfig& c) {
  std::string s = std::to_string(c.input_dim);
  for (int h : c.hidden_dims) s += "-" + std::to_string(h);
  return s + "-" + std::to_string(c.output_dim);
}

TvParams tv_params_from_json(const json& j, std::uint64_t default_seed) {
  TvParams p;
  if (j.contains("params")) {
    const auto v = j["params"].get<std::vector<double>>();
    if (v.size() != 6) throw ConfigError("tv params must have 6 entries");
    p.ax = v[0]; p.bx = v[1]; p.ay = v[2]; p.by = v[3]; p.az = v[4]; p.bz = v[5];
  }
  p.noise_halfwidth = j.value("noise_halfwidth", p.noise_halfwidth);
  p.dt = j.value("dt", p.dt);
  p.duration = j.value("duration", p.duration);
  p.trials = j.value("trials", p.trials);
  p.seed = j.value("seed", default_seed);
  p.action_label = j.value("action", p.action_label);
  p.per_trial_noise = j.value("per_trial_noise", p.per_trial_noise);
  return p;
}

TiParams ti_params_from_json(const json& j, std::uint64_t default_seed) {
  TiParams p;
  if (j.contains("params")) {
    const auto v = j["params"].get<std::vector<double>>();
    if (v.size() != 6) throw ConfigError("ti params must have 6 entries");
    p.ax = v[0]; p.bx = v[1]; p.ay = v[2]; p.by = v[3]; p.az = v[4]; p.bz = v[5];
  }
  p.noise_halfwidth = j.value("noise_halfwidth", p.noise_halfwidth);
  p.dt = j.value("dt", p.dt);
  p.steps = j.value("steps", p.steps);
  p.trials = j.value("trials", p.trials);
  p.seed = j.value("seed", default_seed);
  p.action_label = j.value("action", p.action_label);
  if (j.contains("init_lo")) {
    const auto v = j["init_lo"].get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("ti init_lo must have 3 entries");
    p.init_lo = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (j.contains("init_hi")) {
    const auto v = j["init_hi"].get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("ti init_hi must have 3 entries");
    p.init_hi = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  p.shared_noise = j.value("shared_noise", p.shared_noise);
  return p;
}

json tv_params_to_json(const TvParams& p) {
  return {{"params", {p.ax, p.bx, p.ay, p.by, p.az, p.bz}},
          {"noise_halfwidth", p.noise_halfwidth},
          {"dt", p.dt},
          {"duration", p.duration},
          {"trials", p.trials},
          {"seed", p.seed},
          {"action", p.action_label},
          {"per_trial_noise", p.per_trial_noise}};
}

json ti_params_to_json(const TiParams& p) {
  return {{"params", {p.ax, p.bx, p.ay, p.by, p.az, p.bz}},
          {"noise_halfwidth", p.noise_halfwidth},
          {"dt", p.dt},
          {"steps", p.steps},
          {"trials", p.trials},
          {"seed", p.seed},
          {"action", p.action_label},
          {"init_lo", {p.init_lo.x(), p.init_lo.y(), p.init_lo.z()}},
          {"init_hi", {p.init_hi.x(), p.init_hi.y(), p.init_hi.z()}},
          {"shared_noise", p.shared_noise}};
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});

  const json& d = j.at("dataset");
  cfg.dataset.kind = d.value("kind", std::string("ti"));
  std::uint64_t set_seed = cfg.seed + 1000;
  if (cfg.dataset.kind == "tv") {
    for (const json& s : d.value("sets", json::array({json::object()}))) {
      cfg.dataset.tv_sets.push_back(tv_params_from_json(s, set_seed));
      set_seed += 1000;
    }
    cfg.dataset.unit = d.value("unit", std::string("m"));
  } else if (cfg.dataset.kind == "ti") {
    for (const json& s : d.value("sets", json::array({json::object()}))) {
      cfg.dataset.ti_sets.push_back(ti_params_from_json(s, set_seed));
      set_seed += 1000;
    }
    cfg.dataset.unit = d.value("unit", std::string("dm"));
  } else if (cfg.dataset.kind == "csv") {
    cfg.dataset.csv_paths = d.value("paths", std::vector<std::string>{});
    if (cfg.dataset.csv_paths.empty()) throw ConfigError("csv dataset requires paths");
    cfg.dataset.unit = d.value("unit", std::string("m"));
  } else {
    throw ConfigError("dataset kind must be tv, ti, or csv");
  }

  cfg.split = j.value("split", 0.8);
  if (!(cfg.split > 0.0 && cfg.split < 1.0)) throw ConfigError("split must be in (0, 1)");

  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"]) cfg.methods.push_back(canonical_method(m.get<std::string>()));
  }
  if (cfg.methods.empty()) throw ConfigError("at least one method required");

  cfg.hidden_dims = j.value("hidden_dims", cfg.hidden_dims);
  if (j.contains("identifier_hidden_dims") && !j["identifier_hidden_dims"].is_null())
    cfg.identifier_hidden_dims = j["identifier_hidden_dims"].get<std::vector<int>>();

  if (j.contains("train")) {
    const json& t = j["train"];
    cfg.train_hp.learning_rate = t.value("learning_rate", cfg.train_hp.learning_rate);
    cfg.train_hp.epochs = t.value("epochs", cfg.train_hp.epochs);
    cfg.train_hp.batch_size = t.value("batch_size", cfg.train_hp.batch_size);
    cfg.train_hp.seed = t.value("seed", cfg.seed);
  } else {
    cfg.train_hp.seed = cfg.seed;
  }

  if (j.contains("pipeline")) {
    const json& p = j["pipeline"];
    cfg.pipeline.n_past = p.value("N", cfg.pipeline.n_past);
    cfg.pipeline.m_future = p.value("M", cfg.pipeline.m_future);
    cfg.pipeline.include_action = p.value("include_action", cfg.pipeline.include_action);
    cfg.pipeline.confidence = p.value("confidence", cfg.pipeline.confidence);
    if (p.contains("rls")) {
      const json& r = p["rls"];
      cfg.pipeline.rls.lambda1 = r.value("lambda1", cfg.pipeline.rls.lambda1);
      cfg.pipeline.rls.lambda2 = r.value("lambda2", cfg.pipeline.rls.lambda2);
      cfg.pipeline.rls.f_init_scale = r.value("f_init_scale", cfg.pipeline.rls.f_init_scale);
    }
    if (p.contains("uncertainty")) {
      const json& u = p["uncertainty"];
      cfg.pipeline.uncertainty.window_size = u.value("window_size", cfg.pipeline.uncertainty.window_size);
      cfg.pipeline.uncertainty.noise_window = u.value("noise_window", cfg.pipeline.uncertainty.noise_window);
      cfg.pipeline.uncertainty.noise_prior = u.value("noise_prior", cfg.pipeline.uncertainty.noise_prior);
      cfg.pipeline.uncertainty.assume_stationary =
          u.value("assume_stationary", cfg.pipeline.uncertainty.assume_stationary);
    }
    if (p.contains("identifier")) {
      const json& i = p["identifier"];
      cfg.pipeline.identifier.step_size = i.value("step_size", cfg.pipeline.identifier.step_size);
      cfg.pipeline.identifier.steps_per_sample =
          i.value("steps_per_sample", cfg.pipeline.identifier.steps_per_sample);
    }
  }

  cfg.smooth_data = j.value("smooth", cfg.smooth_data);
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json d;
  d["kind"] = cfg.dataset.kind;
  d["unit"] = cfg.dataset.unit;
  if (cfg.dataset.kind == "tv") {
    json sets = json::array();
    for (const auto& s : cfg.dataset.tv_sets) sets.push_back(tv_params_to_json(s));
    d["sets"] = std::move(sets);
  } else if (cfg.dataset.kind == "ti") {
    json sets = json::array();
    for (const auto& s : cfg.dataset.ti_sets) sets.push_back(ti_params_to_json(s));
    d["sets"] = std::move(sets);
  } else {
    d["paths"] = cfg.dataset.csv_paths;
  }

  json j;
  j["dataset"] = std::move(d);
  j["split"] = cfg.split;
  j["methods"] = cfg.methods;
  j["hidden_dims"] = cfg.hidden_dims;
  if (cfg.identifier_hidden_dims) j["identifier_hidden_dims"] = *cfg.identifier_hidden_dims;
  j["train"] = {{"learning_rate", cfg.train_hp.learning_rate},
                {"epochs", cfg.train_hp.epochs},
                {"batch_size", cfg.train_hp.batch_size},
                {"seed", cfg.train_hp.seed}};
  j["pipeline"] = {
      {"N", cfg.pipeline.n_past},
      {"M", cfg.pipeline.m_future},
      {"include_action", cfg.pipeline.include_action},
      {"confidence", cfg.pipeline.confidence},
      {"rls",
       {{"lambda1", cfg.pipeline.rls.lambda1},
        {"lambda2", cfg.pipeline.rls.lambda2},
        {"f_init_scale", cfg.pipeline.rls.f_init_scale}}},
      {"uncertainty",
       {{"window_size", cfg.pipeline.uncertainty.window_size},
        {"noise_window", cfg.pipeline.uncertainty.noise_window},
        {"noise_prior", cfg.pipeline.uncertainty.noise_prior},
        {"assume_stationary", cfg.pipeline.uncertainty.assume_stationary}}},
      {"identifier",
       {{"step_size", cfg.pipeline.identifier.step_size},
        {"steps_per_sample", cfg.pipeline.identifier.steps_per_sample}}}};
  j["smooth"] = cfg.smooth_data;
  j["seed"] = cfg.seed;
  return j;
}

namespace {

struct SplitData {
  std::vector<Trajectory> train;
  std::vector<Trajectory> val;
};

std::vector<std::vector<Trajectory>> generate_groups(const DatasetSpec& spec) {
  std::vector<std::vector<Trajectory>> groups;
  if (spec.kind == "tv") {
    for (const auto& s : spec.tv_sets) groups.push_back(gen_tv(s));
  } else if (spec.kind == "ti") {
    for (const auto& s : spec.ti_sets) groups.push_back(gen_ti(s));
  } else {
    std::vector<Trajectory> all;
    for (const auto& path : spec.csv_paths) all.push_back(read_trajectory_csv(path));
    groups.push_back(std::move(all));
  }
  return groups;
}

// Split each generation group separately so every motion class contributes to
// both halves.
SplitData split_groups(std::vector<std::vector<Trajectory>> groups, double split) {
  SplitData out;
  for (auto& group : groups) {
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(split * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i < n_train)
        out.train.push_back(std::move(group[i]));
      else
        out.val.push_back(std::move(group[i]));
    }
  }
  return out;
}

struct TrialScore {
  std::vector<Eigen::VectorXd> predictions;
  std::vector<Eigen::VectorXd> truths;
  std::vector<std::vector<double>> trace;  // per step, per horizon (axis-averaged)
  long covered = 0;
  long cover_points = 0;
  PipelineDiagnostics diag;
  long steps = 0;
};

TrialScore score_trial(const MlpModel& model, const Trajectory& traj, const PipelineConfig& cfg) {
  TrialScore score;
  StreamRun run = run_stream(model, traj, cfg);
  score.diag = run.diagnostics;
  score.steps = static_cast<long>(run.results.size());
  for (const StepResult& step : run.results) {
    score.predictions.push_back(step.prediction.mean);
    score.truths.push_back(step.target);
    std::vector<double> horizon_err;
    horizon_err.reserve(step.prediction.ellipsoids.size());
    for (std::size_t m = 0; m < step.prediction.ellipsoids.size(); ++m) {
      const Eigen::Vector3d truth = step.target.segment<3>(3 * static_cast<Eigen::Index>(m));
      if (step.prediction.ellipsoids[m].contains(truth)) ++score.covered;
      ++score.cover_points;
      horizon_err.push_back(
          (step.prediction.mean.segment<3>(3 * static_cast<Eigen::Index>(m)) - truth)
              .squaredNorm() /
          3.0);
    }
    score.trace.push_back(std::move(horizon_err));
  }
  return score;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
  EvalReport report;
  report.config_echo = experiment_config_to_json(cfg);
  report.unit = cfg.dataset.unit;
  report.cm_scale = unit_to_cm(cfg.dataset.unit);

  auto groups = generate_groups(cfg.dataset);
  if (cfg.smooth_data)
    for (auto& group : groups)
      for (auto& traj : group) traj = smooth(traj);

  SplitData data = split_groups(std::move(groups), cfg.split);
  report.n_train = static_cast<long>(data.train.size());
  report.n_val = static_cast<long>(data.val.size());
  report.n_trials = report.n_train + report.n_val;
  if (data.train.empty() || data.val.empty())
    throw DataError("dataset too small: train=" + std::to_string(data.train.size()) +
                    " val=" + std::to_string(data.val.size()));

  const int n_past = cfg.pipeline.n_past;
  const int m_future = cfg.pipeline.m_future;
  std::vector<Sample> train_samples;
  long skipped = 0;
  for (const auto& traj : data.train) {
    auto s = make_samples(traj, n_past, m_future, cfg.pipeline.include_action, &skipped);
    train_samples.insert(train_samples.end(), s.begin(), s.end());
  }
  if (train_samples.empty()) throw DataError("no training samples after windowing");

  MlpConfig model_cfg;
  model_cfg.input_dim = 3 * n_past + (cfg.pipeline.include_action ? 1 : 0);
  model_cfg.output_dim = 3 * m_future;
  model_cfg.hidden_dims = cfg.hidden_dims;
  model_cfg.seed = cfg.seed;
  auto [main_model, main_history] = train(init_mlp(model_cfg), train_samples, cfg.train_hp);
  (void)main_history;

  MlpModel identifier_model = main_model;
  if (cfg.identifier_hidden_dims) {
    MlpConfig id_cfg = model_cfg;
    id_cfg.hidden_dims = *cfg.identifier_hidden_dims;
    identifier_model = train(init_mlp(id_cfg), train_samples, cfg.train_hp).first;
  }

  for (const auto& traj : data.val) {
    report.val_trial_actions.push_back(traj.action_label);
    report.val_trial_lengths.push_back(
        std::max<long>(0, static_cast<long>(traj.size()) - n_past - m_future + 1));
  }

  for (const std::string& method : cfg.methods) {
    PipelineConfig pcfg = cfg.pipeline;
    const MlpModel* model = &main_model;
    if (method == kMethodRls) {
      pcfg.method = AdaptMethod::RlsPaa;
    } else if (method == kMethodIdentifier) {
      pcfg.method = AdaptMethod::Identifier;
      model = &identifier_model;
    } else if (method == kMethodNoRls) {
      pcfg.method = AdaptMethod::None;
    } else {
      pcfg.method = AdaptMethod::None;
      model = &identifier_model;
    }

    MethodReport mr;
    mr.method = method;
    mr.arch = arch_string(model->config);

    std::vector<Eigen::VectorXd> preds, truths;
    long covered = 0;
    for (const auto& traj : data.val) {
      TrialScore score = score_trial(*model, traj, pcfg);
      preds.insert(preds.end(), score.predictions.begin(), score.predictions.end());
      truths.insert(truths.end(), score.truths.begin(), score.truths.end());
      covered += score.covered;
      mr.coverage_points += score.cover_points;
      mr.adapt_latency.total_seconds += score.diag.adapt_seconds_total;
      mr.adapt_latency.count += score.diag.adaptation_count;
      mr.uncertainty_seconds_total += score.diag.uncertainty_seconds_total;
      mr.psd_clips += score.diag.psd_clips;
      mr.degeneracy_count += score.diag.degeneracy_count;
      mr.trial_traces.push_back(std::move(score.trace));
    }
    if (preds.empty()) throw DataError("validation trials produced no resolved steps");

    mr.errors = msee(preds, truths);
    const double s2 = report.cm_scale * report.cm_scale;
    mr.per_axis_horizon_cm2 = mr.errors.per_axis_horizon * s2;
    mr.pooled_cm2 = mr.errors.pooled * s2;
    mr.coverage = mr.coverage_points > 0
                      ? static_cast<double>(covered) / static_cast<double>(mr.coverage_points)
                      : 0.0;
    if (mr.adapt_latency.count > 0)
      mr.adapt_latency.mean_seconds =
          mr.adapt_latency.total_seconds / static_cast<double>(mr.adapt_latency.count);
    report.methods.push_back(std::move(mr));
  }
  return report;
}

json report_to_json(const EvalReport& report, bool include_timing) {
  json j;
  j["config"] = report.config_echo;
  j["dataset"] = {{"unit", report.unit},
                  {"cm_scale", report.cm_scale},
                  {"n_trials", report.n_trials},
                  {"n_train", report.n_train},
                  {"n_val", report.n_val},
                  {"val_trial_lengths", report.val_trial_lengths},
                  {"val_trial_actions", report.val_trial_actions}};
  json methods = json::array();
  for (const MethodReport& m : report.methods) {
    json jm;
    jm["method"] = m.method;
    jm["arch"] = m.arch;
    jm["n_samples"] = m.errors.n_samples;
    jm["pooled_native"] = m.errors.pooled;
    jm["pooled_cm2"] = m.pooled_cm2;
    json axes = json::array();
    const char* axis_names = "xyz";
    for (int a = 0; a < 3; ++a) {
      json horizons = json::array();
      for (int h = 0; h < m.errors.horizon; ++h)
        horizons.push_back({{"horizon", h + 1},
                            {"msee_native", m.errors.per_axis_horizon(a, h)},
                            {"msee_cm2", m.per_axis_horizon_cm2(a, h)}});
      axes.push_back({{"axis", std::string(1, axis_names[a])}, {"horizons", std::move(horizons)}});
    }
    jm["per_axis"] = std::move(axes);
    jm["coverage"] = m.coverage;
    jm["coverage_points"] = m.coverage_points;
    jm["psd_clips"] = m.psd_clips;
    jm["degeneracy_count"] = m.degeneracy_count;
    if (include_timing) {
      jm["timing"] = {{"adapt_mean_seconds", m.adapt_latency.mean_seconds},
                      {"adapt_total_seconds", m.adapt_latency.total_seconds},
                      {"adapt_count", m.adapt_latency.count},
                      {"uncertainty_total_seconds", m.uncertainty_seconds_total}};
    }
    json traces = json::array();
    for (const auto& trial : m.trial_traces) {
      json steps = json::array();
      for (const auto& step : trial) steps.push_back(step);
      traces.push_back(std::move(steps));
    }
    jm["trial_traces"] = std::move(traces);
    methods.push_back(std::move(jm));
  }
  j["methods"] = std::move(methods);
  return j;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,arch,axis,horizon,n,msee_native,msee_cm2\n";
  char buf[160];
  const char* axis_names = "xyz";
  for (const MethodReport& m : report.methods) {
    for (int a = 0; a < 3; ++a)
      for (int h = 0; h < m.errors.horizon; ++h) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%c,%d,%ld,%.17g,%.17g\n", m.method.c_str(),
                      m.arch.c_str(), axis_names[a], h + 1, m.errors.n_samples,
                      m.errors.per_axis_horizon(a, h), m.per_axis_horizon_cm2(a, h));
        out << buf;
      }
    std::snprintf(buf, sizeof(buf), "%s,%s,all,all,%ld,%.17g,%.17g\n", m.method.c_str(),
                  m.arch.c_str(), m.errors.n_samples, m.errors.pooled, m.pooled_cm2);
    out << buf;
  }
  return out.str();
}

std::string traces_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,trial,step,horizon,sqerr_native\n";
  char buf[120];
  for (const MethodReport& m : report.methods) {
    for (std::size_t trial = 0; trial < m.trial_traces.size(); ++trial)
      for (std::size_t step = 0; step < m.trial_traces[trial].size(); ++step)
        for (std::size_t h = 0; h < m.trial_traces[trial][step].size(); ++h) {
          std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%zu,%.17g\n", m.method.c_str(), trial, step,
                        h + 1, m.trial_traces[trial][step][h]);
          out << buf;
        }
  }
  return out.str();
}

}  // namespace semiadapt
