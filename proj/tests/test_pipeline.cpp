#include <doctest.h>

#include "oracles.hpp"
#include "semiadapt/errors.hpp"
#include "semiadapt/pipeline.hpp"

using namespace semiadapt;

namespace {

// Stream whose every next position is the pipeline's own one-step prediction,
// so the innovation is identically zero.
Trajectory self_consistent_stream(const MlpModel& model, const RlsConfig& rls_cfg, int n_past,
                                  int steps, Rng& rng) {
  RlsState state = init_rls(model, rls_cfg);
  std::vector<Eigen::Vector3d> pos;
  for (int i = 0; i < n_past; ++i) pos.push_back(oracle::random_vector(rng, 3));
  for (int k = n_past - 1; k + 1 < steps; ++k) {
    Eigen::VectorXd input(3 * n_past);
    for (int i = 0; i < n_past; ++i) input.segment<3>(3 * i) = pos[k - i];
    const Eigen::VectorXd mean = rls_predict(state, hidden_features(model, input));
    pos.push_back(mean.head<3>());
  }
  Trajectory traj;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    traj.timestamps.push_back(0.05 * static_cast<double>(k));
    traj.positions.push_back(pos[k]);
  }
  return traj;
}

double pooled_sqerr(const std::vector<StepResult>& results) {
  double acc = 0.0;
  long n = 0;
  for (const auto& r : results) {
    acc += r.apriori_error.squaredNorm();
    n += r.apriori_error.size();
  }
  return acc / static_cast<double>(n);
}

MlpModel trained_ti_model(std::uint64_t seed) {
  TiParams p;
  p.trials = 8;
  p.seed = 100;
  std::vector<Sample> data;
  for (const auto& traj : gen_ti(p)) {
    auto s = make_samples(traj, 3, 3, false);
    data.insert(data.end(), s.begin(), s.end());
  }
  TrainHyperparams hp;
  hp.seed = seed;
  return train(init_mlp(MlpConfig{9, {40}, 9, seed}), data, hp).first;
}

}  // namespace

TEST_CASE("resolved results count is length - N - M + 1 and adaptation runs once per step") {
  TiParams p;
  p.trials = 1;
  p.steps = 40;
  p.seed = 3;
  const Trajectory traj = gen_ti(p)[0];

  PipelineConfig cfg;
  StreamRun run = run_stream(init_mlp(MlpConfig{9, {40}, 9, 0}), traj, cfg);
  const long expected = static_cast<long>(traj.size()) - 3 - 3 + 1;
  CHECK(static_cast<long>(run.results.size()) == expected);
  CHECK(run.diagnostics.adaptation_count == expected);
  for (std::size_t i = 0; i < run.results.size(); ++i)
    CHECK(run.results[i].k == static_cast<long>(i) + 2);  // first prediction at k = N-1
}

TEST_CASE("method none predicts exactly the offline network output") {
  TiParams p;
  p.trials = 1;
  p.steps = 30;
  p.seed = 5;
  const Trajectory traj = gen_ti(p)[0];
  const MlpModel model = init_mlp(MlpConfig{9, {40}, 9, 1});

  PipelineConfig cfg;
  cfg.method = AdaptMethod::None;
  StreamRun run = run_stream(model, traj, cfg);
  CHECK(run.diagnostics.adaptation_count == 0);
  for (const auto& r : run.results) {
    Eigen::VectorXd input(9);
    for (int i = 0; i < 3; ++i)
      input.segment<3>(3 * i) = traj.positions[static_cast<std::size_t>(r.k - i)];
    CHECK(r.prediction.mean == forward(model, input));
    // the reported error is the offline residual
    Eigen::VectorXd target(9);
    for (int m = 0; m < 3; ++m)
      target.segment<3>(3 * m) = traj.positions[static_cast<std::size_t>(r.k + 1 + m)];
    CHECK(r.apriori_error == (target - forward(model, input)).eval());
  }
}

TEST_CASE("adaptation_enabled=false forces no adaptation") {
  TiParams p;
  p.trials = 1;
  p.steps = 20;
  p.seed = 6;
  PipelineConfig cfg;
  cfg.adaptation_enabled = false;  // method stays rls-paa but is disabled
  StreamRun run = run_stream(init_mlp(MlpConfig{9, {40}, 9, 0}), gen_ti(p)[0], cfg);
  CHECK(run.diagnostics.adaptation_count == 0);
  CHECK(!run.results.empty());
}

TEST_CASE("a stream generated by the network itself yields zero innovation") {
  Rng rng(9);
  MlpModel model = oracle::random_model(rng, 9, {12}, 3, 0.3);
  PipelineConfig cfg;
  cfg.m_future = 1;  // one-step horizon makes the stream self-consistent
  const Trajectory traj = self_consistent_stream(model, cfg.rls, 3, 60, rng);

  Pipeline pipeline(model, cfg);
  const Eigen::VectorXd theta0 = pipeline.rls_state().theta;
  long resolved = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    auto r = pipeline.push(traj.timestamps[i], traj.positions[i]);
    if (r) {
      ++resolved;
      CHECK(r->apriori_error.cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  CHECK(resolved == static_cast<long>(traj.size()) - 3);
  CHECK(pipeline.rls_state().theta == theta0);  // zero innovation leaves theta bit-identical
}

TEST_CASE("rls adaptation beats no adaptation on a held-out time-invariant trial") {
  const MlpModel model = trained_ti_model(11);
  TiParams p;
  p.trials = 1;
  p.seed = 777;  // held out from training seeds 100..107
  const Trajectory traj = gen_ti(p)[0];

  PipelineConfig rls_cfg;
  rls_cfg.method = AdaptMethod::RlsPaa;
  PipelineConfig none_cfg;
  none_cfg.method = AdaptMethod::None;
  const double rls_err = pooled_sqerr(run_stream(model, traj, rls_cfg).results);
  const double none_err = pooled_sqerr(run_stream(model, traj, none_cfg).results);
  CHECK(rls_err <= none_err);
}

TEST_CASE("prefix of a stream yields identical prefix outputs (no lookahead)") {
  const MlpModel model = init_mlp(MlpConfig{9, {20}, 9, 4});
  TiParams p;
  p.trials = 1;
  p.steps = 50;
  p.seed = 21;
  const Trajectory full = gen_ti(p)[0];
  Trajectory prefix = full;
  prefix.timestamps.resize(30);
  prefix.positions.resize(30);

  PipelineConfig cfg;
  StreamRun run_full = run_stream(model, full, cfg);
  StreamRun run_prefix = run_stream(model, prefix, cfg);
  REQUIRE(run_prefix.results.size() <= run_full.results.size());
  for (std::size_t i = 0; i < run_prefix.results.size(); ++i) {
    CHECK(run_prefix.results[i].k == run_full.results[i].k);
    CHECK(run_prefix.results[i].prediction.mean == run_full.results[i].prediction.mean);
    CHECK(run_prefix.results[i].prediction.msee == run_full.results[i].prediction.msee);
    CHECK(run_prefix.results[i].apriori_error == run_full.results[i].apriori_error);
  }
}

TEST_CASE("pipeline runs are deterministic") {
  const MlpModel model = init_mlp(MlpConfig{9, {16}, 9, 8});
  TiParams p;
  p.trials = 1;
  p.steps = 40;
  p.seed = 31;
  const Trajectory traj = gen_ti(p)[0];
  PipelineConfig cfg;
  StreamRun a = run_stream(model, traj, cfg);
  StreamRun b = run_stream(model, traj, cfg);
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].prediction.mean == b.results[i].prediction.mean);
    CHECK(a.results[i].apriori_error == b.results[i].apriori_error);
  }
}

TEST_CASE("out-of-order timestamps raise a stream error") {
  Pipeline pipeline(init_mlp(MlpConfig{9, {8}, 9, 0}), PipelineConfig{});
  pipeline.push(0.10, Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(pipeline.push(0.05, Eigen::Vector3d::Ones()), StreamError);
}

TEST_CASE("non-finite positions are rejected with a diagnostic, stream continues") {
  Pipeline pipeline(init_mlp(MlpConfig{9, {8}, 9, 0}), PipelineConfig{});
  pipeline.push(0.0, Eigen::Vector3d::Zero());
  pipeline.push(0.05, Eigen::Vector3d(std::nan(""), 0.0, 0.0));
  CHECK(pipeline.diagnostics().rejected_samples == 1);
  pipeline.push(0.10, Eigen::Vector3d::Ones());
  CHECK(pipeline.diagnostics().rejected_samples == 1);
}

TEST_CASE("model/stream dimension mismatch names both dimensions") {
  PipelineConfig cfg;
  cfg.n_past = 4;  // stream wants input 12, model has 9
  try {
    Pipeline pipeline(init_mlp(MlpConfig{9, {8}, 9, 0}), cfg);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find('9') != std::string::npos);
    CHECK(what.find("12") != std::string::npos);
  }
}

TEST_CASE("identifier method adapts the model and counts adaptations") {
  const MlpModel model = trained_ti_model(13);
  TiParams p;
  p.trials = 1;
  p.steps = 40;
  p.seed = 900;
  const Trajectory traj = gen_ti(p)[0];
  PipelineConfig cfg;
  cfg.method = AdaptMethod::Identifier;
  Pipeline pipeline(model, cfg);
  for (std::size_t i = 0; i < traj.size(); ++i)
    pipeline.push(traj.timestamps[i], traj.positions[i]);
  CHECK(pipeline.diagnostics().adaptation_count ==
        static_cast<long>(traj.size()) - 3 - 3 + 1);
  CHECK(!(pipeline.model() == model));  // weights moved
}

TEST_CASE("action labels flow into the model input when enabled") {
  TiParams p;
  p.trials = 1;
  p.steps = 20;
  p.seed = 61;
  p.action_label = 3;
  const Trajectory traj = gen_ti(p)[0];
  const MlpModel model = init_mlp(MlpConfig{10, {8}, 9, 2});  // 3N + action

  PipelineConfig cfg;
  cfg.include_action = true;
  cfg.method = AdaptMethod::None;
  StreamRun run = run_stream(model, traj, cfg);
  REQUIRE(!run.results.empty());
  for (const auto& r : run.results) {
    Eigen::VectorXd input(10);
    for (int i = 0; i < 3; ++i)
      input.segment<3>(3 * i) = traj.positions[static_cast<std::size_t>(r.k - i)];
    input[9] = 3.0;
    CHECK(r.prediction.mean == forward(model, input));
  }
}

TEST_CASE("step results serialize to the documented json shape") {
  const MlpModel model = init_mlp(MlpConfig{9, {8}, 9, 0});
  TiParams p;
  p.trials = 1;
  p.steps = 20;
  p.seed = 50;
  StreamRun run = run_stream(model, gen_ti(p)[0], PipelineConfig{});
  REQUIRE(!run.results.empty());
  const nlohmann::json j = step_result_to_json(run.results.front());
  CHECK(j.at("mean").size() == 9);
  CHECK(j.at("msee").size() == 81);
  CHECK(j.at("ellipsoids").size() == 3);
  CHECK(j.at("apriori_error").size() == 9);
  CHECK(j.at("ellipsoids")[0].at("shape").size() == 9);
  CHECK(!j.contains("adapt_seconds"));  // timing stays out of the record
}
