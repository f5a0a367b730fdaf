#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "semiadapt/errors.hpp"
#include "semiadapt/eval.hpp"

using namespace semiadapt;

namespace {

ExperimentConfig tiny_ti_experiment() {
  ExperimentConfig cfg;
  cfg.dataset.kind = "ti";
  cfg.dataset.unit = "dm";
  TiParams set;
  set.trials = 10;
  set.steps = 60;
  set.seed = 1000;
  cfg.dataset.ti_sets = {set};
  cfg.split = 0.8;
  cfg.methods = {kMethodRls, kMethodNoRls};
  cfg.hidden_dims = {16};
  cfg.train_hp.epochs = 20;
  cfg.train_hp.seed = 4;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("msee of perfect predictions is zero everywhere") {
  std::vector<Eigen::VectorXd> p{Eigen::VectorXd::Ones(9)}, t{Eigen::VectorXd::Ones(9)};
  const MseeSummary s = msee(p, t);
  CHECK(s.pooled == 0.0);
  CHECK(s.per_axis_horizon.isZero(0.0));
  CHECK(s.n_samples == 1);
  CHECK(s.horizon == 3);
}

TEST_CASE("a single all-ones error vector pools to one") {
  std::vector<Eigen::VectorXd> p{Eigen::VectorXd::Zero(9)}, t{-Eigen::VectorXd::Ones(9)};
  const MseeSummary s = msee(p, t);
  CHECK(s.pooled == doctest::Approx(1.0));
  CHECK(s.per_axis_horizon.minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("two single-coordinate errors pool to 1/9") {
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(9);
  e1[0] = 1.0;
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(9);
  e2[1] = 1.0;
  std::vector<Eigen::VectorXd> p{e1, e2}, t{Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)};
  const MseeSummary s = msee(p, t);
  CHECK(s.pooled == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("pooled msee equals the mean of the per-axis/per-horizon table") {
  Rng rng(3);
  std::vector<Eigen::VectorXd> p, t;
  for (int i = 0; i < 25; ++i) {
    p.push_back(oracle::random_vector(rng, 9));
    t.push_back(oracle::random_vector(rng, 9));
  }
  const MseeSummary s = msee(p, t);
  CHECK(s.pooled == doctest::Approx(s.per_axis_horizon.mean()).epsilon(1e-14));
}

TEST_CASE("msee input validation") {
  std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Zero(9)};
  std::vector<Eigen::VectorXd> two{Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)};
  CHECK_THROWS_AS(msee(one, two), DimensionError);
  CHECK_THROWS_AS(msee({}, {}), InputError);
}

TEST_CASE("method names canonicalize from aliases") {
  CHECK(canonical_method("rls-paa") == kMethodRls);
  CHECK(canonical_method("identifier") == kMethodIdentifier);
  CHECK(canonical_method("id") == kMethodIdentifier);
  CHECK(canonical_method("none") == kMethodNoRls);
  CHECK(canonical_method("none-id") == kMethodNoIdentifier);
  CHECK_THROWS_AS(canonical_method("bogus"), ConfigError);
}

TEST_CASE("experiment config round-trips through json") {
  const ExperimentConfig cfg = tiny_ti_experiment();
  const nlohmann::json j = experiment_config_to_json(cfg);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(experiment_config_to_json(back) == j);
}

TEST_CASE("a small experiment runs, orders methods, and stays deterministic") {
  const ExperimentConfig cfg = tiny_ti_experiment();
  const EvalReport a = run_experiment(cfg);
  const EvalReport b = run_experiment(cfg);

  REQUIRE(a.methods.size() == 2);
  CHECK(a.methods[0].method == kMethodRls);
  CHECK(a.methods[1].method == kMethodNoRls);
  CHECK(a.n_train == 8);
  CHECK(a.n_val == 2);
  CHECK(a.unit == "dm");
  CHECK(a.cm_scale == 10.0);
  for (const auto& m : a.methods) {
    CHECK(m.errors.pooled >= 0.0);
    CHECK(m.pooled_cm2 == doctest::Approx(m.errors.pooled * 100.0));
    CHECK(m.coverage >= 0.0);
    CHECK(m.coverage <= 1.0);
    CHECK(m.errors.n_samples > 0);
  }
  // no adaptation calls for the frozen method
  CHECK(a.methods[1].adapt_latency.count == 0);
  CHECK(a.methods[0].adapt_latency.count > 0);

  // byte-identical without timing
  CHECK(report_to_json(a, false).dump() == report_to_json(b, false).dump());
  CHECK(report_to_csv(a) == report_to_csv(b));
}

TEST_CASE("summary csv has one row per method-axis-horizon plus pooled rows") {
  ExperimentConfig cfg = tiny_ti_experiment();
  cfg.methods = {kMethodRls, kMethodNoRls, kMethodIdentifier, kMethodNoIdentifier};
  const EvalReport report = run_experiment(cfg);
  const std::string csv = report_to_csv(report);
  std::istringstream ss(csv);
  std::string line;
  long rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + 4 * (3 * 3 + 1));  // header + 4 methods x (9 cells + pooled)
}

TEST_CASE("traces csv covers every validation step") {
  ExperimentConfig cfg = tiny_ti_experiment();
  cfg.methods = {kMethodNoRls};
  const EvalReport report = run_experiment(cfg);
  long expected = 0;
  for (long len : report.val_trial_lengths) expected += len;
  const std::string csv = traces_to_csv(report);
  std::istringstream ss(csv);
  std::string line;
  long rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + expected * 3);  // header + steps x horizons
}

TEST_CASE("identifier architecture override is trained and labeled separately") {
  ExperimentConfig cfg = tiny_ti_experiment();
  cfg.methods = {kMethodNoRls, kMethodNoIdentifier};
  cfg.identifier_hidden_dims = std::vector<int>{8};
  const EvalReport report = run_experiment(cfg);
  CHECK(report.methods[0].arch == "9-16-9");
  CHECK(report.methods[1].arch == "9-8-9");
}
