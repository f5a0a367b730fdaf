#include <doctest.h>

#include "oracles.hpp"
#include "semiadapt/errors.hpp"
#include "semiadapt/rls.hpp"

using namespace semiadapt;

namespace {

RlsState small_random_state(Rng& rng, int block_dim, int n_outputs, double f_scale = 10.0) {
  MlpModel m = oracle::random_model(rng, 3, {block_dim - 1}, n_outputs);
  RlsConfig cfg;
  cfg.f_init_scale = f_scale;
  return init_rls(m, cfg);
}

}  // namespace

TEST_CASE("init_rls flattens the default architecture into 369 parameters") {
  MlpModel m = init_mlp(MlpConfig{9, {40}, 9, 1});
  RlsConfig cfg;  // F = 1000 I
  RlsState state = init_rls(m, cfg);
  REQUIRE(state.theta.size() == 369);
  REQUIRE(state.gain.size() == 9);
  REQUIRE(state.block_dim == 41);
  for (const auto& f : state.gain)
    CHECK((f - 1000.0 * Eigen::MatrixXd::Identity(41, 41)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("init_rls of an all-zero output layer yields all-zero theta") {
  MlpModel m = init_mlp(MlpConfig{4, {5}, 3, 1});
  m.layers.back().weights.setZero();
  m.layers.back().bias.setZero();
  RlsState state = init_rls(m, RlsConfig{});
  CHECK(state.theta.isZero(0.0));
}

TEST_CASE("flatten/unflatten round-trips the output layer exactly") {
  Rng rng(3);
  MlpModel m = oracle::random_model(rng, 5, {6}, 4);
  const Eigen::VectorXd theta = flatten_output_layer(m);
  auto [weights, bias] = theta_to_output_layer(theta, 6, 4);
  CHECK(weights == m.layers.back().weights);
  CHECK(bias == m.layers.back().bias);
}

TEST_CASE("rls config bounds are enforced") {
  MlpModel m = init_mlp(MlpConfig{3, {4}, 3, 1});
  RlsConfig c;
  c.lambda1 = 0.0;
  CHECK_THROWS_AS(init_rls(m, c), ConfigError);
  c = RlsConfig{};
  c.lambda2 = 2.5;
  CHECK_THROWS_AS(init_rls(m, c), ConfigError);
  c = RlsConfig{};
  c.f_init_scale = 0.0;
  CHECK_THROWS_AS(init_rls(m, c), ConfigError);
}

TEST_CASE("before any update the prediction reduces to the network output") {
  Rng rng(7);
  MlpModel m = oracle::random_model(rng, 5, {8}, 4);
  RlsState state = init_rls(m, RlsConfig{});
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd in = oracle::random_vector(rng, 5, -2.0, 2.0);
    const Eigen::VectorXd phi = hidden_features(m, in);
    CHECK((rls_predict(state, phi) - forward(m, in)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("bias-only feature vector picks out the bias entries") {
  Rng rng(9);
  MlpModel m = oracle::random_model(rng, 4, {5}, 3);
  RlsState state = init_rls(m, RlsConfig{});
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(6);
  phi[5] = 1.0;
  CHECK(rls_predict(state, phi) == m.layers.back().bias);
}

TEST_CASE("prediction matches the dense materialized regressor product") {
  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    RlsState state = small_random_state(rng, 7, 4);
    state.theta = oracle::random_vector(rng, 28);
    const Eigen::VectorXd phi = oracle::random_vector(rng, 7);
    const Eigen::VectorXd expect = oracle::dense_regressor(phi, 4) * state.theta;
    CHECK((rls_predict(state, phi) - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("lambda1=1, lambda2=0 keeps the adaptation gain constant") {
  Rng rng(17);
  MlpModel m = oracle::random_model(rng, 3, {4}, 2);
  RlsConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 0.0;
  RlsState state = init_rls(m, cfg);
  const std::vector<Eigen::MatrixXd> before = state.gain;
  rls_update(state, oracle::random_vector(rng, 5), oracle::random_vector(rng, 2));
  for (std::size_t d = 0; d < before.size(); ++d)
    CHECK((state.gain[d] - before[d]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero innovation leaves theta unchanged but still updates the gain") {
  Rng rng(19);
  RlsState state = small_random_state(rng, 6, 3);
  const Eigen::VectorXd phi = oracle::random_vector(rng, 6);
  const Eigen::VectorXd theta_before = state.theta;
  const Eigen::MatrixXd gain_before = state.gain[0];
  const Eigen::VectorXd y = rls_predict(state, phi);
  RlsUpdate upd = rls_update(state, phi, y);
  CHECK(upd.apriori_error.isZero(0.0));
  CHECK(state.theta == theta_before);
  CHECK((state.gain[0] - gain_before).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("recursive estimate matches the regularized batch solve") {
  Rng rng(23);
  const int block = 6, outs = 3, steps = 100;
  MlpModel m = oracle::random_model(rng, 3, {block - 1}, outs);
  RlsConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 1.0;
  cfg.f_init_scale = 1000.0;
  RlsState state = init_rls(m, cfg);
  const Eigen::VectorXd theta0 = state.theta;

  const Eigen::VectorXd theta_true = oracle::random_vector(rng, block * outs);
  std::vector<Eigen::VectorXd> phis, ys;
  for (int i = 0; i < steps; ++i) {
    Eigen::VectorXd phi = oracle::random_vector(rng, block);
    Eigen::VectorXd y(outs);
    for (int d = 0; d < outs; ++d) y[d] = phi.dot(theta_true.segment(d * block, block));
    rls_update(state, phi, y);
    phis.push_back(std::move(phi));
    ys.push_back(std::move(y));
  }
  const Eigen::VectorXd batch =
      oracle::batch_rls_solve(theta0, cfg.f_init_scale, phis, ys, outs);
  CHECK((state.theta - batch).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("gain blocks stay symmetric and positive definite on random streams") {
  Rng rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    MlpModel m = oracle::random_model(rng, 3, {3}, 2);
    RlsConfig cfg;
    cfg.lambda1 = rng.uniform(0.9, 1.0);
    cfg.lambda2 = rng.uniform(0.0, 2.0);
    cfg.f_init_scale = rng.uniform(1.0, 100.0);
    RlsState state = init_rls(m, cfg);
    for (int i = 0; i < 20; ++i)
      rls_update(state, oracle::random_vector(rng, 4), oracle::random_vector(rng, 2));
    for (const auto& f : state.gain) {
      CHECK((f - f.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("information-form identity holds for lambda2 = 1") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const double lambda1 = rng.uniform(0.9, 1.0);
    MlpModel m = oracle::random_model(rng, 3, {4}, 2);
    RlsConfig cfg;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = 1.0;
    RlsState state = init_rls(m, cfg);
    for (int i = 0; i < 5; ++i)
      rls_update(state, oracle::random_vector(rng, 5), oracle::random_vector(rng, 2));
    const Eigen::MatrixXd f_before = state.gain[0];
    const Eigen::VectorXd phi = oracle::random_vector(rng, 5);
    rls_update(state, phi, oracle::random_vector(rng, 2));
    const Eigen::MatrixXd lhs = state.gain[0].inverse();
    const Eigen::MatrixXd rhs = lambda1 * f_before.inverse() + phi * phi.transpose();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() / rhs.norm() <= 1e-6);
  }
}

TEST_CASE("noiseless stream from a fixed map converges past independent excitation") {
  Rng rng(37);
  const int block = 5, outs = 2;
  MlpModel m = oracle::random_model(rng, 3, {block - 1}, outs);
  RlsConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 1.0;
  cfg.f_init_scale = 1e8;  // weak prior so the initial estimate cannot bias the fit
  RlsState state = init_rls(m, cfg);
  const Eigen::VectorXd theta_true = oracle::random_vector(rng, block * outs);
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd phi = oracle::random_vector(rng, block);
    Eigen::VectorXd y(outs);
    for (int d = 0; d < outs; ++d) y[d] = phi.dot(theta_true.segment(d * block, block));
    rls_update(state, phi, y);
  }
  CHECK((state.theta - theta_true).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("rls_update is bit-deterministic") {
  Rng rng(41);
  RlsState a = small_random_state(rng, 5, 3);
  RlsState b = a;
  const Eigen::VectorXd phi = oracle::random_vector(rng, 5);
  const Eigen::VectorXd y = oracle::random_vector(rng, 3);
  rls_update(a, phi, y);
  rls_update(b, phi, y);
  CHECK(a.theta == b.theta);
  for (std::size_t d = 0; d < a.gain.size(); ++d) CHECK(a.gain[d] == b.gain[d]);
}

TEST_CASE("updates never couple blocks") {
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    RlsState s1 = small_random_state(rng, 5, 3);
    RlsState s2 = s1;
    const Eigen::VectorXd phi = oracle::random_vector(rng, 5);
    Eigen::VectorXd y = oracle::random_vector(rng, 3);
    rls_update(s1, phi, y);
    y[1] += 2.5;  // perturb only measurement coordinate 1
    rls_update(s2, phi, y);
    CHECK(s1.theta.segment(0, 5) == s2.theta.segment(0, 5));
    CHECK(s1.theta.segment(10, 5) == s2.theta.segment(10, 5));
    CHECK(s1.theta.segment(5, 5) != s2.theta.segment(5, 5));
    CHECK(s1.gain[0] == s2.gain[0]);  // gain does not depend on the measurement
    CHECK(s1.gain[1] == s2.gain[1]);
  }
}

TEST_CASE("non-finite inputs are rejected") {
  Rng rng(47);
  RlsState state = small_random_state(rng, 4, 2);
  Eigen::VectorXd phi = oracle::random_vector(rng, 4);
  Eigen::VectorXd y = oracle::random_vector(rng, 2);
  phi[1] = std::nan("");
  CHECK_THROWS_AS(rls_update(state, phi, y), InputError);
  phi[1] = 0.0;
  y[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(rls_update(state, phi, y), InputError);
}

TEST_CASE("a collapsed gain diagonal raises the degeneracy warning") {
  Rng rng(61);
  RlsState state = small_random_state(rng, 4, 2);
  state.gain[1] = 1e-13 * Eigen::MatrixXd::Identity(4, 4);
  const RlsUpdate upd =
      rls_update(state, oracle::random_vector(rng, 4), oracle::random_vector(rng, 2));
  CHECK(upd.degeneracy);
}

TEST_CASE("an indefinite gain matrix trips the degeneracy guard") {
  Rng rng(59);
  RlsState state = small_random_state(rng, 4, 2);
  state.gain[0] = -Eigen::MatrixXd::Identity(4, 4);  // invariant violated on purpose
  CHECK_THROWS_AS(rls_update(state, oracle::random_vector(rng, 4), Eigen::VectorXd::Zero(2)),
                  NumericalError);
}

TEST_CASE("state snapshot round-trips through json") {
  Rng rng(53);
  RlsState state = small_random_state(rng, 4, 2);
  rls_update(state, oracle::random_vector(rng, 4), oracle::random_vector(rng, 2));
  RlsState back = rls_state_from_json(rls_state_to_json(state));
  CHECK(back.theta == state.theta);
  for (std::size_t d = 0; d < state.gain.size(); ++d) CHECK(back.gain[d] == state.gain[d]);
}
