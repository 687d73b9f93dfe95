#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"
#include "sympflow/autodiff.hpp"
#include "sympflow/rng.hpp"
#include "sympflow/training.hpp"

using namespace sympflow;

TEST_CASE("rng basics") {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(u == b.uniform01());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.uniform01() != c.uniform01());

  Rng n(5);
  double mean = 0.0, var = 0.0;
  const int big = 20000;
  std::vector<double> draws(big);
  for (double& v : draws) v = n.normal();
  for (double v : draws) mean += v;
  mean /= big;
  for (double v : draws) var += (v - mean) * (v - mean);
  var /= big;
  CHECK(std::abs(mean) <= 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  Rng base(9);
  Rng f1 = base.fork(1), f2 = base.fork(2);
  CHECK(f1.uniform01() != f2.uniform01());
}

TEST_CASE("adam first steps against the closed form") {
  AdamParams ap;
  std::vector<double> params{0.0};
  AdamState st(1);

  adam_step(params, {1.0}, st, 1e-3, ap);
  // mhat = g, vhat = g^2: step is -lr * g / (|g| + eps)
  CHECK(params[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(st.step == 1);

  // second step with the same unit gradient moves by the same amount
  const double before = params[0];
  adam_step(params, {1.0}, st, 1e-3, ap);
  CHECK(params[0] - before == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam epsilon sits outside the square root") {
  std::vector<double> params{0.0};
  AdamState st(1);
  const double g = 1e-12;
  adam_step(params, {g}, st, 1e-3, {});
  // outside: -lr*g/(|g|+eps) ~ -1e-7; inside would give ~ -1e-11
  const double want = -1e-3 * g / (g + 1e-8);
  CHECK(params[0] == doctest::Approx(want).epsilon(1e-9));
  CHECK(std::abs(params[0]) > 1e-8);
}

TEST_CASE("adam validates sizes") {
  std::vector<double> params{0.0, 0.0};
  AdamState st(1);
  CHECK_THROWS_AS(adam_step(params, {1.0, 2.0}, st, 1e-3, {}), std::invalid_argument);
}

TEST_CASE("dataset sampling is deterministic and respects its spec") {
  DatasetSpec spec;
  spec.system_id = "pendulum";
  spec.n = 30;
  spec.x_box = {{-1.0, 1.0}, {-0.5, 1.5}};
  spec.h_range = {0.2, 0.5};
  spec.labels = LabelOracle::Composition6Substeps;
  spec.substeps = 10;
  spec.seed = 42;

  const auto d1 = sample_dataset(spec);
  const auto d2 = sample_dataset(spec);
  REQUIRE(d1.size() == 30);
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].x.p[0] == d2[i].x.p[0]);
    CHECK(d1[i].y.q[0] == d2[i].y.q[0]);
    CHECK(d1[i].h == d2[i].h);
    CHECK(!d1[i].t.has_value());
    CHECK(d1[i].x.p[0] >= -1.0);
    CHECK(d1[i].x.p[0] <= 1.0);
    CHECK(d1[i].x.q[0] >= -0.5);
    CHECK(d1[i].x.q[0] <= 1.5);
    CHECK(d1[i].h >= 0.2);
    CHECK(d1[i].h <= 0.5);
  }

  // labels are the composed 6th-order flow; cross-check one against RK4
  const HamiltonianSystem sys = pendulum();
  const PhasePoint ref = testing::rk4_fine(sys, 0.0, d1[0].h, d1[0].x, 4000);
  CHECK(inf_dist(d1[0].y, ref) <= 1e-9);

  // a different seed moves the draws
  spec.seed = 43;
  const auto d3 = sample_dataset(spec);
  CHECK(d1[0].x.p[0] != d3[0].x.p[0]);
}

TEST_CASE("dataset sampling with a time range") {
  DatasetSpec spec;
  spec.system_id = "forced_ho";
  spec.n = 12;
  spec.x_box = {{-1.0, 1.0}, {-1.0, 1.0}};
  spec.h_range = {0.1, 0.3};
  spec.t_range = {{0.0, 16.0}};
  spec.labels = LabelOracle::ExactFlow;
  spec.seed = 7;
  const auto data = sample_dataset(spec);
  const HamiltonianSystem sys = forced_harmonic_oscillator();
  for (const TrainingSample& s : data) {
    REQUIRE(s.t.has_value());
    CHECK(*s.t >= 0.0);
    CHECK(*s.t <= 16.0);
    CHECK(inf_dist(s.y, sys.exact_flow->eval(*s.t, s.h, s.x)) == 0.0);
  }
}

TEST_CASE("dataset sampling validation") {
  DatasetSpec spec;
  spec.system_id = "pendulum";
  spec.n = 4;
  spec.x_box = {{-1.0, 1.0}};  // needs 2 ranges
  spec.h_range = {0.1, 0.2};
  CHECK_THROWS_AS(sample_dataset(spec), std::invalid_argument);
  spec.x_box = {{-1.0, 1.0}, {-1.0, 1.0}};
  CHECK_NOTHROW(sample_dataset(spec));

  // time range must match time dependence, both ways
  spec.t_range = {{0.0, 1.0}};
  CHECK_THROWS_AS(sample_dataset(spec), std::invalid_argument);
  spec.t_range.reset();
  spec.system_id = "forced_ho";
  CHECK_THROWS_AS(sample_dataset(spec), std::invalid_argument);

  // composition labels need a separable system
  spec.system_id = "linear";
  spec.labels = LabelOracle::Composition6Substeps;
  CHECK_THROWS_AS(sample_dataset(spec), std::invalid_argument);
  spec.labels = LabelOracle::ExactFlow;
  CHECK_NOTHROW(sample_dataset(spec));
}

TEST_CASE("training loop semantics") {
  DatasetSpec dspec;
  dspec.system_id = "pendulum";
  dspec.n = 24;
  dspec.x_box = {{-1.0, 1.0}, {-1.0, 1.0}};
  dspec.h_range = {0.2, 0.5};
  dspec.labels = LabelOracle::Composition6Substeps;
  dspec.seed = 3;
  const auto data = sample_dataset(dspec);

  const SympNetModel m0 = init_model(Kind::TG, 1, {2, 8, 0}, 11);

  SUBCASE("history holds the pre-update loss") {
    TrainConfig cfg;
    cfg.epochs = 1;
    const TrainResult r = train(m0, data, cfg);
    REQUIRE(r.loss_history.size() == 1);
    CHECK(r.loss_history[0] == loss_and_gradients(m0, data).loss);
    CHECK(r.model.params != m0.params);
  }

  SUBCASE("loss drops over a short run") {
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 1e-2;
    const TrainResult r = train(m0, data, cfg);
    REQUIRE(r.loss_history.size() == 200);
    CHECK(r.loss_history.back() < 0.3 * r.loss_history.front());
  }

  SUBCASE("checkpoint cadence") {
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.checkpoint_cadence = 10;
    std::vector<int> seen;
    TrainCallbacks cb;
    cb.on_checkpoint = [&](int e, const SympNetModel&) { seen.push_back(e); };
    train(m0, data, cfg, cb);
    CHECK(seen == std::vector<int>{10, 20});
  }

  SUBCASE("training is deterministic") {
    TrainConfig cfg;
    cfg.epochs = 50;
    const TrainResult a = train(m0, data, cfg);
    const TrainResult b = train(m0, data, cfg);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.model.params == b.model.params);
  }

  SUBCASE("non-finite loss raises with the epoch attached") {
    auto poisoned = data;
    poisoned[0].x.p[0] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs = 5;
    CHECK_THROWS_AS(train(m0, poisoned, cfg), TrainingDivergedError);
    try {
      train(m0, poisoned, cfg);
    } catch (const TrainingDivergedError& e) {
      CHECK(e.epoch == 0);
    }
  }

  SUBCASE("an absurd learning rate blows up and is reported") {
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 1e80;
    CHECK_THROWS_AS(train(m0, data, cfg), TrainingDivergedError);
  }

  SUBCASE("config validation") {
    TrainConfig cfg;
    cfg.epochs = -1;
    CHECK_THROWS_AS(train(m0, data, cfg), std::invalid_argument);
    cfg.epochs = 1;
    cfg.full_batch = false;
    CHECK_THROWS_AS(train(m0, data, cfg), std::invalid_argument);
  }
}

TEST_CASE("rollout composes the learned map") {
  const SympNetModel tg = init_model(Kind::TG, 1, {2, 6, 0}, 17);
  const PhasePoint x0(1.0, 0.0);
  const auto traj = rollout(tg, x0, 0.1, 5);
  REQUIRE(traj.size() == 6);
  PhasePoint cur = x0;
  for (int i = 0; i < 5; ++i) {
    cur = forward(tg, 0.1, {}, cur);
    CHECK(inf_dist(traj[i + 1], cur) == 0.0);
  }

  const SympNetModel natla = init_model(Kind::NATLA, 1, {3, 0, 2}, 18);
  const auto ttraj = rollout(natla, x0, 0.2, 4, 1.5);
  REQUIRE(ttraj.size() == 5);
  cur = x0;
  for (int i = 0; i < 4; ++i) {
    cur = forward(natla, 0.2, 1.5 + 0.2 * i, cur);
    CHECK(inf_dist(ttraj[i + 1], cur) == 0.0);
  }

  CHECK_THROWS_AS(rollout(natla, x0, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(rollout(tg, x0, 0.1, -1), std::invalid_argument);
}
