#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sympflow/linalg.hpp"
#include "sympflow/rng.hpp"
#include "sympflow/sympnet.hpp"

using namespace sympflow;

namespace {

Mat forward_jacobian_fd(const SympNetModel& m, double h, std::optional<double> t,
                        const PhasePoint& x) {
  const int n2 = 2 * m.d;
  Mat J(n2, n2);
  const double eps = 1e-6;
  for (int j = 0; j < n2; ++j) {
    std::vector<double> fp = x.flat(), fm = x.flat();
    fp[j] += eps;
    fm[j] -= eps;
    const std::vector<double> a = forward(m, h, t, PhasePoint::from_flat(fp)).flat();
    const std::vector<double> b = forward(m, h, t, PhasePoint::from_flat(fm)).flat();
    for (int i = 0; i < n2; ++i) J(i, j) = (a[i] - b[i]) / (2.0 * eps);
  }
  return J;
}

PhasePoint random_point(Rng& rng, int d) {
  PhasePoint x;
  x.p.resize(d);
  x.q.resize(d);
  for (int i = 0; i < d; ++i) {
    x.p[i] = rng.uniform(-1.0, 1.0);
    x.q[i] = rng.uniform(-1.0, 1.0);
  }
  return x;
}

// architectures exercised by the invariant sweeps
struct KindArch {
  Kind kind;
  int d;
  ArchSpec arch;
};

std::vector<KindArch> sweep_cases() {
  return {
      {Kind::TG, 1, {3, 4, 0}},    {Kind::TG, 2, {2, 5, 0}},
      {Kind::NATG, 1, {3, 4, 0}},  {Kind::NATG, 3, {2, 3, 0}},
      {Kind::OTLA, 1, {3, 0, 3}},  {Kind::OTLA, 2, {2, 0, 2}},
      {Kind::TLA, 1, {4, 0, 2}},   {Kind::TLA, 2, {3, 0, 3}},
      {Kind::NATLA, 1, {4, 0, 2}}, {Kind::NATLA, 2, {2, 0, 2}},
  };
}

void zero_time_params(SympNetModel& m) {
  for (const ModuleSlot& s : m.mods) {
    if (!s.has_time) continue;
    const int n = s.type == ModuleType::Gradient ? s.width : m.d;
    for (int i = 0; i < n; ++i) m.params[s.off_c + i] = 0.0;
  }
}

}  // namespace

TEST_CASE("kind and activation registries") {
  CHECK(kind_name(Kind::TG) == "tg");
  CHECK(kind_from_name("natla") == Kind::NATLA);
  CHECK_THROWS_AS(kind_from_name("bogus"), std::invalid_argument);
  CHECK(!kind_time_aware(Kind::TG));
  CHECK(!kind_time_aware(Kind::OTLA));
  CHECK(!kind_time_aware(Kind::TLA));
  CHECK(kind_time_aware(Kind::NATG));
  CHECK(kind_time_aware(Kind::NATLA));

  const Activation* th = activation_registry("tanh");
  CHECK(th->f(0.3) == doctest::Approx(std::tanh(0.3)).epsilon(1e-15));
  const double y = std::tanh(0.3);
  CHECK(th->df_from_value(y) == doctest::Approx(1.0 - y * y).epsilon(1e-15));
  const Activation* sg = activation_registry("sigmoid");
  const double s = 1.0 / (1.0 + std::exp(-0.7));
  CHECK(sg->f(0.7) == doctest::Approx(s).epsilon(1e-15));
  CHECK(sg->df_from_value(s) == doctest::Approx(s * (1.0 - s)).epsilon(1e-15));
  CHECK_THROWS_AS(activation_registry("relu"), std::invalid_argument);
}

TEST_CASE("frozen values of single modules") {
  SUBCASE("up gradient module") {
    GradientModuleParams g;
    g.direction = Direction::Up;
    g.width = 1;
    g.K = {1.0};
    g.a = {1.0};
    g.b = {0.0};
    const SympNetModel m = make_gradient_model(Kind::TG, 1, {g});
    const PhasePoint y = forward(m, 0.5, {}, PhasePoint(0.0, 1.0));
    CHECK(y.p[0] == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-16));
    CHECK(y.p[0] == doctest::Approx(0.3807970779778824).epsilon(1e-15));
    CHECK(y.q[0] == 1.0);
  }
  SUBCASE("low gradient module") {
    GradientModuleParams g;
    g.direction = Direction::Low;
    g.width = 1;
    g.K = {2.0};
    g.a = {0.5};
    g.b = {0.1};
    const SympNetModel m = make_gradient_model(Kind::TG, 1, {g});
    const PhasePoint y = forward(m, 0.5, {}, PhasePoint(1.0, 0.0));
    CHECK(y.p[0] == 1.0);
    CHECK(y.q[0] == doctest::Approx(0.5 * 2.0 * 0.5 * std::tanh(2.1)).epsilon(1e-15));
  }
  SUBCASE("unit shear chain") {
    LinearModuleParams lin;
    lin.start = StartParity::UpFirst;
    lin.n_sub = 1;
    lin.S = {2.0};
    const PhasePoint y = linear_module_apply(lin, 1, PhasePoint(1.0, 1.0));
    CHECK(y.p[0] == 3.0);
    CHECK(y.q[0] == 1.0);
    const PhasePoint back = linear_module_inverse(lin, 1, y);
    CHECK(back.p[0] == 1.0);
    CHECK(back.q[0] == 1.0);
  }
}

TEST_CASE("hand-computed OTLA forward, d = 1") {
  // two linear modules (one shear each) around one activation shear
  LinearModuleParams w1;
  w1.start = StartParity::UpFirst;
  w1.n_sub = 1;
  w1.S = {0.3};
  w1.bias = {0.05, -0.02};
  LinearModuleParams w2;
  w2.start = StartParity::LowFirst;
  w2.n_sub = 1;
  w2.S = {-0.4};
  w2.bias = {0.01, 0.02};
  ActivationModuleParams act;
  act.direction = Direction::Up;
  act.a = {0.7};
  const SympNetModel m = make_otla_model(1, {w1, w2}, {act});

  const double h = 0.25, p0 = 0.4, q0 = -0.6;
  // w1: up shear then bias
  double p = p0 + h * 0.3 * q0 + h * 0.05;
  double q = q0 + h * (-0.02);
  // activation, up
  p = p + h * 0.7 * std::tanh(q);
  // w2: low shear then bias
  q = q + h * (-0.4) * p + h * 0.02;
  p = p + h * 0.01;

  const PhasePoint y = forward(m, h, {}, PhasePoint(p0, q0));
  CHECK(y.p[0] == doctest::Approx(p).epsilon(1e-15));
  CHECK(y.q[0] == doctest::Approx(q).epsilon(1e-15));
}

TEST_CASE("hand-computed TLA block, d = 1") {
  TlaBlockParams blk;
  blk.lin.start = StartParity::UpFirst;
  blk.lin.n_sub = 2;
  blk.lin.S = {0.8, -0.5};
  blk.act.direction = Direction::Up;
  blk.act.a = {0.6};
  blk.act.b = {0.2};
  const SympNetModel m = make_tla_model(Kind::TLA, 1, {blk});

  const double h = 0.3, p0 = 0.5, q0 = 0.7;
  // v: up shear S1, low shear S2 (unit scale)
  double p = p0 + 0.8 * q0;
  double q = q0 + (-0.5) * p;
  // w: up kick through the shifted activation
  p = p + h * 0.6 * std::tanh(q + 0.2);
  // v^{-1}: undo in reverse order with negated scale
  q = q - (-0.5) * p;
  p = p - 0.8 * q;

  const PhasePoint y = forward(m, h, {}, PhasePoint(p0, q0));
  CHECK(y.p[0] == doctest::Approx(p).epsilon(1e-14));
  CHECK(y.q[0] == doctest::Approx(q).epsilon(1e-14));
}

TEST_CASE("time-aware clock advances by h/m per module") {
  SUBCASE("gradient version") {
    GradientModuleParams g0;
    g0.direction = Direction::Up;
    g0.width = 1;
    g0.K = {0.9};
    g0.a = {0.8};
    g0.b = {0.1};
    g0.c = {0.4};
    GradientModuleParams g1;
    g1.direction = Direction::Low;
    g1.width = 1;
    g1.K = {-0.7};
    g1.a = {0.5};
    g1.b = {-0.2};
    g1.c = {0.3};
    const SympNetModel m = make_gradient_model(Kind::NATG, 1, {g0, g1});

    const double h = 0.4, t0 = 1.3, p0 = 0.2, q0 = -0.5;
    double p = p0 + h * 0.9 * 0.8 * std::tanh(0.9 * q0 + 0.4 * t0 + 0.1);
    double q = q0 + h * (-0.7) * 0.5 * std::tanh(-0.7 * p + 0.3 * (t0 + h / 2.0) - 0.2);

    const PhasePoint y = forward(m, h, t0, PhasePoint(p0, q0));
    CHECK(y.p[0] == doctest::Approx(p).epsilon(1e-15));
    CHECK(y.q[0] == doctest::Approx(q).epsilon(1e-15));
  }
  SUBCASE("block version") {
    TlaBlockParams b0;
    b0.lin.start = StartParity::UpFirst;
    b0.lin.n_sub = 1;
    b0.lin.S = {0.3};
    b0.act.direction = Direction::Up;
    b0.act.a = {0.6};
    b0.act.b = {0.1};
    b0.act.c = {0.5};
    TlaBlockParams b1;
    b1.lin.start = StartParity::LowFirst;
    b1.lin.n_sub = 1;
    b1.lin.S = {-0.2};
    b1.act.direction = Direction::Low;
    b1.act.a = {0.4};
    b1.act.b = {-0.3};
    b1.act.c = {0.2};
    const SympNetModel m = make_tla_model(Kind::NATLA, 1, {b0, b1});

    const double h = 0.4, t0 = 2.1, p0 = -0.3, q0 = 0.8;
    // block 0 at clock t0
    double p = p0 + 0.3 * q0;
    p = p + h * 0.6 * std::tanh(q0 + 0.5 * t0 + 0.1);
    p = p - 0.3 * q0;
    // block 1 at clock t0 + h/2
    double q = q0 + (-0.2) * p;
    q = q + h * 0.4 * std::tanh(p + 0.2 * (t0 + h / 2.0) - 0.3);
    q = q - (-0.2) * p;

    const PhasePoint y = forward(m, h, t0, PhasePoint(p0, q0));
    CHECK(y.p[0] == doctest::Approx(p).epsilon(1e-14));
    CHECK(y.q[0] == doctest::Approx(q).epsilon(1e-14));
  }
}

TEST_CASE("parameter counts for uniform architectures") {
  CHECK(param_count(Kind::TG, 2, {3, 5, 0}) == 60);
  CHECK(param_count(Kind::NATG, 2, {3, 5, 0}) == 75);
  CHECK(param_count(Kind::OTLA, 2, {3, 0, 2}) == 34);
  CHECK(param_count(Kind::TLA, 2, {3, 0, 2}) == 30);
  CHECK(param_count(Kind::NATLA, 2, {3, 0, 2}) == 36);
  for (const KindArch& c : sweep_cases()) {
    const SympNetModel m = init_model(c.kind, c.d, c.arch, 99);
    CHECK(m.n_params() == param_count(c.kind, c.d, c.arch));
  }
}

TEST_CASE("initialization is deterministic in the seed") {
  const SympNetModel a = init_model(Kind::TLA, 2, {3, 0, 2}, 1234);
  const SympNetModel b = init_model(Kind::TLA, 2, {3, 0, 2}, 1234);
  const SympNetModel c = init_model(Kind::TLA, 2, {3, 0, 2}, 1235);
  CHECK(a.params == b.params);
  CHECK(a.params != c.params);
  CHECK(a.seed == 1234);
}

TEST_CASE("structural invariants across kinds") {
  Rng rng(2024);
  for (const KindArch& c : sweep_cases()) {
    CAPTURE(kind_name(c.kind));
    CAPTURE(c.d);
    for (int trial = 0; trial < 3; ++trial) {
      const SympNetModel m = init_model(c.kind, c.d, c.arch, 100 + trial);
      const PhasePoint x = random_point(rng, c.d);
      const double h = rng.uniform(-0.5, 0.5);
      const std::optional<double> t =
          kind_time_aware(c.kind) ? std::optional<double>(rng.uniform(0.0, 10.0))
                                  : std::nullopt;

      // symplectic for every h, t, x
      const Mat J = forward_jacobian(m, h, t, x);
      CHECK(symplectic_residual(J) <= 1e-11);

      // the analytic Jacobian is the Jacobian of forward
      const Mat Jfd = forward_jacobian_fd(m, h, t, x);
      for (std::size_t i = 0; i < J.rows; ++i)
        for (std::size_t j = 0; j < J.cols; ++j)
          CHECK(std::abs(J(i, j) - Jfd(i, j)) <= 1e-6);

      // identity at h = 0
      CHECK(inf_dist(forward(m, 0.0, t, x), x) <= 1e-13);

      // evaluation is deterministic
      const PhasePoint y1 = forward(m, h, t, x);
      const PhasePoint y2 = forward(m, h, t, x);
      CHECK(inf_dist(y1, y2) == 0.0);
    }
  }
}

TEST_CASE("shear chains invert to roundoff") {
  Rng rng(31);
  for (int d : {1, 2, 3}) {
    for (int n_sub : {1, 2, 4}) {
      LinearModuleParams lin;
      lin.start = n_sub % 2 == 0 ? StartParity::LowFirst : StartParity::UpFirst;
      lin.n_sub = n_sub;
      lin.S.resize(static_cast<std::size_t>(n_sub) * packed_sym_size(d));
      for (double& v : lin.S) v = rng.normal(0.0, 0.5);
      const PhasePoint x = random_point(rng, d);
      const PhasePoint rt = linear_module_inverse(lin, d, linear_module_apply(lin, d, x));
      CHECK(inf_dist(rt, x) <= 1e-12);
    }
  }
}

TEST_CASE("generators of gradient-style kinds stay separable") {
  // d/dh at h=0 has p-part depending only on q and q-part only on p
  Rng rng(55);
  for (Kind kind : {Kind::TG, Kind::OTLA, Kind::NATG}) {
    ArchSpec arch = kind == Kind::OTLA ? ArchSpec{3, 0, 2} : ArchSpec{3, 4, 0};
    const SympNetModel m = init_model(kind, 2, arch, 7);
    const std::optional<double> t =
        kind_time_aware(kind) ? std::optional<double>(2.5) : std::nullopt;
    PhasePoint x1 = random_point(rng, 2);
    PhasePoint x2 = x1, x3 = x1;
    x2.p[0] += 0.7;
    x2.p[1] -= 0.3;
    x3.q[0] -= 0.4;
    x3.q[1] += 0.6;
    const std::vector<double> g1 = dh_at_zero(m, t, x1);
    const std::vector<double> g2 = dh_at_zero(m, t, x2);
    const std::vector<double> g3 = dh_at_zero(m, t, x3);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(g1[i] - g2[i]) <= 1e-9);      // p-part blind to p
      CHECK(std::abs(g1[2 + i] - g3[2 + i]) <= 1e-9);  // q-part blind to q
    }
  }
}

TEST_CASE("analytic h-derivative of a two-module gradient model") {
  GradientModuleParams g0;
  g0.direction = Direction::Up;
  g0.width = 2;
  g0.K = {0.5, -0.8};
  g0.a = {0.3, 0.9};
  g0.b = {0.1, -0.4};
  GradientModuleParams g1;
  g1.direction = Direction::Low;
  g1.width = 1;
  g1.K = {1.2};
  g1.a = {-0.6};
  g1.b = {0.0};
  const SympNetModel m = make_gradient_model(Kind::TG, 1, {g0, g1});
  const PhasePoint x(0.4, -0.9);
  const std::vector<double> g = dh_at_zero(m, {}, x);
  const double dp = 0.5 * 0.3 * std::tanh(0.5 * x.q[0] + 0.1) +
                    (-0.8) * 0.9 * std::tanh(-0.8 * x.q[0] - 0.4);
  const double dq = 1.2 * (-0.6) * std::tanh(1.2 * x.p[0]);
  CHECK(g[0] == doctest::Approx(dp).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(dq).epsilon(1e-9));
}

TEST_CASE("zeroed time coefficients make time-aware kinds autonomous") {
  SympNetModel natg = init_model(Kind::NATG, 1, {3, 4, 0}, 21);
  zero_time_params(natg);
  const PhasePoint x(0.3, -0.7);
  const PhasePoint a = forward(natg, 0.25, 0.0, x);
  const PhasePoint b = forward(natg, 0.25, 9.7, x);
  CHECK(inf_dist(a, b) == 0.0);

  SympNetModel natla = init_model(Kind::NATLA, 1, {4, 0, 2}, 22);
  zero_time_params(natla);
  const PhasePoint c = forward(natla, 0.25, 0.0, x);
  const PhasePoint d = forward(natla, 0.25, 9.7, x);
  CHECK(inf_dist(c, d) == 0.0);
}

TEST_CASE("degenerate parameter settings") {
  // all-zero OTLA parameters give the identity at every h
  SympNetModel otla = init_model(Kind::OTLA, 2, {3, 0, 2}, 5);
  for (double& v : otla.params) v = 0.0;
  const PhasePoint x = PhasePoint({0.2, -0.4}, {0.9, 0.1});
  CHECK(inf_dist(forward(otla, 0.37, {}, x), x) == 0.0);

  // TLA with zeroed kick amplitudes collapses to v^{-1} . v
  SympNetModel tla = init_model(Kind::TLA, 2, {3, 0, 2}, 6);
  for (const ModuleSlot& s : tla.mods)
    for (int i = 0; i < tla.d; ++i) tla.params[s.off_a + i] = 0.0;
  CHECK(inf_dist(forward(tla, 0.37, {}, x), x) <= 1e-13);
}

TEST_CASE("construction validates shapes") {
  GradientModuleParams g;
  g.direction = Direction::Up;
  g.width = 2;
  g.K = {1.0, 2.0};
  g.a = {1.0};  // wrong length
  g.b = {0.0, 0.0};
  CHECK_THROWS_AS(make_gradient_model(Kind::TG, 1, {g}), std::invalid_argument);

  g.a = {1.0, 1.0};
  CHECK_NOTHROW(make_gradient_model(Kind::TG, 1, {g}));
  // TG modules must not carry time coefficients
  g.c = {0.1, 0.2};
  CHECK_THROWS_AS(make_gradient_model(Kind::TG, 1, {g}), std::invalid_argument);
  // NATG modules must
  CHECK_NOTHROW(make_gradient_model(Kind::NATG, 1, {g}));
  g.c.clear();
  CHECK_THROWS_AS(make_gradient_model(Kind::NATG, 1, {g}), std::invalid_argument);

  // OTLA needs exactly layers-1 activations
  LinearModuleParams lin;
  lin.n_sub = 1;
  lin.S = {0.1};
  lin.bias = {0.0, 0.0};
  CHECK_THROWS_AS(make_otla_model(1, {lin, lin}, {}), std::invalid_argument);

  // OTLA activation modules have no shift
  ActivationModuleParams act;
  act.a = {0.5};
  act.b = {0.1};
  CHECK_THROWS_AS(make_otla_model(1, {lin, lin}, {act}), std::invalid_argument);
  act.b.clear();
  CHECK_NOTHROW(make_otla_model(1, {lin, lin}, {act}));

  // TLA blocks reject biases in the shear chain
  TlaBlockParams blk;
  blk.lin.n_sub = 1;
  blk.lin.S = {0.1};
  blk.lin.bias = {0.0, 0.0};
  blk.act.a = {0.5};
  blk.act.b = {0.0};
  CHECK_THROWS_AS(make_tla_model(Kind::TLA, 1, {blk}), std::invalid_argument);
  blk.lin.bias.clear();
  CHECK_NOTHROW(make_tla_model(Kind::TLA, 1, {blk}));

  // time argument policy at evaluation
  const SympNetModel natg = init_model(Kind::NATG, 1, {2, 2, 0}, 3);
  CHECK_THROWS_AS(forward(natg, 0.1, {}, PhasePoint(0.0, 0.0)), std::invalid_argument);
  const SympNetModel tg = init_model(Kind::TG, 1, {2, 2, 0}, 3);
  CHECK_NOTHROW(forward(tg, 0.1, 5.0, PhasePoint(0.0, 0.0)));  // t ignored
}

TEST_CASE("packed symmetric indexing") {
  CHECK(packed_sym_size(1) == 1);
  CHECK(packed_sym_size(3) == 6);
  CHECK(packed_sym_index(3, 0, 0) == 0);
  CHECK(packed_sym_index(3, 0, 2) == 2);
  CHECK(packed_sym_index(3, 1, 1) == 3);
  CHECK(packed_sym_index(3, 2, 1) == 4);  // symmetric access
  CHECK(packed_sym_index(3, 2, 2) == 5);
}
