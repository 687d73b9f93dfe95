#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "support/oracles.hpp"
#include "sympflow/hamiltonians.hpp"
#include "sympflow/rng.hpp"

using namespace sympflow;
using testing::mat2_exp;
using testing::rk4_fine;

namespace {

// central difference of H along coordinate i of the flat (p,q) vector
double dH_fd(const HamiltonianSystem& sys, const PhasePoint& x, double t, int i) {
  const double eps = 1e-6;
  PhasePoint a = x, b = x;
  double* va = i < sys.d ? &a.p[i] : &a.q[i - sys.d];
  double* vb = i < sys.d ? &b.p[i] : &b.q[i - sys.d];
  *va += eps;
  *vb -= eps;
  return (sys.hamiltonian(a, t) - sys.hamiltonian(b, t)) / (2.0 * eps);
}

}  // namespace

TEST_CASE("pendulum gradients and vector field are consistent") {
  const HamiltonianSystem sys = pendulum();
  CHECK(sys.d == 1);
  CHECK(sys.separable);
  CHECK(!sys.time_dependent);

  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PhasePoint x(rng.uniform(-2.0, 2.0), rng.uniform(-3.0, 3.0));
    const double h_val = sys.hamiltonian(x, 0.0);
    CHECK(h_val == doctest::Approx(0.5 * x.p[0] * x.p[0] - std::cos(x.q[0])).epsilon(1e-14));

    CHECK(sys.grad_K(x.p, 0.0)[0] == doctest::Approx(dH_fd(sys, x, 0.0, 0)).epsilon(1e-8));
    CHECK(sys.grad_V(x.q, 0.0)[0] == doctest::Approx(dH_fd(sys, x, 0.0, 1)).epsilon(1e-8));

    const PhasePoint f = sys.vector_field(x, 0.0);
    CHECK(f.p[0] == doctest::Approx(-std::sin(x.q[0])).epsilon(1e-14));
    CHECK(f.q[0] == doctest::Approx(x.p[0]).epsilon(1e-14));

    CHECK(sys.hess_K(x.p, 0.0)(0, 0) == doctest::Approx(1.0));
    CHECK(sys.hess_V(x.q, 0.0)(0, 0) == doctest::Approx(std::cos(x.q[0])).epsilon(1e-12));
  }
}

TEST_CASE("pendulum reference flow matches a fine RK4 run") {
  const HamiltonianSystem sys = pendulum();
  REQUIRE(sys.exact_flow.has_value());
  CHECK(sys.exact_flow->accuracy == ExactFlow::Accuracy::ReferenceNumeric);

  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    PhasePoint x(rng.uniform(-1.2, 1.2), rng.uniform(-1.5, 1.5));
    const double h = rng.uniform(0.1, 0.6);
    const PhasePoint got = sys.exact_flow->eval(0.0, h, x);
    const PhasePoint want = rk4_fine(sys, 0.0, h, x, 4000);
    CHECK(inf_dist(got, want) <= 1e-10);
    // energy along the reference flow
    CHECK(std::abs(sys.hamiltonian(got, 0.0) - sys.hamiltonian(x, 0.0)) <= 1e-10);
  }
}

TEST_CASE("pendulum reference flow composes") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x(0.7, -0.4);
  const PhasePoint one = sys.exact_flow->eval(0.0, 0.7, x);
  const PhasePoint two =
      sys.exact_flow->eval(0.0, 0.4, sys.exact_flow->eval(0.0, 0.3, x));
  CHECK(inf_dist(one, two) <= 1e-11);
}

TEST_CASE("linear system flow equals the matrix exponential") {
  const HamiltonianSystem sys = linear_nonseparable();
  CHECK(!sys.separable);
  CHECK(!sys.time_dependent);
  REQUIRE(sys.exact_flow.has_value());
  CHECK(sys.exact_flow->accuracy == ExactFlow::Accuracy::ClosedForm);

  // d/dt (p,q) = M (p,q) with M = [[-0.4, -1], [1, 0.4]]
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const double h = rng.uniform(-1.5, 1.5);
    const auto e = mat2_exp({-0.4 * h, -1.0 * h, 1.0 * h, 0.4 * h});
    PhasePoint x(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const PhasePoint got = sys.exact_flow->eval(0.0, h, x);
    CHECK(std::abs(got.p[0] - (e[0] * x.p[0] + e[1] * x.q[0])) <= 1e-13);
    CHECK(std::abs(got.q[0] - (e[2] * x.p[0] + e[3] * x.q[0])) <= 1e-13);
    CHECK(std::abs(sys.hamiltonian(got, 0.0) - sys.hamiltonian(x, 0.0)) <= 1e-12);
  }

  // cross-check against an integrator that never saw the closed form
  const PhasePoint x(1.0, 0.5);
  CHECK(inf_dist(sys.exact_flow->eval(0.0, 0.8, x), rk4_fine(sys, 0.0, 0.8, x, 2000)) <=
        1e-12);
}

TEST_CASE("forced oscillator flow matches fine RK4 from several clocks") {
  const HamiltonianSystem sys = forced_harmonic_oscillator();
  CHECK(sys.separable);
  CHECK(sys.time_dependent);
  REQUIRE(sys.exact_flow.has_value());

  Rng rng(14);
  for (int trial = 0; trial < 8; ++trial) {
    PhasePoint x(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const double t0 = rng.uniform(0.0, 12.0);
    const double h = rng.uniform(0.05, 0.5);
    const PhasePoint got = sys.exact_flow->eval(t0, h, x);
    const PhasePoint want = rk4_fine(sys, t0, h, x, 3000);
    CHECK(inf_dist(got, want) <= 1e-11);
  }

  // the flow genuinely depends on the starting clock
  const PhasePoint x(0.3, -0.2);
  CHECK(inf_dist(sys.exact_flow->eval(0.0, 0.4, x), sys.exact_flow->eval(1.0, 0.4, x)) >
        1e-3);

  // gradient structure: dp = f0 sin(omega t) - q, dq = p  (omega0 = 1)
  const double t = 0.73;
  const PhasePoint f = sys.vector_field(x, t);
  CHECK(f.p[0] == doctest::Approx(std::sin(2.0 * t) - x.q[0]).epsilon(1e-13));
  CHECK(f.q[0] == doctest::Approx(x.p[0]).epsilon(1e-13));
  CHECK(sys.grad_V(x.q, t)[0] ==
        doctest::Approx(x.q[0] - std::sin(2.0 * t)).epsilon(1e-13));
}

TEST_CASE("forced oscillator rejects resonant and degenerate frequencies") {
  CHECK_THROWS_AS(forced_harmonic_oscillator(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(forced_harmonic_oscillator(0.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(forced_harmonic_oscillator(1.0, -2.0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(forced_harmonic_oscillator(1.0, 2.0, 0.0));
}

TEST_CASE("system lookup by id") {
  CHECK(make_system("pendulum").id == "pendulum");
  CHECK(make_system("linear").id == "linear");
  CHECK(make_system("forced_ho").id == "forced_ho");
  CHECK_THROWS_AS(make_system("nope"), std::invalid_argument);
}
