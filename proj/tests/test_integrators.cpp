#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"
#include "sympflow/integrators.hpp"
#include "sympflow/linalg.hpp"
#include "sympflow/rng.hpp"

using namespace sympflow;
using testing::rk4_fine;

namespace {

// least squares slope of log(err) vs log(h)
double order_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(hs.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(hs[i]);
    const double ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Mat step_jacobian_fd(Scheme s, const HamiltonianSystem& sys, double t, double h,
                     const PhasePoint& x) {
  const int n2 = 2 * sys.d;
  Mat J(n2, n2);
  const double eps = 1e-6;
  for (int j = 0; j < n2; ++j) {
    std::vector<double> fp = x.flat(), fm = x.flat();
    fp[j] += eps;
    fm[j] -= eps;
    const PhasePoint xp = step(s, sys, t, h, PhasePoint::from_flat(fp));
    const PhasePoint xm = step(s, sys, t, h, PhasePoint::from_flat(fm));
    const std::vector<double> a = xp.flat(), b = xm.flat();
    for (int i = 0; i < n2; ++i) J(i, j) = (a[i] - b[i]) / (2.0 * eps);
  }
  return J;
}

}  // namespace

TEST_CASE("symplectic Euler frozen step on the pendulum") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x(1.0, 0.0);
  const PhasePoint y = step(Scheme::SymplecticEulerVK, sys, 0.0, 0.1, x);
  // kick with V at q=0 leaves p, then drift with the updated p
  CHECK(y.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y.q[0] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("Stormer-Verlet frozen step on the pendulum") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x(1.0, 0.0);
  const PhasePoint y = step(Scheme::StormerVerlet, sys, 0.0, 0.1, x);
  CHECK(y.q[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(y.p[0] == doctest::Approx(1.0 - 0.05 * std::sin(0.1)).epsilon(1e-15));
}

TEST_CASE("scheme metadata") {
  CHECK(scheme_info(Scheme::SymplecticEulerVK).order == 1);
  CHECK(scheme_info(Scheme::StormerVerlet).order == 2);
  CHECK(scheme_info(Scheme::Composition6).order == 6);
  CHECK(scheme_info(Scheme::RK4Oracle).order == 4);
  CHECK(scheme_info(Scheme::SymplecticEulerVK).symplectic);
  CHECK(scheme_info(Scheme::StormerVerlet).symplectic);
  CHECK(scheme_info(Scheme::Composition6).symplectic);
  CHECK(!scheme_info(Scheme::RK4Oracle).symplectic);
  CHECK(scheme_info(Scheme::Composition6).name == "composition6");
}

TEST_CASE("global convergence orders on the pendulum against an RK4 oracle") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x(0.8, 0.6);
  const double T = 2.0;
  const PhasePoint want = rk4_fine(sys, 0.0, T, x, 20000);

  auto run = [&](Scheme s, const std::vector<double>& hs) {
    std::vector<double> errs;
    for (double h : hs) {
      const int n = static_cast<int>(std::lround(T / h));
      errs.push_back(inf_dist(integrate(s, sys, 0.0, h, n, x).back(), want));
    }
    return order_slope(hs, errs);
  };

  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  CHECK(run(Scheme::SymplecticEulerVK, hs) == doctest::Approx(1.0).epsilon(0.25));
  CHECK(run(Scheme::StormerVerlet, hs) == doctest::Approx(2.0).epsilon(0.2));
  CHECK(run(Scheme::RK4Oracle, hs) == doctest::Approx(4.0).epsilon(0.15));
  // larger steps for the 6th-order scheme so the error stays above roundoff
  const std::vector<double> hs6{0.5, 0.25, 0.125};
  CHECK(run(Scheme::Composition6, hs6) == doctest::Approx(6.0).epsilon(0.12));
}

TEST_CASE("composition6 on the forced oscillator hits its order") {
  const HamiltonianSystem sys = forced_harmonic_oscillator();
  const PhasePoint x(0.5, -0.3);
  const double t0 = 0.4, T = 2.0;
  const PhasePoint want = sys.exact_flow->eval(t0, T, x);
  std::vector<double> hs{0.4, 0.2, 0.1}, errs;
  for (double h : hs) {
    const int n = static_cast<int>(std::lround(T / h));
    errs.push_back(inf_dist(integrate(Scheme::Composition6, sys, t0, h, n, x).back(), want));
  }
  const double slope = order_slope(hs, errs);
  CHECK(slope >= 5.5);
  CHECK(slope <= 7.0);
}

TEST_CASE("step Jacobians match finite differences and are symplectic") {
  const HamiltonianSystem sys = pendulum();
  Rng rng(77);
  for (Scheme s : {Scheme::SymplecticEulerVK, Scheme::StormerVerlet,
                   Scheme::Composition6}) {
    for (int trial = 0; trial < 5; ++trial) {
      const PhasePoint x(rng.uniform(-1.5, 1.5), rng.uniform(-2.0, 2.0));
      const double h = rng.uniform(0.05, 0.5);
      const Mat J = step_jacobian(s, sys, 0.0, h, x);
      const Mat Jfd = step_jacobian_fd(s, sys, 0.0, h, x);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(J(i, j) - Jfd(i, j)) <= 1e-8);
      CHECK(symplectic_residual(J) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(step_jacobian(Scheme::RK4Oracle, sys, 0.0, 0.1, PhasePoint(1.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("long Stormer-Verlet runs keep the energy bounded") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x0(1.0, 0.3);
  const double e0 = sys.hamiltonian(x0, 0.0);
  const std::vector<PhasePoint> traj =
      integrate(Scheme::StormerVerlet, sys, 0.0, 0.1, 5000, x0);
  CHECK(traj.size() == 5001);
  double worst = 0.0;
  for (const PhasePoint& x : traj)
    worst = std::max(worst, std::abs(sys.hamiltonian(x, 0.0) - e0));
  CHECK(worst <= 5e-3);  // h^2 scale, no secular growth over 5000 steps
}

TEST_CASE("integrate threads the clock through time-dependent steps") {
  const HamiltonianSystem sys = forced_harmonic_oscillator();
  const PhasePoint x0(0.1, 0.2);
  const double t0 = 0.7, h = 0.05;
  const std::vector<PhasePoint> traj =
      integrate(Scheme::StormerVerlet, sys, t0, h, 10, x0);
  PhasePoint cur = x0;
  for (int i = 0; i < 10; ++i)
    cur = step(Scheme::StormerVerlet, sys, t0 + i * h, h, cur);
  CHECK(inf_dist(traj.back(), cur) == 0.0);
}

TEST_CASE("trotter composition refines toward the exact flow at first order") {
  const HamiltonianSystem sys = pendulum();
  const PhasePoint x(1.0, 0.3);
  const double h = 0.5;
  const PhasePoint want = sys.exact_flow->eval(0.0, h, x);

  CHECK(inf_dist(trotter_composition(sys, 0.0, h, 1, x),
                 step(Scheme::SymplecticEulerVK, sys, 0.0, h, x)) == 0.0);

  std::vector<double> ms{4, 16, 64, 256}, errs;
  for (double m : ms)
    errs.push_back(inf_dist(trotter_composition(sys, 0.0, h, static_cast<int>(m), x), want));
  const double slope = order_slope(ms, errs);
  CHECK(slope >= -1.3);
  CHECK(slope <= -0.8);

  CHECK_THROWS_AS(trotter_composition(linear_nonseparable(), 0.0, 0.1, 4, x),
                  std::invalid_argument);
  CHECK_THROWS_AS(trotter_composition(sys, 0.0, 0.1, 0, x), std::invalid_argument);
}
