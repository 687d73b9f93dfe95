#include "sympflow/integrators.hpp"

#include <cmath>
#include <stdexcept>

namespace sympflow {

namespace {

// Yoshida's 6th-order solution A, 7 Stormer-Verlet stages with coefficients
// gamma_i = w[min(i, 6-i)]; see Hairer, Lubich, Wanner, "Geometric Numerical
// Integration", ch. V.3 (also Yoshida 1990).
constexpr double kYoshida6[4] = {0.78451361047755726382, 0.23557321335935813368,
                                 -1.17767998417887100695, 1.31518632068391121889};

void require_separable(const HamiltonianSystem& sys, const char* who) {
  if (!sys.separable || !sys.grad_K || !sys.grad_V)
    throw std::invalid_argument(std::string(who) + ": system '" + sys.id +
                                "' is not separable");
}

PhasePoint sym_euler_step(const HamiltonianSystem& sys, double t, double h,
                          const PhasePoint& x) {
  PhasePoint out = x;
  std::vector<double> gv = sys.grad_V(x.q, t);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= h * gv[i];
  std::vector<double> gk = sys.grad_K(out.p, t);
  for (int i = 0; i < sys.d; ++i) out.q[i] += h * gk[i];
  return out;
}

// The closing half-kick runs at clock t + h: in the extended phase space
// (q, t; p, e) time advances with the drift, and keeping that structure is
// what preserves the order of Verlet and of compositions built from it on
// time-dependent potentials.
PhasePoint verlet_step(const HamiltonianSystem& sys, double t, double h,
                       const PhasePoint& x) {
  PhasePoint out = x;
  std::vector<double> gv = sys.grad_V(x.q, t);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= 0.5 * h * gv[i];
  std::vector<double> gk = sys.grad_K(out.p, t);
  for (int i = 0; i < sys.d; ++i) out.q[i] += h * gk[i];
  gv = sys.grad_V(out.q, t + h);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= 0.5 * h * gv[i];
  return out;
}

PhasePoint composition6_step(const HamiltonianSystem& sys, double t, double h,
                             const PhasePoint& x) {
  PhasePoint out = x;
  double done = 0.0;  // fraction of the step already taken, for stage clocks
  for (int i = 0; i < 7; ++i) {
    double gamma = kYoshida6[i < 3 ? i : 6 - i];
    out = verlet_step(sys, t + done * h, gamma * h, out);
    done += gamma;
  }
  return out;
}

PhasePoint rk4_step(const HamiltonianSystem& sys, double t, double h, const PhasePoint& x) {
  auto axpy_point = [&](const PhasePoint& base, double s, const PhasePoint& dir) {
    PhasePoint r = base;
    for (int i = 0; i < sys.d; ++i) {
      r.p[i] += s * dir.p[i];
      r.q[i] += s * dir.q[i];
    }
    return r;
  };
  PhasePoint k1 = sys.vector_field(x, t);
  PhasePoint k2 = sys.vector_field(axpy_point(x, 0.5 * h, k1), t + 0.5 * h);
  PhasePoint k3 = sys.vector_field(axpy_point(x, 0.5 * h, k2), t + 0.5 * h);
  PhasePoint k4 = sys.vector_field(axpy_point(x, h, k3), t + h);
  PhasePoint out = x;
  for (int i = 0; i < sys.d; ++i) {
    out.p[i] += h / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
    out.q[i] += h / 6.0 * (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i]);
  }
  return out;
}

// Jacobians: each kick/drift is a shear whose off-diagonal block is the
// h-scaled Hessian of the corresponding potential at the point it was
// evaluated, so the exact Jacobian is the product of those shears.
void require_hessians(const HamiltonianSystem& sys) {
  if (!sys.hess_K || !sys.hess_V)
    throw std::invalid_argument("step_jacobian: system '" + sys.id +
                                "' does not provide split Hessians");
}

void mul_kick(Mat& jac, const Mat& hv, double h, int d) {
  // p-rows -= h * HV * q-rows
  for (int i = 0; i < d; ++i)
    for (std::size_t c = 0; c < jac.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += hv(i, j) * jac(d + j, c);
      jac(i, c) -= h * acc;
    }
}

void mul_drift(Mat& jac, const Mat& hk, double h, int d) {
  // q-rows += h * HK * p-rows
  for (int i = 0; i < d; ++i)
    for (std::size_t c = 0; c < jac.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += hk(i, j) * jac(j, c);
      jac(d + i, c) += h * acc;
    }
}

PhasePoint sym_euler_step_jac(const HamiltonianSystem& sys, double t, double h,
                              const PhasePoint& x, Mat& jac) {
  PhasePoint out = x;
  std::vector<double> gv = sys.grad_V(x.q, t);
  mul_kick(jac, sys.hess_V(x.q, t), h, sys.d);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= h * gv[i];
  std::vector<double> gk = sys.grad_K(out.p, t);
  mul_drift(jac, sys.hess_K(out.p, t), h, sys.d);
  for (int i = 0; i < sys.d; ++i) out.q[i] += h * gk[i];
  return out;
}

PhasePoint verlet_step_jac(const HamiltonianSystem& sys, double t, double h,
                           const PhasePoint& x, Mat& jac) {
  PhasePoint out = x;
  std::vector<double> gv = sys.grad_V(x.q, t);
  mul_kick(jac, sys.hess_V(x.q, t), 0.5 * h, sys.d);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= 0.5 * h * gv[i];
  std::vector<double> gk = sys.grad_K(out.p, t);
  mul_drift(jac, sys.hess_K(out.p, t), h, sys.d);
  for (int i = 0; i < sys.d; ++i) out.q[i] += h * gk[i];
  gv = sys.grad_V(out.q, t + h);
  mul_kick(jac, sys.hess_V(out.q, t + h), 0.5 * h, sys.d);
  for (int i = 0; i < sys.d; ++i) out.p[i] -= 0.5 * h * gv[i];
  return out;
}

}  // namespace

SchemeInfo scheme_info(Scheme s) {
  switch (s) {
    case Scheme::SymplecticEulerVK:
      return {s, "symplectic_euler", 1, true};
    case Scheme::StormerVerlet:
      return {s, "stormer_verlet", 2, true};
    case Scheme::Composition6:
      return {s, "composition6", 6, true};
    case Scheme::RK4Oracle:
      return {s, "rk4_oracle", 4, false};
  }
  throw std::logic_error("scheme_info: bad enum");
}

PhasePoint step(Scheme s, const HamiltonianSystem& sys, double t, double h,
                const PhasePoint& x) {
  if (static_cast<int>(x.dim()) != sys.d)
    throw std::invalid_argument("step: point dimension does not match system");
  switch (s) {
    case Scheme::SymplecticEulerVK:
      require_separable(sys, "symplectic_euler");
      return sym_euler_step(sys, t, h, x);
    case Scheme::StormerVerlet:
      require_separable(sys, "stormer_verlet");
      return verlet_step(sys, t, h, x);
    case Scheme::Composition6:
      require_separable(sys, "composition6");
      return composition6_step(sys, t, h, x);
    case Scheme::RK4Oracle:
      if (!sys.vector_field)
        throw std::invalid_argument("rk4: system '" + sys.id + "' has no vector field");
      return rk4_step(sys, t, h, x);
  }
  throw std::logic_error("step: bad enum");
}

Mat step_jacobian(Scheme s, const HamiltonianSystem& sys, double t, double h,
                  const PhasePoint& x) {
  if (static_cast<int>(x.dim()) != sys.d)
    throw std::invalid_argument("step_jacobian: point dimension does not match system");
  Mat jac = Mat::identity(2 * sys.d);
  switch (s) {
    case Scheme::SymplecticEulerVK:
      require_separable(sys, "symplectic_euler");
      require_hessians(sys);
      sym_euler_step_jac(sys, t, h, x, jac);
      return jac;
    case Scheme::StormerVerlet:
      require_separable(sys, "stormer_verlet");
      require_hessians(sys);
      verlet_step_jac(sys, t, h, x, jac);
      return jac;
    case Scheme::Composition6: {
      require_separable(sys, "composition6");
      require_hessians(sys);
      PhasePoint cur = x;
      double done = 0.0;
      for (int i = 0; i < 7; ++i) {
        double gamma = kYoshida6[i < 3 ? i : 6 - i];
        cur = verlet_step_jac(sys, t + done * h, gamma * h, cur, jac);
        done += gamma;
      }
      return jac;
    }
    case Scheme::RK4Oracle:
      throw std::invalid_argument("step_jacobian: not provided for the RK4 oracle");
  }
  throw std::logic_error("step_jacobian: bad enum");
}

std::vector<PhasePoint> integrate(Scheme s, const HamiltonianSystem& sys, double t0,
                                  double h, int n, const PhasePoint& x0) {
  if (n < 0) throw std::invalid_argument("integrate: n must be >= 0");
  std::vector<PhasePoint> traj;
  traj.reserve(static_cast<std::size_t>(n) + 1);
  traj.push_back(x0);
  for (int i = 0; i < n; ++i) traj.push_back(step(s, sys, t0 + i * h, h, traj.back()));
  return traj;
}

PhasePoint trotter_composition(const HamiltonianSystem& sys, double t, double h, int m,
                               const PhasePoint& x) {
  require_separable(sys, "trotter_composition");
  if (m < 1) throw std::invalid_argument("trotter_composition: m must be >= 1");
  double hm = h / m;
  PhasePoint cur = x;
  for (int i = 0; i < m; ++i) cur = sym_euler_step(sys, t + i * hm, hm, cur);
  return cur;
}

}  // namespace sympflow
