#include "sympflow/hamiltonians.hpp"

#include <cmath>
#include <stdexcept>

#include "sympflow/integrators.hpp"

namespace sympflow {

HamiltonianSystem pendulum() {
  HamiltonianSystem s;
  s.id = "pendulum";
  s.d = 1;
  s.separable = true;
  s.time_dependent = false;
  s.hamiltonian = [](const PhasePoint& x, double) {
    return 0.5 * x.p[0] * x.p[0] - std::cos(x.q[0]);
  };
  s.grad_K = [](const std::vector<double>& p, double) { return std::vector<double>{p[0]}; };
  s.grad_V = [](const std::vector<double>& q, double) {
    return std::vector<double>{std::sin(q[0])};
  };
  s.hess_K = [](const std::vector<double>&, double) {
    Mat m(1, 1);
    m(0, 0) = 1.0;
    return m;
  };
  s.hess_V = [](const std::vector<double>& q, double) {
    Mat m(1, 1);
    m(0, 0) = std::cos(q[0]);
    return m;
  };
  s.vector_field = [](const PhasePoint& x, double) {
    return PhasePoint(-std::sin(x.q[0]), x.p[0]);
  };
  // no elementary closed form; compose 6th-order steps of at most 0.01
  s.exact_flow = ExactFlow{
      ExactFlow::Accuracy::ReferenceNumeric, [](double t0, double h, const PhasePoint& x) {
        HamiltonianSystem self = pendulum();
        int n = std::max(1, static_cast<int>(std::ceil(std::fabs(h) / 0.01)));
        return integrate(Scheme::Composition6, self, t0, h / n, n, x).back();
      }};
  return s;
}

HamiltonianSystem linear_nonseparable() {
  HamiltonianSystem s;
  s.id = "linear";
  s.d = 1;
  s.separable = false;
  s.time_dependent = false;
  s.hamiltonian = [](const PhasePoint& x, double) {
    return 0.5 * x.p[0] * x.p[0] + 0.4 * x.p[0] * x.q[0] + 0.5 * x.q[0] * x.q[0];
  };
  s.vector_field = [](const PhasePoint& x, double) {
    return PhasePoint(-(0.4 * x.p[0] + x.q[0]), x.p[0] + 0.4 * x.q[0]);
  };
  // flow = exp(hM) for M = [-0.4 -1; 1 0.4]; M^2 = -0.84 I, so
  // exp(hM) = cos(wh) I + sin(wh)/w M with w = sqrt(0.84)
  s.exact_flow = ExactFlow{
      ExactFlow::Accuracy::ClosedForm, [](double, double h, const PhasePoint& x) {
        const double w = std::sqrt(0.84);
        double cw = std::cos(w * h);
        double sw = std::sin(w * h) / w;
        double p = cw * x.p[0] + sw * (-0.4 * x.p[0] - x.q[0]);
        double q = cw * x.q[0] + sw * (x.p[0] + 0.4 * x.q[0]);
        return PhasePoint(p, q);
      }};
  return s;
}

HamiltonianSystem forced_harmonic_oscillator(double omega0, double omega, double f0) {
  if (!(omega0 > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("forced_harmonic_oscillator: frequencies must be positive");
  if (std::fabs(omega0 - omega) < 1e-9 * (omega0 + omega))
    throw std::invalid_argument(
        "forced_harmonic_oscillator: resonant forcing (omega == omega0) has no bounded "
        "particular solution of the assumed form");
  HamiltonianSystem s;
  s.id = "forced_ho";
  s.d = 1;
  s.separable = true;
  s.time_dependent = true;
  s.hamiltonian = [omega0, omega, f0](const PhasePoint& x, double t) {
    return 0.5 * x.p[0] * x.p[0] + 0.5 * omega0 * omega0 * x.q[0] * x.q[0] -
           f0 * std::sin(omega * t) * x.q[0];
  };
  s.grad_K = [](const std::vector<double>& p, double) { return std::vector<double>{p[0]}; };
  s.grad_V = [omega0, omega, f0](const std::vector<double>& q, double t) {
    return std::vector<double>{omega0 * omega0 * q[0] - f0 * std::sin(omega * t)};
  };
  s.hess_K = [](const std::vector<double>&, double) {
    Mat m(1, 1);
    m(0, 0) = 1.0;
    return m;
  };
  s.hess_V = [omega0](const std::vector<double>&, double) {
    Mat m(1, 1);
    m(0, 0) = omega0 * omega0;
    return m;
  };
  s.vector_field = [omega0, omega, f0](const PhasePoint& x, double t) {
    return PhasePoint(-omega0 * omega0 * x.q[0] + f0 * std::sin(omega * t), x.p[0]);
  };
  // particular solution q_s = s sin(wt) with s = f0/(w0^2 - w^2); the
  // homogeneous remainder rotates at w0, matched at t0 and evaluated at t0+h
  s.exact_flow = ExactFlow{
      ExactFlow::Accuracy::ClosedForm,
      [omega0, omega, f0](double t0, double h, const PhasePoint& x) {
        const double sp = f0 / (omega0 * omega0 - omega * omega);
        double rq = x.q[0] - sp * std::sin(omega * t0);
        double rp = x.p[0] - sp * omega * std::cos(omega * t0);
        double c = std::cos(omega0 * t0), sn = std::sin(omega0 * t0);
        double A = rq * c - rp / omega0 * sn;
        double B = rq * sn + rp / omega0 * c;
        double t1 = t0 + h;
        double c1 = std::cos(omega0 * t1), s1 = std::sin(omega0 * t1);
        double q = A * c1 + B * s1 + sp * std::sin(omega * t1);
        double p = -A * omega0 * s1 + B * omega0 * c1 + sp * omega * std::cos(omega * t1);
        return PhasePoint(p, q);
      }};
  return s;
}

HamiltonianSystem make_system(const std::string& id) {
  if (id == "pendulum") return pendulum();
  if (id == "linear") return linear_nonseparable();
  if (id == "forced_ho") return forced_harmonic_oscillator();
  throw std::invalid_argument("unknown system id: " + id);
}

}  // namespace sympflow
