#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sympflow/linalg.hpp"
#include "sympflow/phase.hpp"

namespace sympflow {

// Reference solution operator x(t0) -> x(t0 + h).
struct ExactFlow {
  enum class Accuracy { ClosedForm, ReferenceNumeric };
  Accuracy accuracy = Accuracy::ClosedForm;
  std::function<PhasePoint(double t0, double h, const PhasePoint& x)> eval;
};

// A Hamiltonian system, optionally separable as H(p,q,t) = K(p,t) + V(q,t).
// grad_K/grad_V (and the Hessians, used for exact step Jacobians) are present
// only for separable systems; vector_field is always present. t is ignored by
// autonomous systems.
struct HamiltonianSystem {
  std::string id;
  int d = 1;
  bool separable = false;
  bool time_dependent = false;
  std::function<double(const PhasePoint& x, double t)> hamiltonian;
  std::function<std::vector<double>(const std::vector<double>& p, double t)> grad_K;
  std::function<std::vector<double>(const std::vector<double>& q, double t)> grad_V;
  std::function<Mat(const std::vector<double>& p, double t)> hess_K;
  std::function<Mat(const std::vector<double>& q, double t)> hess_V;
  std::function<PhasePoint(const PhasePoint& x, double t)> vector_field;
  std::optional<ExactFlow> exact_flow;
};

// H = p^2/2 - cos q. Separable; reference flow is numeric (composed
// high-order steps), accurate to ~1e-12 per unit time.
HamiltonianSystem pendulum();

// H = p^2/2 + 0.4 pq + q^2/2. Not separable; closed-form flow via the 2x2
// matrix exponential.
HamiltonianSystem linear_nonseparable();

// H = p^2/2 + omega0^2 q^2 / 2 - f0 sin(omega t) q. Separable and
// time-dependent; closed-form flow from any t0. Throws for resonant forcing
// (omega == omega0) and non-positive frequencies.
HamiltonianSystem forced_harmonic_oscillator(double omega0 = 1.0, double omega = 2.0,
                                             double f0 = 1.0);

// Lookup by id: "pendulum", "linear", "forced_ho" (default constants).
HamiltonianSystem make_system(const std::string& id);

}  // namespace sympflow
