#pragma once

#include <string>
#include <vector>

#include "sympflow/hamiltonians.hpp"

namespace sympflow {

// Step schemes. The symplectic ones require a separable system; RK4 works on
// any vector field but is first and foremost a cross-check oracle.
enum class Scheme { SymplecticEulerVK, StormerVerlet, Composition6, RK4Oracle };

struct SchemeInfo {
  Scheme scheme;
  std::string name;
  int order;
  bool symplectic;
};

SchemeInfo scheme_info(Scheme s);

// One step of size h starting at clock t. Symplectic Euler kicks with V
// frozen at t, then drifts with K; Verlet's half-kicks run at the endpoint
// clocks t and t+h, matching the extended-phase-space form on time-dependent
// potentials.
PhasePoint step(Scheme s, const HamiltonianSystem& sys, double t, double h,
                const PhasePoint& x);

// Exact Jacobian of one step w.r.t. x. Supported for the symplectic schemes
// (needs hess_K/hess_V); throws for RK4Oracle.
Mat step_jacobian(Scheme s, const HamiltonianSystem& sys, double t, double h,
                  const PhasePoint& x);

// Trajectory [x0, x1, ..., xn]; step i runs at clock t0 + i*h.
std::vector<PhasePoint> integrate(Scheme s, const HamiltonianSystem& sys, double t0,
                                  double h, int n, const PhasePoint& x0);

// m symplectic-Euler substeps of h/m; substep i (0-based) runs at clock
// t + i*h/m. Throws for non-separable systems.
PhasePoint trotter_composition(const HamiltonianSystem& sys, double t, double h, int m,
                               const PhasePoint& x);

}  // namespace sympflow
