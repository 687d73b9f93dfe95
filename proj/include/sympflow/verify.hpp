#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sympflow/hamiltonians.hpp"
#include "sympflow/sympnet.hpp"

namespace sympflow {

struct VerificationReport {
  std::string id;
  bool pass = false;
  std::map<std::string, double> measured;
  // keyed like measured; a measured value without a tolerance entry is
  // informational only. pass holds iff every toleranced value is within.
  std::map<std::string, double> tolerances;
};

// C^1 norm on [a, b] over an inclusive uniform grid with grid_n >= 2 points:
// max |f| + max |f'|, both maxima over the grid. The derivative is supplied
// analytically.
double c1_norm_grid(const std::function<double(double)>& f,
                    const std::function<double(double)>& fprime, double a, double b,
                    int grid_n);

// Composition error in the C^1 norm can exceed the sum of per-stage errors
// scaled by the outer derivative norm: with F0(x) = x^2 - 1 and
// G0 = G1 = F(x) = x^2 on [0,1],
//   lhs = |F . F0 - G1 . G0|_{C1([0,1])} = 5
//   rhs = |F'|_{C1([-1,1])} |F0 - G0|_{C1([0,1])} + |F - G1|_{C1([-1,1])} = 4.
// All derivatives are hand-coded, so with endpoint grids both values are
// exact; the report asserts them within 1e-9 and exposes the margin.
VerificationReport counterexample_check(int grid_n = 1001);

// Inclusive uniform grid over a 2d-dimensional phase-space box.
struct GridSpec {
  std::vector<std::pair<double, double>> box;  // flat (p, q), length 2d
  int n_per_axis = 2;
};

struct RateStudy {
  std::vector<int> m_list;
  std::vector<double> errors;  // per m: max over the grid of the composition error
  double slope = 0.0;          // least-squares slope of log err vs log m
};

// Error of the m-fold first-order split against the exact flow at step h,
// maximized over the grid, for each m. Requires a separable system with an
// exact flow; m_list must be strictly increasing with at least 4 entries.
RateStudy composition_rate_study(const HamiltonianSystem& sys, const GridSpec& grid,
                                 double h, const std::vector<int>& m_list);

// Probes whether the h-derivative of the model at h = 0 splits: its p-block
// must not react to p, its q-block must not react to q. The bound 1e-9 is
// asserted for the gradient-style kinds (TG, OTLA, NATG) and only reported
// for TLA/NATLA, which are built to escape this restriction.
VerificationReport separability_diagnostic(const SympNetModel& model,
                                           std::optional<double> t, int n_probe = 8,
                                           std::uint64_t seed = 2026u);

// Batch check of structural invariants over random (h, t, x): symplecticity
// residual of forward_jacobian within tol and identity at h = 0 within 1e-13.
VerificationReport symplectic_suite(const std::vector<SympNetModel>& models,
                                    int n_samples, double tol = 1e-11,
                                    std::uint64_t seed = 4242u);

}  // namespace sympflow
