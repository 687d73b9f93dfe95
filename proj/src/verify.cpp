#include "sympflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "sympflow/integrators.hpp"
#include "sympflow/linalg.hpp"
#include "sympflow/rng.hpp"

namespace sympflow {

namespace {

// pass holds iff every toleranced entry exists and is within its bound.
bool all_within(const std::map<std::string, double>& measured,
                const std::map<std::string, double>& tolerances) {
  for (const auto& [key, tol] : tolerances) {
    auto it = measured.find(key);
    if (it == measured.end()) return false;
    if (!(std::fabs(it->second) <= tol)) return false;
  }
  return true;
}

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

double c1_norm_grid(const std::function<double(double)>& f,
                    const std::function<double(double)>& fprime, double a, double b,
                    int grid_n) {
  if (!f || !fprime) throw std::invalid_argument("c1_norm_grid: null function");
  if (!(a < b)) throw std::invalid_argument("c1_norm_grid: need a < b");
  if (grid_n < 2) throw std::invalid_argument("c1_norm_grid: need grid_n >= 2");
  double max_f = 0.0;
  double max_df = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    // endpoints land exactly on a and b
    const double x = a + (b - a) * (static_cast<double>(i) / (grid_n - 1));
    max_f = std::max(max_f, std::fabs(f(x)));
    max_df = std::max(max_df, std::fabs(fprime(x)));
  }
  return max_f + max_df;
}

VerificationReport counterexample_check(int grid_n) {
  // Two maps on [0,1] built from the same pieces: the true pair
  // (F0, F) versus the approximating pair (G0, G1) with G0 = G1 = F.
  // Per-stage C^1 errors are small (one stage exact, one off by a constant),
  // yet the composed C^1 error exceeds the natural product-sum bound.
  const auto F = [](double y) { return y * y; };
  const auto dF = [](double y) { return 2.0 * y; };
  const auto ddF = [](double) { return 2.0; };
  const auto F0 = [](double x) { return x * x - 1.0; };
  const auto dF0 = [](double x) { return 2.0 * x; };
  const auto& G0 = F;
  const auto& G1 = F;

  // (F . F0 - G1 . G0)(x) = 1 - 2x^2; derivative by the chain rule, -4x.
  const auto comp_diff = [&](double x) { return F(F0(x)) - G1(G0(x)); };
  const auto comp_diff_prime = [&](double x) {
    return dF(F0(x)) * dF0(x) - dF(G0(x)) * dF(x);
  };

  const double lhs = c1_norm_grid(comp_diff, comp_diff_prime, 0.0, 1.0, grid_n);

  // |F'|_{C1} runs over [-1,1], the range of F0 on [0,1].
  const double outer = c1_norm_grid(dF, ddF, -1.0, 1.0, grid_n);
  const auto stage0_diff = [&](double x) { return F0(x) - G0(x); };
  const auto stage0_diff_prime = [&](double x) { return dF0(x) - dF(x); };
  const double stage0 = c1_norm_grid(stage0_diff, stage0_diff_prime, 0.0, 1.0, grid_n);
  const auto stage1_diff = [&](double y) { return F(y) - G1(y); };
  const auto stage1_diff_prime = [&](double y) { return dF(y) - dF(y); };
  const double stage1 = c1_norm_grid(stage1_diff, stage1_diff_prime, -1.0, 1.0, grid_n);
  const double rhs = outer * stage0 + stage1;

  VerificationReport r;
  r.id = "composition_c1_counterexample";
  r.measured["lhs"] = lhs;
  r.measured["rhs"] = rhs;
  r.measured["margin"] = lhs - rhs;
  r.measured["lhs_deviation"] = std::fabs(lhs - 5.0);
  r.measured["rhs_deviation"] = std::fabs(rhs - 4.0);
  r.tolerances["lhs_deviation"] = 1e-9;
  r.tolerances["rhs_deviation"] = 1e-9;
  r.pass = all_within(r.measured, r.tolerances);
  return r;
}

RateStudy composition_rate_study(const HamiltonianSystem& sys, const GridSpec& grid,
                                 double h, const std::vector<int>& m_list) {
  if (!sys.separable)
    throw std::invalid_argument("composition_rate_study: system has no separable split");
  if (!sys.exact_flow)
    throw std::invalid_argument("composition_rate_study: exact flow unavailable");
  if (m_list.size() < 4)
    throw std::invalid_argument("composition_rate_study: need at least 4 substep counts");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1 || (i > 0 && m_list[i] <= m_list[i - 1]))
      throw std::invalid_argument(
          "composition_rate_study: substep counts must be positive and increasing");
  }
  if (grid.box.size() != static_cast<std::size_t>(2 * sys.d))
    throw std::invalid_argument("composition_rate_study: grid box must have 2d ranges");
  if (grid.n_per_axis < 2)
    throw std::invalid_argument("composition_rate_study: need n_per_axis >= 2");

  // Inclusive grid over the box, odometer over axes.
  std::vector<PhasePoint> points;
  const int n_axes = 2 * sys.d;
  std::vector<int> idx(static_cast<std::size_t>(n_axes), 0);
  std::vector<double> flat(static_cast<std::size_t>(n_axes), 0.0);
  for (;;) {
    for (int a = 0; a < n_axes; ++a) {
      const auto& [lo, hi] = grid.box[static_cast<std::size_t>(a)];
      flat[static_cast<std::size_t>(a)] =
          lo + (hi - lo) * (static_cast<double>(idx[static_cast<std::size_t>(a)]) /
                            (grid.n_per_axis - 1));
    }
    points.push_back(PhasePoint::from_flat(flat));
    int a = n_axes - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == grid.n_per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }

  std::vector<PhasePoint> exact;
  exact.reserve(points.size());
  for (const auto& x : points) exact.push_back(sys.exact_flow->eval(0.0, h, x));

  RateStudy out;
  out.m_list = m_list;
  out.errors.reserve(m_list.size());
  std::vector<double> logm, loge;
  for (int m : m_list) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      worst = std::max(worst, inf_dist(trotter_composition(sys, 0.0, h, m, points[i]), exact[i]));
    out.errors.push_back(worst);
    logm.push_back(std::log(static_cast<double>(m)));
    loge.push_back(std::log(worst));
  }
  out.slope = least_squares_slope(logm, loge);
  return out;
}

VerificationReport separability_diagnostic(const SympNetModel& model,
                                           std::optional<double> t, int n_probe,
                                           std::uint64_t seed) {
  if (n_probe < 2)
    throw std::invalid_argument("separability_diagnostic: need at least 2 probes");
  if (kind_time_aware(model.kind) && !t)
    throw std::invalid_argument("separability_diagnostic: time-aware model needs t");
  const int d = model.d;
  Rng rng(seed);
  std::vector<double> p0(static_cast<std::size_t>(d)), q0(static_cast<std::size_t>(d));
  for (double& v : p0) v = rng.uniform(-1.0, 1.0);
  for (double& v : q0) v = rng.uniform(-1.0, 1.0);

  // dh_at_zero is the model's generator direction at this point; for a
  // separable generator its p-block is a function of q alone and vice versa.
  const auto block_variation = [&](bool vary_p) {
    std::vector<double> lo, hi;
    for (int probe = 0; probe < n_probe; ++probe) {
      PhasePoint x;
      x.p = p0;
      x.q = q0;
      auto& varied = vary_p ? x.p : x.q;
      for (double& v : varied) v = rng.uniform(-1.0, 1.0);
      const std::vector<double> dh = dh_at_zero(model, t, x);
      const std::size_t off = vary_p ? 0 : static_cast<std::size_t>(d);
      if (probe == 0) {
        lo.assign(dh.begin() + static_cast<std::ptrdiff_t>(off),
                  dh.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(d)));
        hi = lo;
      } else {
        for (int k = 0; k < d; ++k) {
          lo[static_cast<std::size_t>(k)] =
              std::min(lo[static_cast<std::size_t>(k)], dh[off + static_cast<std::size_t>(k)]);
          hi[static_cast<std::size_t>(k)] =
              std::max(hi[static_cast<std::size_t>(k)], dh[off + static_cast<std::size_t>(k)]);
        }
      }
    }
    double worst = 0.0;
    for (int k = 0; k < d; ++k)
      worst = std::max(worst, hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]);
    return worst;
  };

  VerificationReport r;
  r.id = std::string("separability_diagnostic(") + kind_name(model.kind) + ")";
  r.measured["p_block_variation_across_p"] = block_variation(true);
  r.measured["q_block_variation_across_q"] = block_variation(false);
  const bool asserted =
      model.kind == Kind::TG || model.kind == Kind::OTLA || model.kind == Kind::NATG;
  if (asserted) {
    r.tolerances["p_block_variation_across_p"] = 1e-9;
    r.tolerances["q_block_variation_across_q"] = 1e-9;
  }
  r.pass = all_within(r.measured, r.tolerances);
  return r;
}

VerificationReport symplectic_suite(const std::vector<SympNetModel>& models,
                                    int n_samples, double tol, std::uint64_t seed) {
  if (models.empty()) throw std::invalid_argument("symplectic_suite: no models");
  if (n_samples < 1) throw std::invalid_argument("symplectic_suite: need n_samples >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("symplectic_suite: need tol > 0");

  Rng root(seed);
  double max_residual = 0.0;
  double max_identity = 0.0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const SympNetModel& m = models[mi];
    Rng rng = root.fork(mi);
    for (int s = 0; s < n_samples; ++s) {
      const double h = rng.uniform(-0.5, 0.5);
      const double tv = rng.uniform(0.0, 10.0);
      PhasePoint x;
      x.p.resize(static_cast<std::size_t>(m.d));
      x.q.resize(static_cast<std::size_t>(m.d));
      for (double& v : x.p) v = rng.uniform(-2.0, 2.0);
      for (double& v : x.q) v = rng.uniform(-2.0, 2.0);
      const Mat jac = forward_jacobian(m, h, tv, x);
      max_residual = std::max(max_residual, symplectic_residual(jac));
      max_identity = std::max(max_identity, inf_dist(forward(m, 0.0, tv, x), x));
    }
  }

  VerificationReport r;
  r.id = "symplectic_suite";
  r.measured["max_symplectic_residual"] = max_residual;
  r.measured["max_identity_deviation"] = max_identity;
  r.tolerances["max_symplectic_residual"] = tol;
  r.tolerances["max_identity_deviation"] = 1e-13;
  r.pass = all_within(r.measured, r.tolerances);
  return r;
}

}  // namespace sympflow
