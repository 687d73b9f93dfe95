#include "autodiff_paths.hpp"

#if defined(__x86_64__)

#include <cassert>
#include <cstddef>
#include <vector>

#include "ad_core.hpp"
#include "dvec4.hpp"

namespace sympflow::detail {

// Batch axis vectorization: one sample per lane, parameters broadcast.
template <>
struct AdOps<kernels::dvec4> {
  using V = kernels::dvec4;
  static V from(double v) { return V(v); }
  static V zero() { return V(); }
  static V fmadd(V a, V b, V c) { return kernels::fmadd(a, b, c); }
  static V act_f(const Activation*, V x) { return kernels::tanh4(x); }
  // tanh only: 1 - y^2
  static V act_df(const Activation*, V y) { return kernels::fnmadd(y, y, V(1.0)); }
};

LossGrads loss_and_gradients_avx2(const SympNetModel& model,
                                  const std::vector<TrainingSample>& batch) {
  using V = kernels::dvec4;
  assert(model.d == 1 && model.act != nullptr && model.act->name == "tanh");
  assert(batch.size() >= 4);

  const std::size_t n = batch.size();
  const std::size_t np = model.params.size();
  const TracePlan plan = make_trace_plan(model);
  const bool timed = kind_time_aware(model.kind);

  std::vector<V> trace(static_cast<std::size_t>(plan.total));
  std::vector<V> grads4(np);
  V loss4;
  V state[2];
  V xbar[2];

  std::size_t g = 0;
  for (; g + 4 <= n; g += 4) {
    const TrainingSample* s = &batch[g];
    state[0] = V::from4(s[0].x.p[0], s[1].x.p[0], s[2].x.p[0], s[3].x.p[0]);
    state[1] = V::from4(s[0].x.q[0], s[1].x.q[0], s[2].x.q[0], s[3].x.q[0]);
    const V h4 = V::from4(s[0].h, s[1].h, s[2].h, s[3].h);
    const V t4 = timed ? V::from4(*s[0].t, *s[1].t, *s[2].t, *s[3].t) : V();

    model_forward_core<V, true>(model, h4, t4, state, &plan, trace.data());

    const V rp = state[0] - V::from4(s[0].y.p[0], s[1].y.p[0], s[2].y.p[0], s[3].y.p[0]);
    const V rq = state[1] - V::from4(s[0].y.q[0], s[1].y.q[0], s[2].y.q[0], s[3].y.q[0]);
    loss4 = kernels::fmadd(rp, rp, loss4);
    loss4 = kernels::fmadd(rq, rq, loss4);
    xbar[0] = rp + rp;
    xbar[1] = rq + rq;

    model_backward_core<V>(model, h4, t4, plan, trace.data(), xbar, grads4.data());
  }

  LossGrads out;
  out.grads.assign(np, 0.0);
  for (std::size_t k = 0; k < np; ++k) out.grads[k] = grads4[k].hsum_ordered();
  out.loss = loss4.hsum_ordered();

  // remaining samples through the scalar core, accumulated after the lanes
  std::vector<double> strace(static_cast<std::size_t>(plan.total), 0.0);
  double sstate[2];
  double sxb[2];
  for (; g < n; ++g) {
    const TrainingSample& s = batch[g];
    sstate[0] = s.x.p[0];
    sstate[1] = s.x.q[0];
    const double t0 = s.t ? *s.t : 0.0;
    model_forward_core<double, true>(model, s.h, t0, sstate, &plan, strace.data());
    const double rp = sstate[0] - s.y.p[0];
    const double rq = sstate[1] - s.y.q[0];
    out.loss += rp * rp;
    out.loss += rq * rq;
    sxb[0] = 2.0 * rp;
    sxb[1] = 2.0 * rq;
    model_backward_core<double>(model, s.h, t0, plan, strace.data(), sxb,
                                out.grads.data());
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  for (double& gv : out.grads) gv *= inv_n;
  return out;
}

}  // namespace sympflow::detail

#endif  // __x86_64__
