#include "sympflow/autodiff.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ad_core.hpp"
#include "autodiff_paths.hpp"
#include "sympflow/kernels.hpp"

namespace sympflow {
namespace detail {

namespace {

void validate_batch(const SympNetModel& model,
                    const std::vector<TrainingSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  const bool needs_t = kind_time_aware(model.kind);
  for (const TrainingSample& s : batch) {
    if (s.x.dim() != model.d || s.y.dim() != model.d)
      throw std::invalid_argument("loss_and_gradients: sample dimension mismatch");
    if (needs_t && !s.t)
      throw std::invalid_argument(
          "loss_and_gradients: time-dependent model needs a clock value t");
  }
}

}  // namespace

LossGrads loss_and_gradients_scalar(const SympNetModel& model,
                                    const std::vector<TrainingSample>& batch) {
  const std::size_t d = model.d;
  const std::size_t n2 = 2 * d;
  const TracePlan plan = make_trace_plan(model);

  std::vector<double> trace(plan.total, 0.0);
  std::vector<double> state(n2, 0.0);
  std::vector<double> xbar(n2, 0.0);
  LossGrads out;
  out.grads.assign(model.params.size(), 0.0);

  for (const TrainingSample& s : batch) {
    for (std::size_t i = 0; i < d; ++i) {
      state[i] = s.x.p[i];
      state[d + i] = s.x.q[i];
    }
    const double t0 = s.t ? *s.t : 0.0;
    model_forward_core<double, true>(model, s.h, t0, state.data(), &plan,
                                     trace.data());
    for (std::size_t i = 0; i < n2; ++i) {
      const double y = i < d ? s.y.p[i] : s.y.q[i - d];
      const double r = state[i] - y;
      out.loss += r * r;
      xbar[i] = 2.0 * r;
    }
    model_backward_core<double>(model, s.h, t0, plan, trace.data(), xbar.data(),
                                out.grads.data());
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv_n;
  for (double& g : out.grads) g *= inv_n;
  return out;
}

bool avx2_batch_eligible(const SympNetModel& model, std::size_t batch_size) {
#if defined(__x86_64__)
  return model.d == 1 && model.act != nullptr && model.act->name == "tanh" &&
         batch_size >= 4 && kernels::active_impl() == kernels::Impl::Avx2;
#else
  (void)model;
  (void)batch_size;
  return false;
#endif
}

}  // namespace detail

LossGrads loss_and_gradients(const SympNetModel& model,
                             const std::vector<TrainingSample>& batch) {
  detail::validate_batch(model, batch);
#if defined(__x86_64__)
  if (detail::avx2_batch_eligible(model, batch.size()))
    return detail::loss_and_gradients_avx2(model, batch);
#endif
  return detail::loss_and_gradients_scalar(model, batch);
}

}  // namespace sympflow
