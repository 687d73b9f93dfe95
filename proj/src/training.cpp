#include "sympflow/training.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "sympflow/autodiff.hpp"
#include "sympflow/integrators.hpp"
#include "sympflow/rng.hpp"

namespace sympflow {

namespace {

void validate_spec(const DatasetSpec& spec, const HamiltonianSystem& sys) {
  if (spec.n < 0) throw std::invalid_argument("sample_dataset: negative sample count");
  if (spec.x_box.size() != static_cast<std::size_t>(2 * sys.d))
    throw std::invalid_argument("sample_dataset: x_box must have 2*d ranges");
  for (const auto& r : spec.x_box)
    if (!(r.first <= r.second))
      throw std::invalid_argument("sample_dataset: empty coordinate range");
  if (!(spec.h_range.first <= spec.h_range.second))
    throw std::invalid_argument("sample_dataset: empty h range");
  if (spec.t_range.has_value() != sys.time_dependent)
    throw std::invalid_argument(
        "sample_dataset: t_range must be given exactly for time-dependent systems");
  if (spec.t_range && !(spec.t_range->first <= spec.t_range->second))
    throw std::invalid_argument("sample_dataset: empty t range");
  switch (spec.labels) {
    case LabelOracle::ExactFlow:
      if (!sys.exact_flow)
        throw std::invalid_argument("sample_dataset: system has no exact flow");
      break;
    case LabelOracle::Composition6Substeps:
      if (!sys.separable)
        throw std::invalid_argument(
            "sample_dataset: composition labels need a separable system");
      if (spec.substeps < 1)
        throw std::invalid_argument("sample_dataset: substeps must be >= 1");
      break;
  }
}

}  // namespace

std::vector<TrainingSample> sample_dataset(const DatasetSpec& spec) {
  return sample_dataset(spec, make_system(spec.system_id));
}

std::vector<TrainingSample> sample_dataset(const DatasetSpec& spec,
                                           const HamiltonianSystem& sys) {
  validate_spec(spec, sys);
  const int d = sys.d;
  Rng rng(spec.seed);
  std::vector<TrainingSample> out;
  out.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    TrainingSample s;
    s.x.p.resize(d);
    s.x.q.resize(d);
    for (int j = 0; j < d; ++j)
      s.x.p[j] = rng.uniform(spec.x_box[j].first, spec.x_box[j].second);
    for (int j = 0; j < d; ++j)
      s.x.q[j] = rng.uniform(spec.x_box[d + j].first, spec.x_box[d + j].second);
    if (spec.t_range) s.t = rng.uniform(spec.t_range->first, spec.t_range->second);
    s.h = rng.uniform(spec.h_range.first, spec.h_range.second);
    const double t0 = s.t ? *s.t : 0.0;
    if (spec.labels == LabelOracle::ExactFlow) {
      s.y = sys.exact_flow->eval(t0, s.h, s.x);
    } else {
      const double hs = s.h / static_cast<double>(spec.substeps);
      s.y = integrate(Scheme::Composition6, sys, t0, hs, spec.substeps, s.x).back();
    }
    out.push_back(std::move(s));
  }
  return out;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double learning_rate, const AdamParams& ap) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw std::invalid_argument("adam_step: size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(ap.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(ap.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < n; ++k) {
    state.m[k] = ap.beta1 * state.m[k] + (1.0 - ap.beta1) * grads[k];
    state.v[k] = ap.beta2 * state.v[k] + (1.0 - ap.beta2) * grads[k] * grads[k];
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    params[k] -= learning_rate * mhat / (std::sqrt(vhat) + ap.eps);
  }
}

TrainResult train(SympNetModel model, const std::vector<TrainingSample>& data,
                  const TrainConfig& cfg, const TrainCallbacks& cb) {
  if (cfg.epochs < 0) throw std::invalid_argument("train: negative epoch count");
  if (!cfg.full_batch)
    throw std::invalid_argument("train: only full-batch training is implemented");

  AdamState state(model.params.size());
  TrainResult res;
  res.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int e = 0; e < cfg.epochs; ++e) {
    const LossGrads lg = loss_and_gradients(model, data);
    if (!std::isfinite(lg.loss)) {
      std::size_t worst = 0;
      for (std::size_t k = 1; k < model.params.size(); ++k)
        if (std::abs(model.params[k]) > std::abs(model.params[worst])) worst = k;
      std::ostringstream msg;
      msg << "training diverged at epoch " << e
          << ": loss is not finite; largest parameter magnitude "
          << std::abs(model.params.empty() ? 0.0 : model.params[worst])
          << " at flat index " << worst;
      throw TrainingDivergedError(e, msg.str());
    }
    res.loss_history.push_back(lg.loss);
    adam_step(model.params, lg.grads, state, cfg.learning_rate, cfg.adam);
    if (cfg.checkpoint_cadence > 0 && cb.on_checkpoint &&
        (e + 1) % cfg.checkpoint_cadence == 0)
      cb.on_checkpoint(e + 1, model);
  }
  res.model = std::move(model);
  return res;
}

std::vector<PhasePoint> rollout(const SympNetModel& model, const PhasePoint& x0,
                                double h, int k, std::optional<double> t0) {
  if (k < 0) throw std::invalid_argument("rollout: negative step count");
  if (kind_time_aware(model.kind) && !t0)
    throw std::invalid_argument("rollout: time-dependent model needs t0");
  std::vector<PhasePoint> traj;
  traj.reserve(static_cast<std::size_t>(k) + 1);
  traj.push_back(x0);
  for (int i = 0; i < k; ++i) {
    std::optional<double> t;
    if (t0) t = *t0 + static_cast<double>(i) * h;
    traj.push_back(forward(model, h, t, traj.back()));
  }
  return traj;
}

}  // namespace sympflow
