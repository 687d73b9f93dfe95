#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sympflow/dataset.hpp"
#include "sympflow/hamiltonians.hpp"
#include "sympflow/sympnet.hpp"

namespace sympflow {

// ---- dataset sampling ----

enum class LabelOracle {
  ExactFlow,              // system's closed-form or reference flow
  Composition6Substeps,   // `substeps` sixth-order steps of h/substeps
};

struct DatasetSpec {
  std::string system_id;  // "pendulum", "linear", "forced_ho"
  int n = 0;
  // per-coordinate sampling ranges, flat (p, q) order, length 2d
  std::vector<std::pair<double, double>> x_box;
  std::pair<double, double> h_range{0.0, 0.0};
  // required for time-dependent systems, rejected otherwise
  std::optional<std::pair<double, double>> t_range;
  LabelOracle labels = LabelOracle::ExactFlow;
  int substeps = 10;
  std::uint64_t seed = 0;
};

// Draw order per sample is fixed (p coords, q coords, t if present, h) so a
// spec and seed pin the dataset bitwise.
std::vector<TrainingSample> sample_dataset(const DatasetSpec& spec);
std::vector<TrainingSample> sample_dataset(const DatasetSpec& spec,
                                           const HamiltonianSystem& sys);

// ---- optimizer ----

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One update with bias-corrected moments; eps sits outside the square root:
//   p -= lr * mhat / (sqrt(vhat) + eps)
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double learning_rate, const AdamParams& ap = {});

// ---- training loop ----

struct TrainConfig {
  int epochs = 0;
  double learning_rate = 1e-3;
  AdamParams adam;
  std::uint64_t seed = 0;      // reserved for stochastic batching
  int checkpoint_cadence = 0;  // epochs between on_checkpoint calls; 0 = never
  bool full_batch = true;      // only full-batch is implemented
};

struct TrainCallbacks {
  // called with (completed_epochs, model) every checkpoint_cadence epochs
  std::function<void(int, const SympNetModel&)> on_checkpoint;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(int epoch_, const std::string& what_)
      : std::runtime_error(what_), epoch(epoch_) {}
  int epoch;
};

struct TrainResult {
  SympNetModel model;
  // loss before each update; length == epochs
  std::vector<double> loss_history;
};

// Full-batch Adam on the MSE one-step objective.  Deterministic for a fixed
// model, batch and config.  Throws TrainingDivergedError when the loss stops
// being finite.
TrainResult train(SympNetModel model, const std::vector<TrainingSample>& data,
                  const TrainConfig& cfg, const TrainCallbacks& cb = {});

// ---- rollout ----

// Iterate the learned map k times from x0: result[0] = x0, result[i+1] =
// psi(h, t0 + i*h, result[i]).  t0 is required for time-dependent kinds.
std::vector<PhasePoint> rollout(const SympNetModel& model, const PhasePoint& x0,
                                double h, int k, std::optional<double> t0 = {});

}  // namespace sympflow
