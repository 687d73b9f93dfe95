#pragma once

#include <vector>

#include "sympflow/dataset.hpp"
#include "sympflow/sympnet.hpp"

namespace sympflow {

struct LossGrads {
  double loss = 0.0;
  std::vector<double> grads;  // same layout/length as SympNetModel::params
};

// Mean squared error of the model one-step map over the batch, together with
// its exact reverse-mode gradient:
//
//   L = (1/N) sum_i |psi(h_i, t_i, x_i) - y_i|^2   (Euclidean norm on (p,q))
//
// Gradients are bitwise deterministic for a fixed batch order: accumulation is
// sequential and the vectorized path reduces lanes in a fixed order.  Batches
// must be nonempty, match the model dimension, and carry a clock value t for
// time-dependent model kinds.
LossGrads loss_and_gradients(const SympNetModel& model,
                             const std::vector<TrainingSample>& batch);

}  // namespace sympflow
