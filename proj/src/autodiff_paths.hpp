#pragma once

// Internal: the two loss/gradient implementations behind
// sympflow::loss_and_gradients, exposed so tests can compare them directly.

#include <cstddef>
#include <vector>

#include "sympflow/autodiff.hpp"

namespace sympflow::detail {

LossGrads loss_and_gradients_scalar(const SympNetModel& model,
                                    const std::vector<TrainingSample>& batch);

// Lane-of-4 AVX2 path.  Preconditions (checked by the dispatcher, asserted
// here): model.d == 1, tanh activation, batch size >= 4, x86-64 build.
LossGrads loss_and_gradients_avx2(const SympNetModel& model,
                                  const std::vector<TrainingSample>& batch);

// True when the batch may take the vectorized path under the active kernel
// implementation.
bool avx2_batch_eligible(const SympNetModel& model, std::size_t batch_size);

}  // namespace sympflow::detail
