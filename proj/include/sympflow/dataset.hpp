#pragma once

#include <optional>

#include "sympflow/phase.hpp"

namespace sympflow {

// One supervised pair: y approximates the flow of step h from x (taken at
// clock t when the system is time-dependent).
struct TrainingSample {
  PhasePoint x;
  std::optional<double> t;
  double h = 0.0;
  PhasePoint y;
};

}  // namespace sympflow
