#pragma once

#include <cstdint>
#include <vector>

#include "laborcast/matrix.hpp"

namespace laborcast {

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

struct SgdConfig {
  int epochs = 1000;
  double initial_step = 0.01;
  double decay = 0.25;      // step_t = initial_step / t^decay
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
};

// Least squares via a rank-revealing orthogonal decomposition of the
// centered design; rank-deficient systems get the minimum-norm weights.
LinearModel fit_ols(const Matrix& X, const std::vector<double>& y);

// Squared-loss SGD with per-sample updates and a deterministic per-epoch
// shuffle. Inputs are expected pre-scaled; throws NumericError on
// divergence (non-finite parameters).
LinearModel fit_sgd(const Matrix& X, const std::vector<double>& y, const SgdConfig& cfg);

std::vector<double> predict_linear(const LinearModel& m, const Matrix& X);

}  // namespace laborcast
