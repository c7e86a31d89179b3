#pragma once

#include <cstdint>
#include <vector>

#include "fvl/diff/matrix.hpp"
#include "fvl/nn/parameters.hpp"

namespace fvl::nn {

struct AdamOptions {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<diff::Matrix> first_moment;
  std::vector<diff::Matrix> second_moment;

  AdamState(const ParamSet& params, AdamOptions opts);
};

// Bias-corrected Adam update in place:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// Throws NumericError naming the first parameter holding a non-finite
// gradient; nothing is modified in that case.
void adam_step(AdamState& state, ParamSet& params, const std::vector<diff::Matrix>& grads);

}  // namespace fvl::nn
