#pragma once

#include <cstdint>
#include <vector>

#include "fvl/data/sample.hpp"
#include "fvl/diff/grad_check.hpp"
#include "fvl/model/config.hpp"

namespace fvl::model {

// Random well-formed samples at 1280 x 640 with boxes, pooled flow and ego
// features of the configured lengths.
std::vector<data::Sample> synthetic_samples(const ModelConfig& config, std::size_t count, std::uint64_t seed);

// Finite-difference check of the full model loss over `batch` synthetic
// samples. Weights are initialized from `seed`; biases get small random
// values so no relu input starts exactly at zero.
diff::GradCheckReport check_model_gradients(const ModelConfig& config, std::uint64_t seed, std::size_t batch = 2,
                                            diff::GradCheckOptions options = {});

}  // namespace fvl::model
