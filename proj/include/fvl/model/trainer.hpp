#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fvl/data/sample.hpp"
#include "fvl/model/config.hpp"
#include "fvl/model/fvl_model.hpp"
#include "fvl/nn/parameters.hpp"

namespace fvl::model {

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  // ADE (px) of the training batches as they were seen during the epoch.
  double train_ade = 0.0;
  // ADE (px) of the selection set after the epoch.
  double selection_ade = 0.0;
};

struct TrainOptions {
  int epochs = 40;
  int batch_size = 64;
  double learning_rate = 5e-4;
  std::uint64_t seed = 0;
  int workers = 1;
  // Share of samples held out, as whole videos, for model selection. At 0
  // the model is selected on the training set.
  double validation_fraction = 0.1;
  // Samples per gradient tape. Gradients are summed over chunks in a fixed
  // order, so results do not depend on `workers`.
  std::size_t chunk_size = 16;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  nn::ParamSet params;  // best epoch, or the initial parameters for 0 epochs
  std::vector<EpochStats> curve;
  int best_epoch = 0;
  double best_ade = 0.0;
  std::size_t train_samples = 0;
  std::size_t selection_samples = 0;
};

// Mini-batch Adam on the mean squared scaled residual. Throws NumericError
// with the epoch and batch when the loss becomes non-finite.
TrainResult train(const ModelConfig& config, std::span<const data::Sample> samples, const TrainOptions& options);

// Mean ADE in pixels of the model over `samples`.
double mean_ade(const FvlModel& model, std::span<const data::Sample> samples);

}  // namespace fvl::model
