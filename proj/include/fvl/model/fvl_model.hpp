#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fvl/data/sample.hpp"
#include "fvl/diff/matrix.hpp"
#include "fvl/model/config.hpp"
#include "fvl/nn/layers.hpp"
#include "fvl/nn/parameters.hpp"

namespace fvl::model {

// Scaled model inputs for a batch, one matrix per time step with one row per
// sample.
struct Batch {
  std::size_t size = 0;
  std::vector<ImageSize> images;     // per row
  std::vector<diff::Matrix> boxes;   // tau x [B x 4], relative to the anchor
  std::vector<diff::Matrix> flow;    // tau x [B x pooled_dim], flow variants only
  std::vector<diff::Matrix> ego;     // delta x [B x 3], ego variants only
  diff::Matrix anchor;               // [B x 4], normalized anchor boxes
  std::vector<diff::Matrix> target;  // delta x [B x 4], scaled residuals
};

// Throws ConfigError when a stream the variant needs is missing and
// ValidationError when a sample's lengths disagree with the config. Streams
// the variant does not use are ignored. Targets are built when every sample
// has a full future.
Batch make_batch(const ModelConfig& config, std::span<const data::Sample* const> samples);

struct Prediction {
  // Future box minus anchor box, normalized units.
  std::vector<NormalizedBox> residuals;
  // Anchor plus residual, normalized units.
  std::vector<NormalizedBox> boxes;

  std::vector<BoundingBox> pixel_boxes(const ImageSize& image) const;
};

class FvlModel {
 public:
  // Declares the parameters of the variant, all zero.
  explicit FvlModel(ModelConfig config);
  // Throws ConfigError unless `params` has exactly the layout of `config`.
  FvlModel(ModelConfig config, nn::ParamSet params);

  const ModelConfig& config() const { return config_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  void init(std::uint64_t seed) { nn::init_params(params_, seed); }

  // Fused encoder state H, [B x hidden].
  diff::DiffArray encode(const nn::Binding& bound, const Batch& batch) const;
  // Decoder outputs for steps 1..delta, each [B x 4] scaled residuals.
  std::vector<diff::DiffArray> decode(const nn::Binding& bound, diff::DiffArray fused, const Batch& batch) const;
  // Sum of squared errors of the scaled residuals over the batch.
  diff::DiffArray squared_error(const nn::Binding& bound, const Batch& batch) const;
  // Mean squared error over every residual component.
  diff::DiffArray loss(const nn::Binding& bound, const Batch& batch) const;

  // Pure inference; parameters are bound as constants.
  diff::Matrix fused_state(const data::Sample& sample) const;
  Prediction predict(const data::Sample& sample) const;
  std::vector<Prediction> predict(std::span<const data::Sample> samples) const;

 private:
  void declare();

  ModelConfig config_;
  nn::ParamSet params_;
  nn::Projection box_embed_;
  nn::GruCell box_gru_;
  nn::Projection flow_embed_;
  nn::GruCell flow_gru_;
  nn::Projection fuse_;
  nn::Projection dec_embed_;
  nn::Projection ego_embed_;
  nn::GruCell dec_gru_;
  nn::Projection output_;
};

}  // namespace fvl::model
