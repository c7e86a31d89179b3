#include "fvl/model/fvl_model.hpp"

#include <algorithm>

#include "fvl/common/error.hpp"
#include "fvl/diff/ops.hpp"

namespace fvl::model {

using diff::DiffArray;
using diff::Matrix;
using nn::Activation;

namespace {

constexpr std::size_t kBoxDim = 4;
constexpr std::size_t kEgoDim = 3;
constexpr std::size_t kPredictChunk = 256;

std::string who(const data::Sample& s) { return "sample " + std::to_string(s.id); }

}  // namespace

Batch make_batch(const ModelConfig& config, std::span<const data::Sample* const> samples) {
  config.validate();
  if (samples.empty()) throw ValidationError("cannot build an empty batch");
  const std::size_t b = samples.size();
  const auto tau = static_cast<std::size_t>(config.tau);
  const auto delta = static_cast<std::size_t>(config.delta);
  const bool flow = uses_flow(config.variant);
  const bool ego = uses_ego(config.variant);
  const auto pd = static_cast<std::size_t>(config.pooled_dim);

  bool with_target = true;
  for (const data::Sample* s : samples) {
    if (s->past.size() != tau) {
      throw ValidationError(who(*s) + " has " + std::to_string(s->past.size()) + " past boxes, model expects " +
                            std::to_string(tau));
    }
    if (flow) {
      if (s->flow.empty()) {
        throw ConfigError("variant " + name_of(config.variant) + " needs pooled flow, " + who(*s) + " has none");
      }
      if (s->flow.size() != tau) throw ValidationError(who(*s) + " has flow for the wrong number of frames");
      for (const auto& f : s->flow) {
        if (f.values.size() != pd) {
          throw ValidationError(who(*s) + " has pooled flow of size " + std::to_string(f.values.size()) +
                                ", model expects " + std::to_string(pd));
        }
      }
    }
    if (ego) {
      if (s->ego.empty()) {
        throw ConfigError("variant " + name_of(config.variant) + " needs ego-motion, " + who(*s) + " has none");
      }
      if (s->ego.size() != delta) {
        throw ValidationError(who(*s) + " has " + std::to_string(s->ego.size()) + " ego features, model expects " +
                              std::to_string(delta));
      }
    }
    if (s->future.size() != delta) with_target = false;
  }

  Batch batch;
  batch.size = b;
  batch.images.reserve(b);
  for (const data::Sample* s : samples) batch.images.push_back(s->image);
  batch.anchor = Matrix(b, kBoxDim);
  batch.boxes.assign(tau, Matrix(b, kBoxDim));
  if (flow) batch.flow.assign(tau, Matrix(b, pd));
  if (ego) batch.ego.assign(delta, Matrix(b, kEgoDim));
  if (with_target) batch.target.assign(delta, Matrix(b, kBoxDim));

  for (std::size_t r = 0; r < b; ++r) {
    const data::Sample& s = *samples[r];
    const auto anchor = data::normalize(s.anchor(), s.image).as_array();
    for (std::size_t c = 0; c < kBoxDim; ++c) batch.anchor(r, c) = anchor[c];
    for (std::size_t k = 0; k < tau; ++k) {
      const auto box = data::normalize(s.past[k], s.image).as_array();
      for (std::size_t c = 0; c < kBoxDim; ++c) batch.boxes[k](r, c) = (box[c] - anchor[c]) * config.box_scale;
    }
    if (flow) {
      const double su = config.flow_scale / s.image.width;
      const double sv = config.flow_scale / s.image.height;
      for (std::size_t k = 0; k < tau; ++k) {
        const auto& values = s.flow[k].values;
        for (std::size_t c = 0; c < pd; c += 2) {
          batch.flow[k](r, c) = values[c] * su;
          batch.flow[k](r, c + 1) = values[c + 1] * sv;
        }
      }
    }
    if (ego) {
      for (std::size_t i = 0; i < delta; ++i) {
        batch.ego[i](r, 0) = s.ego[i].yaw * config.ego_yaw_scale;
        batch.ego[i](r, 1) = s.ego[i].x * config.ego_translation_scale;
        batch.ego[i](r, 2) = s.ego[i].z * config.ego_translation_scale;
      }
    }
    if (with_target) {
      for (std::size_t i = 0; i < delta; ++i) {
        const auto box = data::normalize(s.future[i], s.image).as_array();
        for (std::size_t c = 0; c < kBoxDim; ++c) {
          batch.target[i](r, c) = (box[c] - anchor[c]) * config.residual_scale;
        }
      }
    }
  }
  return batch;
}

std::vector<BoundingBox> Prediction::pixel_boxes(const ImageSize& image) const {
  std::vector<BoundingBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(data::denormalize(b, image));
  return out;
}

FvlModel::FvlModel(ModelConfig config) : config_(config) {
  config_.validate();
  declare();
}

FvlModel::FvlModel(ModelConfig config, nn::ParamSet params) : FvlModel(config) {
  if (!params_.same_layout(params)) {
    throw ConfigError("parameters do not match a " + name_of(config_.variant) + " model with hidden " +
                      std::to_string(config_.hidden) + ", embed " + std::to_string(config_.embed));
  }
  params_ = std::move(params);
}

void FvlModel::declare() {
  const auto hidden = static_cast<std::size_t>(config_.hidden);
  const auto embed = static_cast<std::size_t>(config_.embed);
  box_embed_ = nn::Projection::declare(params_, "box_embed", kBoxDim, embed, Activation::relu);
  box_gru_ = nn::GruCell::declare(params_, "box_gru", embed, hidden);
  if (uses_flow(config_.variant)) {
    flow_embed_ = nn::Projection::declare(params_, "flow_embed", static_cast<std::size_t>(config_.pooled_dim), embed,
                                          Activation::relu);
    flow_gru_ = nn::GruCell::declare(params_, "flow_gru", embed, hidden);
  }
  fuse_ = nn::Projection::declare(params_, "fuse", hidden, hidden, Activation::relu);
  dec_embed_ = nn::Projection::declare(params_, "dec_embed", hidden, embed, Activation::relu);
  if (uses_ego(config_.variant)) {
    ego_embed_ = nn::Projection::declare(params_, "ego_embed", kEgoDim, embed, Activation::relu);
  }
  dec_gru_ = nn::GruCell::declare(params_, "dec_gru", embed, hidden);
  output_ = nn::Projection::declare(params_, "output", hidden, kBoxDim, Activation::none);
}

DiffArray FvlModel::encode(const nn::Binding& bound, const Batch& batch) const {
  diff::Tape& tape = bound.tape();
  const auto hidden = static_cast<std::size_t>(config_.hidden);
  if (batch.boxes.size() != static_cast<std::size_t>(config_.tau)) {
    throw ValidationError("batch has " + std::to_string(batch.boxes.size()) + " past steps, model expects " +
                          std::to_string(config_.tau));
  }
  DiffArray h_box = tape.constant(Matrix(batch.size, hidden));
  for (const auto& x : batch.boxes) {
    h_box = nn::gru_step(bound, box_gru_, nn::project(bound, box_embed_, tape.constant(x)), h_box);
  }
  if (!uses_flow(config_.variant)) return nn::project(bound, fuse_, h_box);

  if (batch.flow.size() != batch.boxes.size()) {
    throw ConfigError("variant " + name_of(config_.variant) + " needs pooled flow for every past frame");
  }
  DiffArray h_flow = tape.constant(Matrix(batch.size, hidden));
  for (const auto& o : batch.flow) {
    h_flow = nn::gru_step(bound, flow_gru_, nn::project(bound, flow_embed_, tape.constant(o)), h_flow);
  }
  return nn::project(bound, fuse_, diff::average(h_box, h_flow));
}

std::vector<DiffArray> FvlModel::decode(const nn::Binding& bound, DiffArray fused, const Batch& batch) const {
  diff::Tape& tape = bound.tape();
  const bool ego = uses_ego(config_.variant);
  if (ego && batch.ego.size() != static_cast<std::size_t>(config_.delta)) {
    throw ValidationError("decoder needs " + std::to_string(config_.delta) + " ego features, got " +
                          std::to_string(batch.ego.size()));
  }
  std::vector<DiffArray> outputs;
  outputs.reserve(static_cast<std::size_t>(config_.delta));
  DiffArray h = fused;
  for (int i = 0; i < config_.delta; ++i) {
    DiffArray input = nn::project(bound, dec_embed_, h);
    if (ego) input = diff::average(input, nn::project(bound, ego_embed_, tape.constant(batch.ego[i])));
    h = nn::gru_step(bound, dec_gru_, input, h);
    outputs.push_back(nn::project(bound, output_, h));
  }
  return outputs;
}

DiffArray FvlModel::squared_error(const nn::Binding& bound, const Batch& batch) const {
  if (batch.target.size() != static_cast<std::size_t>(config_.delta)) {
    throw ValidationError("batch has no targets for " + std::to_string(config_.delta) + " future steps");
  }
  const auto outputs = decode(bound, encode(bound, batch), batch);
  DiffArray total = diff::sum_squared_error(outputs[0], batch.target[0]);
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    total = diff::add(total, diff::sum_squared_error(outputs[i], batch.target[i]));
  }
  return total;
}

DiffArray FvlModel::loss(const nn::Binding& bound, const Batch& batch) const {
  const double n = static_cast<double>(batch.size * kBoxDim * static_cast<std::size_t>(config_.delta));
  return diff::scale(squared_error(bound, batch), 1.0 / n);
}

Matrix FvlModel::fused_state(const data::Sample& sample) const {
  diff::Tape tape;
  const nn::Binding bound(tape, params_, nn::Binding::Mode::inference);
  const data::Sample* ptr = &sample;
  const Batch batch = make_batch(config_, std::span(&ptr, 1));
  return encode(bound, batch).to_matrix();
}

Prediction FvlModel::predict(const data::Sample& sample) const {
  return predict(std::span(&sample, 1)).front();
}

std::vector<Prediction> FvlModel::predict(std::span<const data::Sample> samples) const {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  diff::Tape tape;
  for (std::size_t begin = 0; begin < samples.size(); begin += kPredictChunk) {
    const std::size_t end = std::min(samples.size(), begin + kPredictChunk);
    std::vector<const data::Sample*> chunk;
    for (std::size_t k = begin; k < end; ++k) chunk.push_back(&samples[k]);
    tape.clear();
    const nn::Binding bound(tape, params_, nn::Binding::Mode::inference);
    const Batch batch = make_batch(config_, chunk);
    const auto outputs = decode(bound, encode(bound, batch), batch);
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      Prediction p;
      for (const auto& o : outputs) {
        NormalizedBox residual;
        residual.cx = o.value(r, 0) / config_.residual_scale;
        residual.cy = o.value(r, 1) / config_.residual_scale;
        residual.w = o.value(r, 2) / config_.residual_scale;
        residual.h = o.value(r, 3) / config_.residual_scale;
        p.residuals.push_back(residual);
        p.boxes.push_back({batch.anchor(r, 0) + residual.cx, batch.anchor(r, 1) + residual.cy,
                           batch.anchor(r, 2) + residual.w, batch.anchor(r, 3) + residual.h});
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace fvl::model
