#include "fvl/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <utility>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/diff/ops.hpp"
#include "fvl/metrics/metrics.hpp"
#include "fvl/nn/adam.hpp"

namespace fvl::model {

namespace {

struct ChunkResult {
  double squared_error = 0.0;
  double displacement = 0.0;  // summed per-sample ADE, px
  std::vector<diff::Matrix> grads;
};

// Gradient of sum-squared-error / denominator over one chunk.
ChunkResult run_chunk(const FvlModel& model, diff::Tape& tape, std::span<const data::Sample* const> chunk,
                      double denominator) {
  const ModelConfig& config = model.config();
  tape.clear();
  const nn::Binding bound(tape, model.params(), nn::Binding::Mode::train);
  const Batch batch = make_batch(config, chunk);
  const auto outputs = model.decode(bound, model.encode(bound, batch), batch);
  diff::DiffArray total = diff::sum_squared_error(outputs[0], batch.target[0]);
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    total = diff::add(total, diff::sum_squared_error(outputs[i], batch.target[i]));
  }
  const diff::DiffArray loss = diff::scale(total, 1.0 / denominator);
  tape.backward(loss);

  ChunkResult result;
  result.squared_error = total.scalar();
  result.grads = bound.gradients();
  const double rs = config.residual_scale;
  for (std::size_t r = 0; r < batch.size; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const double dx = (outputs[i].value(r, 0) - batch.target[i](r, 0)) / rs * batch.images[r].width;
      const double dy = (outputs[i].value(r, 1) - batch.target[i](r, 1)) / rs * batch.images[r].height;
      sum += std::hypot(dx, dy);
    }
    result.displacement += sum / static_cast<double>(outputs.size());
  }
  return result;
}

// Holds out whole videos until `fraction` of the samples are set aside.
// Windows of one video share its ego-motion, so a held-out track from a
// training video would not measure generalization. With a single video the
// groups are its tracks.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout(std::span<const data::Sample> samples,
                                                                          double fraction, Rng& rng) {
  std::vector<std::size_t> train;
  std::vector<std::size_t> held;
  if (fraction <= 0.0) {
    for (std::size_t i = 0; i < samples.size(); ++i) train.push_back(i);
    return {train, held};
  }
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
  const bool one_video = std::all_of(samples.begin(), samples.end(),
                                     [&](const data::Sample& s) { return s.video == samples.front().video; });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups[{samples[i].video, one_video ? samples[i].track : 0}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [key, members] : groups) order.push_back(&members);
  rng.shuffle(std::span(order));
  const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(samples.size())));
  for (const auto* members : order) {
    auto& into = held.size() < target && order.size() > 1 ? held : train;
    into.insert(into.end(), members->begin(), members->end());
  }
  if (train.empty()) std::swap(train, held);
  std::sort(train.begin(), train.end());
  std::sort(held.begin(), held.end());
  return {train, held};
}

std::vector<data::Sample> gather(std::span<const data::Sample> samples, const std::vector<std::size_t>& idx) {
  std::vector<data::Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i]);
  return out;
}

}  // namespace

double mean_ade(const FvlModel& model, std::span<const data::Sample> samples) {
  if (samples.empty()) throw ValidationError("mean ADE of an empty sample set");
  const auto predictions = model.predict(samples);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto boxes = predictions[i].pixel_boxes(samples[i].image);
    total += metrics::displacement_errors(boxes, samples[i].future).ade;
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const ModelConfig& config, std::span<const data::Sample> samples, const TrainOptions& options) {
  config.validate();
  if (samples.empty()) throw ValidationError("training set is empty");
  if (options.epochs < 0) throw ValidationError("epochs must be non-negative");
  if (options.batch_size < 1) throw ValidationError("batch size must be positive");
  if (options.workers < 1) throw ValidationError("workers must be positive");
  if (options.chunk_size < 1) throw ValidationError("chunk size must be positive");
  if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0)) {
    throw ValidationError("validation fraction must be in [0, 1)");
  }
  for (const auto& s : samples) {
    if (s.future.size() != static_cast<std::size_t>(config.delta)) {
      throw ValidationError("sample " + std::to_string(s.id) + " has no full future to train on");
    }
  }

  Rng master(options.seed);
  const std::uint64_t init_seed = master.next();
  Rng split_rng(master.next());
  Rng shuffle_rng(master.next());

  FvlModel model(config);
  model.init(init_seed);

  const auto [train_idx, held_idx] = split_holdout(samples, options.validation_fraction, split_rng);
  const std::vector<data::Sample> train_set = gather(samples, train_idx);
  const std::vector<data::Sample> held_set = gather(samples, held_idx);
  const std::vector<data::Sample>& selection = held_set.empty() ? train_set : held_set;

  TrainResult result;
  result.params = model.params();
  result.train_samples = train_set.size();
  result.selection_samples = selection.size();
  result.best_ade = std::numeric_limits<double>::infinity();
  if (options.epochs == 0) return result;

  nn::AdamState adam(model.params(), {options.learning_rate});
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<diff::Tape> tapes(static_cast<std::size_t>(options.workers));
  const double components = 4.0 * config.delta;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double squared_error = 0.0;
    double displacement = 0.0;
    int batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      ++batch_no;
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(options.batch_size));
      std::vector<const data::Sample*> batch;
      for (std::size_t k = begin; k < end; ++k) batch.push_back(&train_set[order[k]]);
      const double denominator = static_cast<double>(batch.size()) * components;

      std::vector<std::span<const data::Sample* const>> chunks;
      for (std::size_t c = 0; c < batch.size(); c += options.chunk_size) {
        chunks.emplace_back(batch.data() + c, std::min(options.chunk_size, batch.size() - c));
      }
      std::vector<ChunkResult> results(chunks.size());
      const std::size_t workers = std::min<std::size_t>(tapes.size(), chunks.size());
      if (workers <= 1) {
        for (std::size_t c = 0; c < chunks.size(); ++c) results[c] = run_chunk(model, tapes[0], chunks[c], denominator);
      } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
          threads.emplace_back([&, w] {
            try {
              for (std::size_t c = w; c < chunks.size(); c += workers) {
                results[c] = run_chunk(model, tapes[w], chunks[c], denominator);
              }
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
        for (auto& t : threads) t.join();
        for (const auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
      }

      std::vector<diff::Matrix> grads = std::move(results[0].grads);
      double batch_error = results[0].squared_error;
      for (std::size_t c = 1; c < results.size(); ++c) {
        for (std::size_t p = 0; p < grads.size(); ++p) {
          auto& into = grads[p].data;
          const auto& from = results[c].grads[p].data;
          for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
        }
        batch_error += results[c].squared_error;
      }
      for (const auto& r : results) displacement += r.displacement;
      const double batch_loss = batch_error / denominator;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no) + " (" + std::to_string(batch.size()) + " samples)");
      }
      squared_error += batch_error;
      try {
        nn::adam_step(adam, model.params(), grads);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no) + ": " +
                           e.what());
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = squared_error / (static_cast<double>(train_set.size()) * components);
    stats.train_ade = displacement / static_cast<double>(train_set.size());
    stats.selection_ade = mean_ade(model, selection);
    result.curve.push_back(stats);
    if (stats.selection_ade < result.best_ade) {
      result.best_ade = stats.selection_ade;
      result.best_epoch = epoch;
      result.params = model.params();
    }
    if (options.on_epoch) options.on_epoch(stats);
  }
  return result;
}

}  // namespace fvl::model
