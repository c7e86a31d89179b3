#include "fvl/model/model_check.hpp"

#include "fvl/common/random.hpp"
#include "fvl/model/fvl_model.hpp"

namespace fvl::model {

std::vector<data::Sample> synthetic_samples(const ModelConfig& config, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<data::Sample> out;
  const int n = config.tau + config.delta;
  const auto pooled = static_cast<std::size_t>(config.pooled_dim);
  int grid = 1;
  while (2 * (grid + 1) * (grid + 1) <= config.pooled_dim) ++grid;
  for (std::size_t i = 0; i < count; ++i) {
    data::Sample s;
    s.id = i;
    s.video = "synthetic";
    s.track = static_cast<int>(i);
    BoundingBox box{rng.uniform(200.0, 1000.0), rng.uniform(200.0, 450.0), rng.uniform(30.0, 150.0),
                    rng.uniform(20.0, 100.0)};
    const BoundingBox step{rng.uniform(-8.0, 8.0), rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0)};
    for (int k = 0; k < n; ++k) {
      (k < config.tau ? s.past : s.future).push_back(box);
      box = {box.cx + step.cx, box.cy + step.cy, box.w + step.w, box.h + step.h};
    }
    for (int k = 0; k < config.tau; ++k) {
      flow::PooledFlow f;
      f.grid_size = grid;
      for (std::size_t c = 0; c < pooled; ++c) f.values.push_back(3.0 * rng.normal());
      s.flow.push_back(std::move(f));
    }
    double yaw = 0.0;
    double x = 0.0;
    for (int k = 0; k < config.delta; ++k) {
      yaw += rng.uniform(-0.03, 0.03);
      x += rng.uniform(0.2, 1.0);
      s.ego.push_back({yaw, x, rng.uniform(-0.2, 0.2)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

diff::GradCheckReport check_model_gradients(const ModelConfig& config, std::uint64_t seed, std::size_t batch,
                                            diff::GradCheckOptions options) {
  FvlModel model(config);
  model.init(seed);
  // Zero biases would put relu inputs fed by the all-zero anchor-relative box
  // exactly on the kink, where the check has to skip them.
  Rng bias_rng(seed ^ 0x5bd1e995u);
  for (auto& p : model.params()) {
    if (p.rank != 1) continue;
    for (double& v : p.value.data) v = bias_rng.uniform(-0.1, 0.1);
  }
  const auto samples = synthetic_samples(config, batch, seed + 1);
  std::vector<const data::Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const Batch inputs = make_batch(config, ptrs);
  const auto names = model.params().names();
  const diff::Objective objective = [&](diff::Tape& tape, std::span<const diff::DiffArray> leaves) {
    const nn::Binding bound(tape, std::vector<diff::DiffArray>(leaves.begin(), leaves.end()));
    return model.loss(bound, inputs);
  };
  return diff::grad_check(model.params().values(), names, objective, options);
}

}  // namespace fvl::model
