#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/model/config.hpp"
#include "fvl/model/fvl_model.hpp"
#include "fvl/model/model_check.hpp"
#include "fvl/model/trainer.hpp"
#include "helpers.hpp"

using namespace fvl;
using namespace fvl::model;

namespace {

ModelConfig small_config(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.hidden = 8;
  c.embed = 6;
  return c;
}

FvlModel initialized(const ModelConfig& c, std::uint64_t seed) {
  FvlModel m(c);
  m.init(seed);
  return m;
}

// Copies every parameter of `from` whose name exists in `to`.
void copy_shared(const FvlModel& from, FvlModel& to) {
  for (const auto& p : from.params()) to.params()[to.params().find(p.name)].value = p.value;
}

void scale_param(FvlModel& m, const std::string& name, double factor) {
  auto& value = m.params()[m.params().find(name)].value;
  for (std::size_t r = 0; r < value.rows(); ++r) {
    for (std::size_t c = 0; c < value.cols(); ++c) value(r, c) *= factor;
  }
}

const std::vector<Variant> kVariants = {Variant::x, Variant::xe, Variant::xo, Variant::xoe};

}  // namespace

TEST(Model, ZeroParametersPredictTheAnchor) {
  for (auto v : kVariants) {
    const auto c = small_config(v);
    const FvlModel m(c);
    for (const auto& s : synthetic_samples(c, 4, 1)) {
      const auto h = m.fused_state(s);
      for (std::size_t k = 0; k < h.cols(); ++k) EXPECT_EQ(h(0, k), 0.0);
      const auto p = m.predict(s);
      ASSERT_EQ(p.boxes.size(), 10u);
      const auto anchor = data::normalize(s.anchor(), s.image);
      for (const auto& b : p.boxes) EXPECT_EQ(b, anchor);
      for (const auto& b : p.pixel_boxes(s.image)) {
        EXPECT_NEAR(b.cx, s.anchor().cx, 1e-9);
        EXPECT_NEAR(b.h, s.anchor().h, 1e-9);
      }
    }
  }
}

TEST(Model, PredictionIsAnchorPlusResidual) {
  const auto c = small_config(Variant::xoe);
  const auto m = initialized(c, 3);
  const auto samples = synthetic_samples(c, 5, 2);
  const auto preds = m.predict(samples);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto anchor = data::normalize(samples[i].anchor(), samples[i].image);
    for (std::size_t k = 0; k < preds[i].boxes.size(); ++k) {
      const auto& r = preds[i].residuals[k];
      const NormalizedBox want{anchor.cx + r.cx, anchor.cy + r.cy, anchor.w + r.w, anchor.h + r.h};
      EXPECT_EQ(preds[i].boxes[k], want);
    }
  }
}

TEST(Model, DeterministicAndBatchIndependent) {
  const auto c = small_config(Variant::xoe);
  const auto a = initialized(c, 4);
  const auto b = initialized(c, 4);
  const auto samples = synthetic_samples(c, 6, 3);
  const auto batched = a.predict(samples);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(b.predict(samples[i]).boxes, batched[i].boxes);
  }
}

TEST(Model, FlowChangesTheFusedState) {
  const auto cx = small_config(Variant::x);
  const auto co = small_config(Variant::xo);
  const auto x = initialized(cx, 5);
  auto xo = initialized(co, 5);
  copy_shared(x, xo);
  const auto s = synthetic_samples(co, 1, 4).front();
  const auto hx = x.fused_state(s);
  const auto ho = xo.fused_state(s);
  double diff = 0.0;
  for (std::size_t k = 0; k < hx.cols(); ++k) diff += std::abs(hx(0, k) - ho(0, k));
  EXPECT_GT(diff, 1e-6);
}

TEST(Model, ZeroFlowBranchWithDoubledFusionNestsX) {
  const auto cx = small_config(Variant::x);
  const auto co = small_config(Variant::xo);
  const auto x = initialized(cx, 6);
  FvlModel xo(co);
  copy_shared(x, xo);
  scale_param(xo, "fuse.weight", 2.0);
  for (const auto& s : synthetic_samples(co, 4, 5)) {
    const auto hx = x.fused_state(s);
    const auto ho = xo.fused_state(s);
    for (std::size_t k = 0; k < hx.cols(); ++k) ASSERT_EQ(hx(0, k), ho(0, k));
    EXPECT_EQ(x.predict(s).boxes, xo.predict(s).boxes);
  }
}

TEST(Model, ZeroEgoBranchWithDoubledDecoderInputNestsX) {
  const auto cx = small_config(Variant::x);
  const auto ce = small_config(Variant::xe);
  const auto x = initialized(cx, 7);
  FvlModel xe(ce);
  copy_shared(x, xe);
  // Only the input columns; the remaining columns act on the hidden state.
  for (const char* name : {"dec_gru.w_z", "dec_gru.w_r", "dec_gru.w_h"}) {
    auto& w = xe.params()[xe.params().find(name)].value;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < ce.embed; ++c) w(r, c) *= 2.0;
    }
  }
  for (const auto& s : synthetic_samples(ce, 4, 6)) EXPECT_EQ(x.predict(s).boxes, xe.predict(s).boxes);
}

TEST(Model, UnusedStreamsAreIgnored) {
  const auto c = small_config(Variant::x);
  const auto m = initialized(c, 8);
  auto s = synthetic_samples(small_config(Variant::xoe), 1, 7).front();
  const auto before = m.predict(s).boxes;
  for (auto& f : s.flow) f.values.assign(f.values.size(), 123.0);
  for (auto& e : s.ego) e = {1, 2, 3};
  EXPECT_EQ(m.predict(s).boxes, before);
  s.flow.clear();
  s.ego.clear();
  EXPECT_EQ(m.predict(s).boxes, before);
}

TEST(Model, DecoderIsCausal) {
  auto c10 = small_config(Variant::xoe);
  auto c1 = c10;
  c1.delta = 1;
  const auto m10 = initialized(c10, 9);
  const FvlModel m1(c1, m10.params());
  const auto s = synthetic_samples(c10, 1, 8).front();
  auto shorter = s;
  shorter.future.resize(1);
  shorter.ego.resize(1);
  EXPECT_EQ(m1.predict(shorter).boxes.front(), m10.predict(s).boxes.front());

  // Changing the ego feature of step k leaves steps before k untouched.
  const auto base = m10.predict(s).boxes;
  auto later = s;
  later.ego[6] = {0.5, 3.0, -2.0};
  const auto changed = m10.predict(later).boxes;
  for (int k = 0; k < 6; ++k) EXPECT_EQ(changed[k], base[k]);
  EXPECT_NE(changed[6], base[6]);
}

TEST(Model, GradientsMatchFiniteDifferences) {
  for (auto v : kVariants) {
    const auto report = check_model_gradients(small_config(v), 7);
    EXPECT_TRUE(report.passed) << name_of(v) << " max rel err " << report.max_rel_error;
    EXPECT_LT(report.max_rel_error, 1e-4) << name_of(v);
  }
}

TEST(Model, ParameterLayoutMismatchIsAConfigError) {
  const FvlModel x(small_config(Variant::x));
  EXPECT_THROW(FvlModel(small_config(Variant::xoe), x.params()), ConfigError);
  auto bigger = small_config(Variant::x);
  bigger.hidden = 9;
  EXPECT_THROW(FvlModel(bigger, x.params()), ConfigError);
}

TEST(Batch, MissingStreamsAndWrongLengths) {
  const auto c = small_config(Variant::xoe);
  auto s = synthetic_samples(c, 1, 9).front();
  const data::Sample* ptr = &s;
  EXPECT_NO_THROW(make_batch(c, std::span(&ptr, 1)));
  auto no_flow = s;
  no_flow.flow.clear();
  ptr = &no_flow;
  EXPECT_THROW(make_batch(c, std::span(&ptr, 1)), ConfigError);
  EXPECT_NO_THROW(make_batch(small_config(Variant::xe), std::span(&ptr, 1)));
  auto no_ego = s;
  no_ego.ego.clear();
  ptr = &no_ego;
  EXPECT_THROW(make_batch(c, std::span(&ptr, 1)), ConfigError);
  auto short_past = s;
  short_past.past.pop_back();
  ptr = &short_past;
  EXPECT_THROW(make_batch(c, std::span(&ptr, 1)), ValidationError);
}

TEST(Batch, TargetsAreScaledResiduals) {
  const auto c = small_config(Variant::x);
  const auto s = synthetic_samples(c, 1, 10).front();
  const data::Sample* ptr = &s;
  const auto batch = make_batch(c, std::span(&ptr, 1));
  const auto anchor = data::normalize(s.anchor(), s.image);
  for (int k = 0; k < c.delta; ++k) {
    const auto f = data::normalize(s.future[k], s.image);
    EXPECT_NEAR(batch.target[k](0, 0), (f.cx - anchor.cx) * c.residual_scale, 1e-12);
    EXPECT_NEAR(batch.target[k](0, 3), (f.h - anchor.h) * c.residual_scale, 1e-12);
  }
}

TEST(Config, ValidateParseAndRoundTrip) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.hidden = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.tau = 0;
  EXPECT_THROW(c.validate(), ConfigError);

  c = small_config(Variant::xe);
  c.flow_scale = 12.5;
  EXPECT_EQ(from_key_values(to_key_values(c), "cfg"), c);
  test::TempDir dir("config");
  save_config(dir.path() / "model.cfg", c);
  EXPECT_EQ(load_config(dir.path() / "model.cfg"), c);
  EXPECT_THROW(from_key_values({{"hiden", "8"}}, "cfg"), FormatError);
  EXPECT_EQ(parse_variant("xOe"), Variant::xoe);
  EXPECT_THROW(parse_variant("xy"), ConfigError);
}

TEST(Trainer, ZeroEpochsReturnsTheInitialParameters) {
  const auto c = small_config(Variant::x);
  const auto samples = synthetic_samples(c, 20, 11);
  TrainOptions o;
  o.epochs = 0;
  o.seed = 3;
  const auto r = train(c, samples, o);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(r.params, initialized(c, Rng(3).next()).params());
}

TEST(Trainer, SameSeedSameCurveAndWorkerCountDoesNotMatter) {
  const auto c = small_config(Variant::xoe);
  const auto samples = synthetic_samples(c, 60, 12);
  TrainOptions o;
  o.epochs = 3;
  o.batch_size = 16;
  o.seed = 5;
  const auto a = train(c, samples, o);
  const auto b = train(c, samples, o);
  o.workers = 4;
  const auto many = train(c, samples, o);
  ASSERT_EQ(a.curve.size(), 3u);
  for (std::size_t e = 0; e < a.curve.size(); ++e) {
    EXPECT_EQ(a.curve[e].train_loss, b.curve[e].train_loss);
    EXPECT_EQ(a.curve[e].selection_ade, many.curve[e].selection_ade);
  }
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.params, many.params);
  EXPECT_EQ(a.train_samples + a.selection_samples, samples.size());
  EXPECT_GT(a.selection_samples, 0u);
}

TEST(Trainer, LossDecreasesOnAFixedSet) {
  const auto c = small_config(Variant::xe);
  const auto samples = synthetic_samples(c, 32, 13);
  TrainOptions o;
  o.epochs = 30;
  o.batch_size = 8;
  o.learning_rate = 5e-3;
  o.validation_fraction = 0.0;
  const auto r = train(c, samples, o);
  EXPECT_LT(r.curve.back().train_loss, r.curve.front().train_loss);
  EXPECT_EQ(r.selection_samples, samples.size());
}

TEST(Trainer, NonFiniteInputNamesTheEpoch) {
  const auto c = small_config(Variant::xe);
  auto samples = synthetic_samples(c, 16, 14);
  for (auto& s : samples) s.ego[0].x = std::numeric_limits<double>::quiet_NaN();
  TrainOptions o;
  o.epochs = 2;
  o.batch_size = 8;
  o.validation_fraction = 0.0;
  try {
    train(c, samples, o);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}
