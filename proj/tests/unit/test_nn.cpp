#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/diff/grad_check.hpp"
#include "fvl/nn/adam.hpp"
#include "fvl/nn/checkpoint.hpp"
#include "fvl/nn/layers.hpp"
#include "helpers.hpp"

using namespace fvl;
using namespace fvl::nn;
using diff::DiffArray;
using diff::Matrix;
using diff::Tape;

namespace {

Matrix random_row(Rng& rng, std::size_t n, double scale = 1.0) {
  Matrix m(1, n);
  for (auto& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

void randomize(ParamSet& params, Rng& rng) {
  for (auto& p : params) {
    for (auto& v : p.value.data) v = rng.uniform(-1.0, 1.0);
  }
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-loop GRU written from the recurrence, independent of the tape ops.
std::vector<double> gru_oracle(const ParamSet& p, const GruCell& cell, const std::vector<double>& x,
                               const std::vector<double>& h) {
  const std::size_t in = cell.input_size;
  const std::size_t hs = cell.hidden_size;
  auto affine = [&](ParamId w, ParamId b, const std::vector<double>& hv, std::size_t i) {
    double acc = p[b].value.data[i];
    for (std::size_t k = 0; k < in; ++k) acc += p[w].value(i, k) * x[k];
    for (std::size_t k = 0; k < hs; ++k) acc += p[w].value(i, in + k) * hv[k];
    return acc;
  };
  std::vector<double> z(hs), r(hs), rh(hs), out(hs);
  for (std::size_t i = 0; i < hs; ++i) {
    z[i] = sigm(affine(cell.w_z, cell.b_z, h, i));
    r[i] = sigm(affine(cell.w_r, cell.b_r, h, i));
  }
  for (std::size_t i = 0; i < hs; ++i) rh[i] = r[i] * h[i];
  for (std::size_t i = 0; i < hs; ++i) {
    const double cand = std::tanh(affine(cell.w_h, cell.b_h, rh, i));
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

}  // namespace

TEST(Gru, ZeroParametersHalveTheState) {
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 3, 4);
  Tape tape;
  const Binding bound(tape, params);
  const Matrix v{{1.0, -2.0, 0.5, 4.0}};
  const auto h = gru_step(bound, cell, tape.constant({{7.0, -3.0, 2.0}}), tape.constant(v));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(h.value(0, i), 0.5 * v.data[i]);
}

TEST(Gru, ZeroParametersKeepAZeroState) {
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 2, 3);
  Tape tape;
  const Binding bound(tape, params);
  const auto h = gru_step(bound, cell, tape.constant({{1.0, 2.0}}), tape.constant(Matrix(1, 3)));
  for (double value : h.values()) EXPECT_EQ(value, 0.0);
}

TEST(Gru, MatchesScalarOracle) {
  Rng rng(17);
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 3, 5);
  randomize(params, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_row(rng, 3, 2.0);
    const Matrix h = random_row(rng, 5);
    Tape tape;
    const Binding bound(tape, params, Binding::Mode::inference);
    const auto out = gru_step(bound, cell, tape.constant(x), tape.constant(h));
    const auto expected = gru_oracle(params, cell, x.data, h.data);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out.value(0, i), expected[i], 1e-14);
  }
}

TEST(Gru, BatchRowsAreIndependent) {
  Rng rng(2);
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 2, 3);
  randomize(params, rng);
  Matrix x(3, 2);
  Matrix h(3, 3);
  for (auto& v : x.data) v = rng.uniform(-1, 1);
  for (auto& v : h.data) v = rng.uniform(-1, 1);
  Tape tape;
  const Binding bound(tape, params, Binding::Mode::inference);
  const auto batched = gru_step(bound, cell, tape.constant(x), tape.constant(h));
  for (std::size_t r = 0; r < 3; ++r) {
    const auto row = gru_oracle(params, cell, {x(r, 0), x(r, 1)}, {h(r, 0), h(r, 1), h(r, 2)});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(batched.value(r, i), row[i], 1e-14);
  }
}

TEST(Gru, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 3, 4);
  randomize(params, rng);
  const Matrix x = random_row(rng, 3);
  const Matrix h = random_row(rng, 4);
  auto values = params.values();
  values.push_back(x);
  values.push_back(h);
  const auto report = diff::grad_check(values, {}, [&](Tape& tape, std::span<const DiffArray> leaves) {
    const Binding bound(tape, std::vector<DiffArray>(leaves.begin(), leaves.end() - 2));
    const auto out = gru_step(bound, cell, leaves[leaves.size() - 2], leaves.back());
    return diff::sum(diff::mul(out, out));
  });
  EXPECT_TRUE(report.passed) << report.max_rel_error;
  EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(Gru, DeterministicAndBounded) {
  Rng rng(9);
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 4, 6);
  randomize(params, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_row(rng, 4, 3.0);
    const Matrix h = random_row(rng, 6, 2.0);
    Tape t1;
    Tape t2;
    const auto a = gru_step(Binding(t1, params), cell, t1.constant(x), t1.constant(h)).to_matrix();
    const auto b = gru_step(Binding(t2, params), cell, t2.constant(x), t2.constant(h)).to_matrix();
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_LE(std::abs(a.data[i]), std::max(std::abs(h.data[i]), 1.0));
  }
}

TEST(Gru, ShapeMismatchIsADimensionError) {
  ParamSet params;
  const auto cell = GruCell::declare(params, "g", 3, 4);
  Tape tape;
  const Binding bound(tape, params);
  EXPECT_THROW(gru_step(bound, cell, tape.constant(Matrix(1, 2)), tape.constant(Matrix(1, 4))), DimensionError);
  EXPECT_THROW(gru_step(bound, cell, tape.constant(Matrix(1, 3)), tape.constant(Matrix(1, 5))), DimensionError);
}

TEST(Projection, ReluAndIdentity) {
  ParamSet params;
  const auto relu_proj = Projection::declare(params, "a", 2, 2, Activation::relu);
  const auto lin_proj = Projection::declare(params, "b", 2, 2, Activation::none);
  for (auto id : {relu_proj.weight, lin_proj.weight}) params[id].value = Matrix{{1, 0}, {0, -1}};
  for (auto id : {relu_proj.bias, lin_proj.bias}) params[id].value = Matrix{{0.5, 0.5}};
  Tape tape;
  const Binding bound(tape, params);
  const auto x = tape.constant({{2.0, 3.0}});
  EXPECT_EQ(project(bound, relu_proj, x).to_matrix(), (Matrix{{2.5, 0.0}}));
  EXPECT_EQ(project(bound, lin_proj, x).to_matrix(), (Matrix{{2.5, -2.5}}));
}

TEST(Mse, Examples) {
  Tape tape;
  EXPECT_EQ(mse_loss(tape.constant({{1.0, 2.0}}), Matrix{{1.0, 2.0}}).scalar(), 0.0);
  EXPECT_EQ(mse_loss(tape.constant({{1.0, 1.0}}), Matrix{{0.0, 0.0}}).scalar(), 1.0);
  const auto p = tape.variable(Matrix::scalar(2.0));
  tape.backward(mse_loss(p, Matrix::scalar(0.0)));
  EXPECT_EQ(p.adjoint_matrix().data[0], 4.0);
  EXPECT_THROW(mse_loss(tape.constant(Matrix(1, 2)), Matrix(1, 3)), DimensionError);
}

TEST(Adam, FirstStepFromZero) {
  ParamSet params;
  params.add_weight("w", 1, 1);
  AdamState state(params, {});
  adam_step(state, params, {Matrix::scalar(1.0)});
  EXPECT_NEAR(params[0].value.data[0], -5e-4 / (1.0 + 1e-8), 1e-18);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientFromRestIsTheIdentity) {
  Rng rng(3);
  ParamSet params;
  params.add_weight("w", 2, 3);
  params.add_bias("b", 3);
  randomize(params, rng);
  AdamState state(params, {});
  const ParamSet start = params;
  for (int i = 0; i < 10; ++i) adam_step(state, params, zeros_like(params));
  EXPECT_EQ(params, start);
  EXPECT_EQ(state.step, 10u);
}

// With a nonzero first moment, bias-corrected Adam keeps moving theta on
// zero gradients.
TEST(Adam, ZeroGradientAfterHistoryStillMoves) {
  ParamSet params;
  params.add_weight("w", 1, 1);
  AdamState state(params, {});
  adam_step(state, params, {Matrix::scalar(1.0)});
  const double after_one = params[0].value.data[0];
  adam_step(state, params, {Matrix::scalar(0.0)});
  EXPECT_LT(params[0].value.data[0], after_one);
}

TEST(Adam, IdenticalGradientsGiveIdenticalUpdates) {
  ParamSet params;
  params.add_weight("a", 2, 2);
  params.add_weight("b", 2, 2);
  AdamState state(params, {});
  Rng rng(12);
  for (int i = 0; i < 5; ++i) {
    Matrix g(2, 2);
    for (auto& v : g.data) v = rng.uniform(-1, 1);
    adam_step(state, params, {g, g});
  }
  EXPECT_EQ(params[0].value, params[1].value);
}

TEST(Adam, NonFiniteGradientNamesTheParameterAndChangesNothing) {
  ParamSet params;
  params.add_weight("first", 1, 2);
  params.add_weight("second", 1, 2);
  AdamState state(params, {});
  const ParamSet before = params;
  try {
    adam_step(state, params, {Matrix{{1.0, 1.0}}, Matrix{{std::numeric_limits<double>::quiet_NaN(), 0.0}}});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("second"), std::string::npos) << e.what();
  }
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 0u);
}

TEST(Init, UniformFanInWithZeroBiasesAndReproducible) {
  ParamSet a;
  a.add_weight("w", 16, 25);
  a.add_bias("b", 16);
  ParamSet b = a;
  init_params(a, 42);
  init_params(b, 42);
  EXPECT_EQ(a, b);
  const double bound = 1.0 / std::sqrt(25.0);
  double max_abs = 0.0;
  for (double v : a[0].value.data) {
    EXPECT_LE(std::abs(v), bound);
    max_abs = std::max(max_abs, std::abs(v));
  }
  EXPECT_GT(max_abs, 0.8 * bound);
  for (double v : a[1].value.data) EXPECT_EQ(v, 0.0);
  ParamSet c = a;
  init_params(c, 43);
  EXPECT_NE(c[0].value, a[0].value);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(1);
  ParamSet params;
  params.add_weight("layer.weight", 3, 4);
  params.add_bias("layer.bias", 3);
  randomize(params, rng);
  params[0].value.data[0] = 1e-300;
  params[0].value.data[1] = -0.0;
  std::stringstream buffer;
  write_params(buffer, params);
  const ParamSet back = read_params(buffer);
  EXPECT_EQ(back, params);
  EXPECT_TRUE(std::signbit(back[0].value.data[1]));
}

TEST(Checkpoint, HeaderLayout) {
  ParamSet params;
  params.add_bias("b", 2);
  params[0].value = Matrix{{1.0, 2.0}};
  std::stringstream buffer;
  write_params(buffer, params);
  const std::string bytes = buffer.str();
  // magic, version, count, name length + name, rank, dims, values
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 2 + 1 + 1 + 4 + 16);
  EXPECT_EQ(bytes.substr(0, 4), "FVLW");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[14], 'b');
  EXPECT_EQ(bytes[15], 1);
  EXPECT_EQ(bytes[16], 2);
}

TEST(Checkpoint, BadMagicAndTruncationAreFormatErrors) {
  std::stringstream bad("FVLX\x01\0\0\0");
  EXPECT_THROW(read_params(bad), FormatError);
  ParamSet params;
  params.add_weight("w", 2, 2);
  std::stringstream buffer;
  write_params(buffer, params);
  std::stringstream truncated(buffer.str().substr(0, buffer.str().size() - 3));
  EXPECT_THROW(read_params(truncated), FormatError);
}

TEST(Checkpoint, SaveAndLoadFile) {
  test::TempDir dir("ckpt");
  ParamSet params;
  params.add_weight("w", 2, 3);
  init_params(params, 5);
  save_params(dir.path() / "m.fvlw", params);
  EXPECT_EQ(load_params(dir.path() / "m.fvlw"), params);
  EXPECT_THROW(load_params(dir.path() / "missing.fvlw"), FormatError);
}
