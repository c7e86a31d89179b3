#pragma once

#include <string>

#include "fvl/diff/ops.hpp"
#include "fvl/nn/parameters.hpp"

namespace fvl::nn {

// Gated recurrent unit, reset gate applied to the previous state before the
// candidate projection:
//   z  = sigmoid(W_z [x; h] + b_z)
//   r  = sigmoid(W_r [x; h] + b_r)
//   h~ = tanh(W_h [x; r*h] + b_h)
//   h' = (1 - z) * h + z * h~
// Each W is [hidden x (input + hidden)].
struct GruCell {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  ParamId w_z = 0, w_r = 0, w_h = 0;
  ParamId b_z = 0, b_r = 0, b_h = 0;

  static GruCell declare(ParamSet& params, const std::string& prefix, std::size_t input_size,
                         std::size_t hidden_size);
};

// x [B x input], h_prev [B x hidden] -> [B x hidden]
diff::DiffArray gru_step(const Binding& bound, const GruCell& cell, diff::DiffArray x,
                         diff::DiffArray h_prev);

enum class Activation { none, relu };

struct Projection {
  std::size_t in_size = 0;
  std::size_t out_size = 0;
  Activation activation = Activation::relu;
  ParamId weight = 0, bias = 0;

  static Projection declare(ParamSet& params, const std::string& prefix, std::size_t in_size,
                            std::size_t out_size, Activation activation);
};

// x [B x in] -> [B x out]
diff::DiffArray project(const Binding& bound, const Projection& projection, diff::DiffArray x);

// Mean of squared differences over every element.
diff::DiffArray mse_loss(diff::DiffArray pred, const diff::Matrix& target);

}  // namespace fvl::nn
