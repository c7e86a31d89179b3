#include "fvl/nn/layers.hpp"

#include "fvl/common/error.hpp"

namespace fvl::nn {

using diff::DiffArray;

GruCell GruCell::declare(ParamSet& params, const std::string& prefix, std::size_t input_size,
                         std::size_t hidden_size) {
  if (input_size == 0 || hidden_size == 0) throw ValidationError("GRU sizes must be positive");
  GruCell cell;
  cell.input_size = input_size;
  cell.hidden_size = hidden_size;
  const std::size_t fan_in = input_size + hidden_size;
  cell.w_z = params.add_weight(prefix + ".w_z", hidden_size, fan_in);
  cell.w_r = params.add_weight(prefix + ".w_r", hidden_size, fan_in);
  cell.w_h = params.add_weight(prefix + ".w_h", hidden_size, fan_in);
  cell.b_z = params.add_bias(prefix + ".b_z", hidden_size);
  cell.b_r = params.add_bias(prefix + ".b_r", hidden_size);
  cell.b_h = params.add_bias(prefix + ".b_h", hidden_size);
  return cell;
}

DiffArray gru_step(const Binding& bound, const GruCell& cell, DiffArray x, DiffArray h_prev) {
  const auto sx = x.shape();
  const auto sh = h_prev.shape();
  if (sx.cols != cell.input_size || sh.cols != cell.hidden_size || sx.rows != sh.rows) {
    throw DimensionError("gru_step: input " + diff::to_string(sx) + " and state " +
                         diff::to_string(sh) + " do not fit a cell of input " +
                         std::to_string(cell.input_size) + ", hidden " +
                         std::to_string(cell.hidden_size));
  }
  const DiffArray xh = diff::concat_cols(x, h_prev);
  const DiffArray z = diff::sigmoid(diff::linear(xh, bound[cell.w_z], bound[cell.b_z]));
  const DiffArray r = diff::sigmoid(diff::linear(xh, bound[cell.w_r], bound[cell.b_r]));
  const DiffArray xrh = diff::concat_cols(x, diff::mul(r, h_prev));
  const DiffArray candidate = diff::tanh(diff::linear(xrh, bound[cell.w_h], bound[cell.b_h]));
  // (1 - z) h + z h~  ==  h + z (h~ - h)
  return diff::add(h_prev, diff::mul(z, diff::sub(candidate, h_prev)));
}

Projection Projection::declare(ParamSet& params, const std::string& prefix, std::size_t in_size,
                               std::size_t out_size, Activation activation) {
  if (in_size == 0 || out_size == 0) throw ValidationError("projection sizes must be positive");
  Projection p;
  p.in_size = in_size;
  p.out_size = out_size;
  p.activation = activation;
  p.weight = params.add_weight(prefix + ".weight", out_size, in_size);
  p.bias = params.add_bias(prefix + ".bias", out_size);
  return p;
}

DiffArray project(const Binding& bound, const Projection& projection, DiffArray x) {
  const DiffArray y = diff::linear(x, bound[projection.weight], bound[projection.bias]);
  return projection.activation == Activation::relu ? diff::relu(y) : y;
}

DiffArray mse_loss(DiffArray pred, const diff::Matrix& target) {
  const std::size_t n = target.size();
  if (n == 0) throw DimensionError("mse_loss on empty arrays");
  return diff::scale(diff::sum_squared_error(pred, target), 1.0 / static_cast<double>(n));
}

}  // namespace fvl::nn
