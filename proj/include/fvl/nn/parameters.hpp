#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fvl/diff/matrix.hpp"
#include "fvl/diff/tape.hpp"

namespace fvl::nn {

using ParamId = std::size_t;

struct Parameter {
  std::string name;
  diff::Matrix value;
  // 1 for bias vectors (stored as 1 x n), 2 for weight matrices. Only affects
  // how the shape is written to checkpoints and which init rule applies.
  std::uint8_t rank = 2;
};

// Ordered, named collection of learnable arrays. Declaration order fixes the
// checkpoint layout and the order in which init_params draws random numbers.
class ParamSet {
 public:
  ParamId add_weight(std::string name, std::size_t rows, std::size_t cols);
  ParamId add_bias(std::string name, std::size_t size);
  ParamId add(Parameter parameter);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  Parameter& operator[](ParamId id) { return items_[id]; }
  const Parameter& operator[](ParamId id) const { return items_[id]; }

  // Throws ValidationError when no parameter has that name.
  ParamId find(const std::string& name) const;

  std::size_t scalar_count() const;
  std::vector<diff::Matrix> values() const;
  std::vector<std::string> names() const;
  void assign_values(const std::vector<diff::Matrix>& values);
  // Same names, same shapes, same order.
  bool same_layout(const ParamSet& other) const;

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<Parameter> items_;
};

// Zero-filled arrays shaped like each parameter of `params`.
std::vector<diff::Matrix> zeros_like(const ParamSet& params);

// Weights ~ U[-1/sqrt(fan_in), +1/sqrt(fan_in)] with fan_in = cols, biases 0.
// Draws from fvl::Rng(seed) in declaration order.
void init_params(ParamSet& params, std::uint64_t seed);

// Parameters placed on a tape, either as gradient-carrying variables or as
// constants for inference.
class Binding {
 public:
  enum class Mode { train, inference };

  Binding(diff::Tape& tape, const ParamSet& params, Mode mode = Mode::train);
  // Leaf arrays supplied by the caller, e.g. from a gradient checker.
  Binding(diff::Tape& tape, std::vector<diff::DiffArray> leaves);

  diff::DiffArray operator[](ParamId id) const { return leaves_[id]; }
  diff::Tape& tape() const { return *tape_; }
  std::size_t size() const { return leaves_.size(); }

  // Current adjoints of every bound parameter, in declaration order.
  std::vector<diff::Matrix> gradients() const;
  // Adds current adjoints into `into`, which must match in shapes.
  void accumulate_gradients(std::vector<diff::Matrix>& into) const;

 private:
  diff::Tape* tape_;
  std::vector<diff::DiffArray> leaves_;
};

}  // namespace fvl::nn
