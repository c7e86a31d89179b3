#include "fvl/nn/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"

namespace fvl::nn {

ParamId ParamSet::add_weight(std::string name, std::size_t rows, std::size_t cols) {
  return add({std::move(name), diff::Matrix(rows, cols), 2});
}

ParamId ParamSet::add_bias(std::string name, std::size_t size) {
  return add({std::move(name), diff::Matrix(1, size), 1});
}

ParamId ParamSet::add(Parameter parameter) {
  for (const auto& p : items_) {
    if (p.name == parameter.name) throw ValidationError("duplicate parameter name " + p.name);
  }
  items_.push_back(std::move(parameter));
  return items_.size() - 1;
}

ParamId ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (items_[i].name == name) return i;
  throw ValidationError("no parameter named " + name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.value.size();
  return n;
}

std::vector<diff::Matrix> ParamSet::values() const {
  std::vector<diff::Matrix> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p.value);
  return out;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p.name);
  return out;
}

void ParamSet::assign_values(const std::vector<diff::Matrix>& values) {
  if (values.size() != items_.size()) throw DimensionError("parameter count mismatch");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (values[i].shape != items_[i].value.shape) {
      throw DimensionError("shape mismatch for " + items_[i].name + ": " +
                           diff::to_string(values[i].shape) + " vs " + diff::to_string(items_[i].value.shape));
    }
    items_[i].value = values[i];
  }
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& a = items_[i];
    const auto& b = other.items_[i];
    if (a.name != b.name || a.value.shape != b.value.shape || a.rank != b.rank) return false;
  }
  return true;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (items_[i].value.data != other.items_[i].value.data) return false;
  return true;
}

std::vector<diff::Matrix> zeros_like(const ParamSet& params) {
  std::vector<diff::Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.value.rows(), p.value.cols());
  return out;
}

void init_params(ParamSet& params, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params) {
    if (p.rank == 1) {
      std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.value.cols()));
    for (double& v : p.value.data) v = rng.uniform(-bound, bound);
  }
}

Binding::Binding(diff::Tape& tape, const ParamSet& params, Mode mode) : tape_(&tape) {
  leaves_.reserve(params.size());
  for (const auto& p : params) {
    leaves_.push_back(mode == Mode::train ? tape.variable(p.value) : tape.constant(p.value));
  }
}

Binding::Binding(diff::Tape& tape, std::vector<diff::DiffArray> leaves)
    : tape_(&tape), leaves_(std::move(leaves)) {
  for (const auto& leaf : leaves_) tape.check_owner(leaf);
}

std::vector<diff::Matrix> Binding::gradients() const {
  std::vector<diff::Matrix> out;
  out.reserve(leaves_.size());
  for (const auto& leaf : leaves_) out.push_back(leaf.adjoint_matrix());
  return out;
}

void Binding::accumulate_gradients(std::vector<diff::Matrix>& into) const {
  if (into.size() != leaves_.size()) throw DimensionError("gradient buffer count mismatch");
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const auto g = leaves_[i].adjoints();
    if (g.size() != into[i].size()) throw DimensionError("gradient buffer shape mismatch");
    for (std::size_t k = 0; k < g.size(); ++k) into[i].data[k] += g[k];
  }
}

}  // namespace fvl::nn
