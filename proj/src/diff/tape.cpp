#include "fvl/diff/tape.hpp"

#include <algorithm>
#include <string>

#include "fvl/common/error.hpp"

namespace fvl::diff {

std::string to_string(Shape shape) {
  return "[" + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) + "]";
}

Matrix::Matrix(Shape s, std::vector<double> values) : shape(s), data(std::move(values)) {
  if (data.size() != shape.size()) {
    throw DimensionError("matrix data length " + std::to_string(data.size()) +
                         " does not match shape " + to_string(shape));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  shape.rows = rows.size();
  shape.cols = rows.size() == 0 ? 0 : rows.begin()->size();
  data.reserve(shape.size());
  for (const auto& row : rows) {
    if (row.size() != shape.cols) throw DimensionError("ragged matrix initializer");
    data.insert(data.end(), row.begin(), row.end());
  }
}

Matrix Matrix::row(std::vector<double> values) {
  const Shape s{1, values.size()};
  return Matrix(s, std::move(values));
}

Shape DiffArray::shape() const { return tape_->shape(id_); }
std::span<const double> DiffArray::values() const { return tape_->values(id_); }
std::span<const double> DiffArray::adjoints() const {
  return static_cast<const Tape*>(tape_)->adjoints(id_);
}
double DiffArray::value(std::size_t r, std::size_t c) const {
  return values()[r * shape().cols + c];
}
double DiffArray::scalar() const {
  if (!shape().is_scalar()) {
    throw DimensionError("scalar() on array of shape " + to_string(shape()));
  }
  return values()[0];
}
Matrix DiffArray::to_matrix() const {
  const auto v = values();
  return Matrix(shape(), std::vector<double>(v.begin(), v.end()));
}
Matrix DiffArray::adjoint_matrix() const {
  const auto g = adjoints();
  return Matrix(shape(), std::vector<double>(g.begin(), g.end()));
}
bool DiffArray::requires_grad() const { return tape_->requires_grad(id_); }

DiffArray Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return DiffArray(this, nodes_.size() - 1);
}

DiffArray Tape::constant(Matrix value) {
  Node node;
  node.shape = value.shape;
  node.adjoint.assign(value.size(), 0.0);
  node.value = std::move(value.data);
  node.leaf = true;
  return push(std::move(node));
}

DiffArray Tape::variable(Matrix value) {
  Node node;
  node.shape = value.shape;
  node.adjoint.assign(value.size(), 0.0);
  node.value = std::move(value.data);
  node.leaf = true;
  node.requires_grad = true;
  return push(std::move(node));
}

DiffArray Tape::record(Shape shape, std::vector<double> values,
                       std::initializer_list<DiffArray> inputs, BackwardFn backward) {
  Node node;
  node.shape = shape;
  if (values.size() != shape.size()) {
    throw DimensionError("recorded value length does not match shape " + to_string(shape));
  }
  node.value = std::move(values);
  node.adjoint.assign(shape.size(), 0.0);
  for (const auto& input : inputs) {
    check_owner(input);
    node.requires_grad = node.requires_grad || nodes_[input.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

void Tape::check_owner(const DiffArray& array) const {
  if (array.tape() != this || array.id() >= nodes_.size()) {
    throw ContractError("array does not belong to the current tape");
  }
}

void Tape::backward(DiffArray loss) {
  check_owner(loss);
  if (!shape(loss.id()).is_scalar()) {
    throw ContractError("backward needs a scalar loss, got shape " + to_string(shape(loss.id())));
  }
  const std::size_t last = loss.id();
  for (std::size_t i = 0; i <= last; ++i) {
    if (!nodes_[i].leaf) std::fill(nodes_[i].adjoint.begin(), nodes_[i].adjoint.end(), 0.0);
  }
  nodes_[last].adjoint[0] += 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.requires_grad && node.backward) node.backward(*this, i);
  }
}

void Tape::reset() {
  for (auto& node : nodes_) std::fill(node.adjoint.begin(), node.adjoint.end(), 0.0);
}

void Tape::clear() {
  nodes_.clear();
  kink_pattern_.clear();
}

void Tape::record_kinks(std::span<const double> inputs) {
  if (!track_kinks_) return;
  for (double x : inputs) kink_pattern_.push_back(x > 0.0 ? 1 : 0);
}

}  // namespace fvl::diff
