#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fvl/diff/matrix.hpp"

namespace fvl::diff {

class Tape;

// Handle to one node on a Tape: its values, adjoints and node id. Cheap to
// copy; valid until the owning tape is cleared.
class DiffArray {
 public:
  DiffArray() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  Shape shape() const;
  std::span<const double> values() const;
  std::span<const double> adjoints() const;
  double value(std::size_t r, std::size_t c) const;
  // Value of a 1 x 1 array.
  double scalar() const;
  Matrix to_matrix() const;
  Matrix adjoint_matrix() const;
  bool requires_grad() const;

 private:
  friend class Tape;
  DiffArray(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Dynamic reverse-mode tape. Operations append nodes in evaluation order;
// backward() walks them in reverse. Confined to a single thread.
class Tape {
 public:
  // Called once per node during backward. Reads the node's adjoint and adds
  // into the adjoints of its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf without gradient.
  DiffArray constant(Matrix value);
  // Leaf whose adjoint accumulates across backward() calls until reset().
  DiffArray variable(Matrix value);

  // Appends an interior node. `inputs` decide whether the node needs a
  // gradient; `backward` may be empty for nodes that cannot propagate.
  DiffArray record(Shape shape, std::vector<double> values,
                   std::initializer_list<DiffArray> inputs, BackwardFn backward);

  // Populates adjoints of every node reachable from `loss`. Interior adjoints
  // are recomputed from scratch; leaf adjoints accumulate.
  void backward(DiffArray loss);

  // Zeroes every adjoint. Nodes stay recorded.
  void reset();
  // Drops every node. Outstanding DiffArray handles become dangling.
  void clear();

  std::size_t size() const { return nodes_.size(); }

  // While enabled, relu records the sign pattern of its inputs so finite
  // difference checks can detect perturbations that cross a kink.
  void set_kink_tracking(bool enabled) { track_kinks_ = enabled; }
  bool kink_tracking() const { return track_kinks_; }
  void record_kinks(std::span<const double> inputs);
  const std::vector<std::uint8_t>& kink_pattern() const { return kink_pattern_; }

  Shape shape(std::size_t id) const { return nodes_[id].shape; }
  std::span<const double> values(std::size_t id) const { return nodes_[id].value; }
  std::span<double> adjoints(std::size_t id) { return nodes_[id].adjoint; }
  std::span<const double> adjoints(std::size_t id) const { return nodes_[id].adjoint; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Throws ContractError unless `array` lives on this tape.
  void check_owner(const DiffArray& array) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> adjoint;
    BackwardFn backward;
    bool leaf = false;
    bool requires_grad = false;
  };

  DiffArray push(Node node);

  std::vector<Node> nodes_;
  bool track_kinks_ = false;
  std::vector<std::uint8_t> kink_pattern_;
};

}  // namespace fvl::diff
