#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace fvl::diff {

// Every array in the library is rank 2. Vectors are 1 x n rows; a batch of
// vectors stacks them as rows.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool is_scalar() const { return rows == 1 && cols == 1; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape shape);

// Row-major dense block of 64-bit reals.
struct Matrix {
  Shape shape;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, data(rows * cols, fill) {}
  Matrix(Shape s, std::vector<double> values);

  // Nested initializer: {{1, 2}, {3, 4}}. All rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix row(std::vector<double> values);
  static Matrix scalar(double value) { return Matrix(1, 1, value); }

  std::size_t rows() const { return shape.rows; }
  std::size_t cols() const { return shape.cols; }
  std::size_t size() const { return data.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data[r * shape.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * shape.cols + c]; }

  bool operator==(const Matrix&) const = default;
};

}  // namespace fvl::diff
