#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xlene {

// Dense row-major matrix. Vectors are stored as (n x 1).
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(std::size_t r, std::size_t c) const { return rows == r && cols == c; }

  template <typename U>
  static Matrix like(const Matrix<U>& other) {
    return Matrix(other.rows, other.cols);
  }

  bool operator==(const Matrix&) const = default;
};

}  // namespace xlene
