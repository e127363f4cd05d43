#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pathx/types.hpp"

namespace pathx {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  std::span<double> row(int r) {
    return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)};
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Compressed sparse-column matrix. Canonical form: row indices strictly
/// increasing within each column. Equality is structural, which makes
/// exact round-trip checks meaningful.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_ptr;    // size cols + 1
  std::vector<int> row_idx;    // size nnz
  std::vector<double> values;  // size nnz

  int nnz() const { return static_cast<int>(row_idx.size()); }

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<std::tuple<int, int, double>> triplets);

  SparseMatrix transposed() const;
  Matrix to_dense() const;

  bool operator==(const SparseMatrix&) const = default;
};

}  // namespace pathx
