#include "pathx/matrix.hpp"

#include <algorithm>
#include <tuple>

namespace pathx {

SparseMatrix SparseMatrix::from_triplets(
    int rows, int cols, std::vector<std::tuple<int, int, double>> triplets) {
  // sort by (col, row); duplicates are not expected and are rejected
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<1>(a), std::get<0>(a)) <
                     std::tie(std::get<1>(b), std::get<0>(b));
            });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.col_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
  m.row_idx.reserve(triplets.size());
  m.values.reserve(triplets.size());
  int prev_col = -1, prev_row = -1;
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw DimensionError("sparse triplet out of range");
    if (c == prev_col && r == prev_row)
      throw DimensionError("duplicate sparse entry");
    prev_col = c;
    prev_row = r;
    m.col_ptr[static_cast<std::size_t>(c) + 1]++;
    m.row_idx.push_back(r);
    m.values.push_back(v);
  }
  for (int c = 0; c < cols; ++c) m.col_ptr[c + 1] += m.col_ptr[c];
  return m;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.col_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  t.row_idx.resize(row_idx.size());
  t.values.resize(values.size());
  for (int r : row_idx) t.col_ptr[static_cast<std::size_t>(r) + 1]++;
  for (int c = 0; c < t.cols; ++c) t.col_ptr[c + 1] += t.col_ptr[c];
  std::vector<int> next(t.col_ptr.begin(), t.col_ptr.end() - 1);
  // walking columns in order keeps the transposed row indices sorted
  for (int c = 0; c < cols; ++c) {
    for (int k = col_ptr[c]; k < col_ptr[c + 1]; ++k) {
      int pos = next[row_idx[k]]++;
      t.row_idx[pos] = c;
      t.values[pos] = values[k];
    }
  }
  return t;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int k = col_ptr[c]; k < col_ptr[c + 1]; ++k) d(row_idx[k], c) = values[k];
  return d;
}

}  // namespace pathx
