#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace rwseg {

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col;
  std::vector<double> val;

  std::size_t nnz() const noexcept { return val.size(); }

  /// Entry (i, j), or 0 when not stored.
  double at(std::size_t i, std::size_t j) const {
    auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return val[static_cast<std::size_t>(it - col.begin())];
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == cols && y.size() == rows);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += val[k] * x[col[k]];
      y[i] = acc;
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(rows);
    multiply(x, y);
    return y;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(std::min(rows, cols), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
  }

  /// Row-major dense copy.
  std::vector<double> to_dense() const {
    std::vector<double> dense(rows * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) dense[i * cols + col[k]] = val[k];
    return dense;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

}  // namespace rwseg
