#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bgcn/error.hpp"
#include "bgcn/rng.hpp"

namespace bgcn {

using index_t = std::int64_t;
using IdPair = std::pair<index_t, index_t>;

// Row-major dense matrix of 64-bit floats.
struct DenseMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(index_t r, index_t c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r * c), fill) {}

  double& operator()(index_t i, index_t j) {
    return data[static_cast<std::size_t>(i * cols + j)];
  }
  double operator()(index_t i, index_t j) const {
    return data[static_cast<std::size_t>(i * cols + j)];
  }

  std::span<double> row(index_t i) {
    return {data.data() + i * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(index_t i) const {
    return {data.data() + i * cols, static_cast<std::size_t>(cols)};
  }

  index_t size() const { return rows * cols; }
  bool same_shape(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool empty() const { return rows == 0 || cols == 0; }
  void fill(double v) { data.assign(data.size(), v); }
};

// CSR sparse matrix. row_ptr has rows+1 entries; column indices are strictly
// increasing within each row.
struct SparseMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptr;
  std::vector<index_t> col_idx;
  std::vector<double> values;

  SparseMatrix() = default;
  SparseMatrix(index_t r, index_t c)
      : rows(r), cols(c), row_ptr(static_cast<std::size_t>(r) + 1, 0) {}

  // Builds a binary CSR from (row, col) pairs; duplicates collapse to one
  // entry. Out-of-range ids throw IndexError. dup_count, when given, receives
  // the number of collapsed duplicates.
  static SparseMatrix from_pairs(index_t rows, index_t cols,
                                 std::span<const IdPair> pairs,
                                 index_t* dup_count = nullptr);

  index_t nnz() const { return static_cast<index_t>(col_idx.size()); }
  index_t row_degree(index_t r) const { return row_ptr[r + 1] - row_ptr[r]; }

  std::span<const index_t> row_cols(index_t r) const {
    return {col_idx.data() + row_ptr[r],
            static_cast<std::size_t>(row_ptr[r + 1] - row_ptr[r])};
  }
  std::span<const double> row_vals(index_t r) const {
    return {values.data() + row_ptr[r],
            static_cast<std::size_t>(row_ptr[r + 1] - row_ptr[r])};
  }

  // Checks the CSR structural invariants; throws ShapeError on violation.
  void validate() const;
};

// Toggle for NaN/Inf input validation inside the numeric kernels. On by
// default; heavy production loops may switch it off.
void set_runtime_checks(bool enabled);
bool runtime_checks();

// Throws Error if any entry is non-finite. Unconditional when called; the
// kernels below call it only while runtime checks are enabled.
void check_finite(const DenseMatrix& m, std::string_view name);
void check_finite(const SparseMatrix& m, std::string_view name);

// out[r] = sum_k a[r,k] * b[k]; empty rows of a yield zero rows.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

// Elementwise max(x, slope * x).
DenseMatrix leaky_relu(const DenseMatrix& x, double slope);

// upstream .* d/dx leaky_relu evaluated at preactivation `pre`.
DenseMatrix leaky_relu_backward(const DenseMatrix& pre,
                                const DenseMatrix& upstream, double slope);

// Concatenates layer matrices along columns; block order follows input order.
DenseMatrix concat_rows(std::span<const DenseMatrix> layers);

// Inverted-scaling dropout mask: entries are 0 with probability `rate`,
// otherwise 1/(1-rate), so the expected value of each entry is 1.
DenseMatrix make_dropout_mask(index_t rows, index_t cols, double rate,
                              Rng& rng);

enum class Trans { N, T };

DenseMatrix matmul(const DenseMatrix& a, Trans ta, const DenseMatrix& b,
                   Trans tb);
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  return matmul(a, Trans::N, b, Trans::N);
}

void add_inplace(DenseMatrix& y, const DenseMatrix& x);
void axpy_inplace(DenseMatrix& y, double a, const DenseMatrix& x);
void scale_inplace(DenseMatrix& y, double a);
void hadamard_inplace(DenseMatrix& y, const DenseMatrix& x);
// Adds a 1 x d bias row to every row of y.
void add_bias_inplace(DenseMatrix& y, const DenseMatrix& bias);
DenseMatrix col_sums(const DenseMatrix& x);
double dot_rows(const DenseMatrix& a, index_t i, const DenseMatrix& b,
                index_t j);
double norm_sq(const DenseMatrix& x);
DenseMatrix slice_cols(const DenseMatrix& x, index_t c0, index_t c1);

SparseMatrix transpose(const SparseMatrix& a);
// Each nonzero becomes value/rowsum; all-zero rows stay all-zero.
SparseMatrix row_normalized(const SparseMatrix& a);
DenseMatrix densify(const SparseMatrix& a);
// Copy of `a` with the values of the flagged rows set to zero (structure
// kept); used for node dropout.
SparseMatrix drop_rows(const SparseMatrix& a,
                       std::span<const std::uint8_t> dropped);

}  // namespace bgcn
