#include "bgcn/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace bgcn {

namespace {
std::atomic<bool> g_runtime_checks{true};

[[noreturn]] void throw_shape(const std::string& what) {
  throw ShapeError("shape error: " + what);
}
}  // namespace

void set_runtime_checks(bool enabled) { g_runtime_checks.store(enabled); }
bool runtime_checks() { return g_runtime_checks.load(); }

void check_finite(const DenseMatrix& m, std::string_view name) {
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (!std::isfinite(m.data[i])) {
      throw Error("non-finite value in " + std::string(name) + " at flat index " +
                  std::to_string(i));
    }
  }
}

void check_finite(const SparseMatrix& m, std::string_view name) {
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (!std::isfinite(m.values[i])) {
      throw Error("non-finite value in " + std::string(name) + " at nnz index " +
                  std::to_string(i));
    }
  }
}

SparseMatrix SparseMatrix::from_pairs(index_t rows, index_t cols,
                                      std::span<const IdPair> pairs,
                                      index_t* dup_count) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [r, c] = pairs[i];
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw IndexError("pair " + std::to_string(i) + " = (" + std::to_string(r) +
                       ", " + std::to_string(c) + ") out of range for " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::vector<IdPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto last = std::unique(sorted.begin(), sorted.end());
  if (dup_count != nullptr) {
    *dup_count = static_cast<index_t>(std::distance(last, sorted.end()));
  }
  sorted.erase(last, sorted.end());

  SparseMatrix m(rows, cols);
  m.col_idx.reserve(sorted.size());
  m.values.assign(sorted.size(), 1.0);
  std::size_t k = 0;
  for (index_t r = 0; r < rows; ++r) {
    while (k < sorted.size() && sorted[k].first == r) {
      m.col_idx.push_back(sorted[k].second);
      ++k;
    }
    m.row_ptr[static_cast<std::size_t>(r) + 1] =
        static_cast<index_t>(m.col_idx.size());
  }
  return m;
}

void SparseMatrix::validate() const {
  if (static_cast<index_t>(row_ptr.size()) != rows + 1) {
    throw_shape("row_ptr length != rows + 1");
  }
  if (row_ptr.front() != 0 || row_ptr.back() != nnz()) {
    throw_shape("row_ptr endpoints inconsistent with nnz");
  }
  if (col_idx.size() != values.size()) {
    throw_shape("col_idx and values lengths differ");
  }
  for (index_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw_shape("row_ptr not nondecreasing");
    for (index_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_idx[k] < 0 || col_idx[k] >= cols) throw_shape("column index out of range");
      if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
        throw_shape("column indices not strictly increasing within a row");
      }
    }
  }
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) {
    throw_shape("spmm: a is " + std::to_string(a.rows) + "x" +
                std::to_string(a.cols) + " but b has " + std::to_string(b.rows) +
                " rows");
  }
  if (runtime_checks()) {
    check_finite(a, "spmm lhs");
    check_finite(b, "spmm rhs");
  }
  DenseMatrix out(a.rows, b.cols);
  for (index_t r = 0; r < a.rows; ++r) {
    double* dst = out.data.data() + r * out.cols;
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.values[k];
      const double* src = b.data.data() + a.col_idx[k] * b.cols;
      for (index_t j = 0; j < b.cols; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix leaky_relu(const DenseMatrix& x, double slope) {
  if (slope < 0.0 || slope > 1.0) {
    throw Error("leaky_relu slope must be in [0, 1]");
  }
  if (runtime_checks()) check_finite(x, "leaky_relu input");
  DenseMatrix out(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    out.data[i] = v > 0.0 ? v : slope * v;
  }
  return out;
}

DenseMatrix leaky_relu_backward(const DenseMatrix& pre,
                                const DenseMatrix& upstream, double slope) {
  if (!pre.same_shape(upstream)) throw_shape("leaky_relu_backward shapes differ");
  DenseMatrix out(pre.rows, pre.cols);
  for (std::size_t i = 0; i < pre.data.size(); ++i) {
    out.data[i] = upstream.data[i] * (pre.data[i] > 0.0 ? 1.0 : slope);
  }
  return out;
}

DenseMatrix concat_rows(std::span<const DenseMatrix> layers) {
  if (layers.empty()) return {};
  const index_t rows = layers[0].rows;
  index_t cols = 0;
  for (const auto& l : layers) {
    if (l.rows != rows) throw_shape("concat_rows: row counts differ");
    cols += l.cols;
  }
  DenseMatrix out(rows, cols);
  for (index_t r = 0; r < rows; ++r) {
    double* dst = out.data.data() + r * cols;
    for (const auto& l : layers) {
      const double* src = l.data.data() + r * l.cols;
      std::copy(src, src + l.cols, dst);
      dst += l.cols;
    }
  }
  return out;
}

DenseMatrix make_dropout_mask(index_t rows, index_t cols, double rate,
                              Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout rate must be in [0, 1)");
  DenseMatrix mask(rows, cols, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.data) v = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

DenseMatrix matmul(const DenseMatrix& a, Trans ta, const DenseMatrix& b,
                   Trans tb) {
  const index_t am = ta == Trans::N ? a.rows : a.cols;
  const index_t ak = ta == Trans::N ? a.cols : a.rows;
  const index_t bk = tb == Trans::N ? b.rows : b.cols;
  const index_t bn = tb == Trans::N ? b.cols : b.rows;
  if (ak != bk) {
    throw_shape("matmul: inner dimensions " + std::to_string(ak) + " and " +
                std::to_string(bk) + " differ");
  }
  DenseMatrix out(am, bn);
  if (ta == Trans::N && tb == Trans::N) {
    for (index_t i = 0; i < am; ++i) {
      double* dst = out.data.data() + i * bn;
      for (index_t k = 0; k < ak; ++k) {
        const double v = a(i, k);
        const double* src = b.data.data() + k * bn;
        for (index_t j = 0; j < bn; ++j) dst[j] += v * src[j];
      }
    }
  } else if (ta == Trans::T && tb == Trans::N) {
    for (index_t k = 0; k < bk; ++k) {
      const double* arow = a.data.data() + k * a.cols;
      const double* brow = b.data.data() + k * bn;
      for (index_t i = 0; i < am; ++i) {
        const double v = arow[i];
        double* dst = out.data.data() + i * bn;
        for (index_t j = 0; j < bn; ++j) dst[j] += v * brow[j];
      }
    }
  } else if (ta == Trans::N && tb == Trans::T) {
    for (index_t i = 0; i < am; ++i) {
      const double* arow = a.data.data() + i * a.cols;
      double* dst = out.data.data() + i * bn;
      for (index_t j = 0; j < bn; ++j) {
        const double* brow = b.data.data() + j * b.cols;
        double acc = 0.0;
        for (index_t k = 0; k < ak; ++k) acc += arow[k] * brow[k];
        dst[j] = acc;
      }
    }
  } else {
    // (A^T B^T) = (B A)^T; rare path, compute directly.
    for (index_t i = 0; i < am; ++i) {
      for (index_t j = 0; j < bn; ++j) {
        double acc = 0.0;
        for (index_t k = 0; k < ak; ++k) acc += a(k, i) * b(j, k);
        out(i, j) = acc;
      }
    }
  }
  return out;
}

void add_inplace(DenseMatrix& y, const DenseMatrix& x) {
  if (!y.same_shape(x)) throw_shape("add_inplace shapes differ");
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
}

void axpy_inplace(DenseMatrix& y, double a, const DenseMatrix& x) {
  if (!y.same_shape(x)) throw_shape("axpy_inplace shapes differ");
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

void scale_inplace(DenseMatrix& y, double a) {
  for (auto& v : y.data) v *= a;
}

void hadamard_inplace(DenseMatrix& y, const DenseMatrix& x) {
  if (!y.same_shape(x)) throw_shape("hadamard_inplace shapes differ");
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= x.data[i];
}

void add_bias_inplace(DenseMatrix& y, const DenseMatrix& bias) {
  if (bias.rows != 1 || bias.cols != y.cols) {
    throw_shape("add_bias_inplace: bias must be 1x" + std::to_string(y.cols));
  }
  for (index_t i = 0; i < y.rows; ++i) {
    double* dst = y.data.data() + i * y.cols;
    for (index_t j = 0; j < y.cols; ++j) dst[j] += bias.data[j];
  }
}

DenseMatrix col_sums(const DenseMatrix& x) {
  DenseMatrix out(1, x.cols);
  for (index_t i = 0; i < x.rows; ++i) {
    const double* src = x.data.data() + i * x.cols;
    for (index_t j = 0; j < x.cols; ++j) out.data[j] += src[j];
  }
  return out;
}

double dot_rows(const DenseMatrix& a, index_t i, const DenseMatrix& b,
                index_t j) {
  if (a.cols != b.cols) throw_shape("dot_rows: widths differ");
  const double* x = a.data.data() + i * a.cols;
  const double* y = b.data.data() + j * b.cols;
  double acc = 0.0;
  for (index_t k = 0; k < a.cols; ++k) acc += x[k] * y[k];
  return acc;
}

double norm_sq(const DenseMatrix& x) {
  double acc = 0.0;
  for (double v : x.data) acc += v * v;
  return acc;
}

DenseMatrix slice_cols(const DenseMatrix& x, index_t c0, index_t c1) {
  if (c0 < 0 || c1 > x.cols || c0 > c1) throw_shape("slice_cols range invalid");
  DenseMatrix out(x.rows, c1 - c0);
  for (index_t i = 0; i < x.rows; ++i) {
    const double* src = x.data.data() + i * x.cols + c0;
    std::copy(src, src + (c1 - c0), out.data.data() + i * out.cols);
  }
  return out;
}

SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix t(a.cols, a.rows);
  std::vector<index_t> counts(static_cast<std::size_t>(a.cols), 0);
  for (index_t c : a.col_idx) ++counts[c];
  for (index_t c = 0; c < a.cols; ++c) {
    t.row_ptr[c + 1] = t.row_ptr[c] + counts[c];
  }
  t.col_idx.resize(a.col_idx.size());
  t.values.resize(a.values.size());
  std::vector<index_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (index_t r = 0; r < a.rows; ++r) {
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const index_t c = a.col_idx[k];
      t.col_idx[fill[c]] = r;
      t.values[fill[c]] = a.values[k];
      ++fill[c];
    }
  }
  return t;
}

SparseMatrix row_normalized(const SparseMatrix& a) {
  SparseMatrix out = a;
  for (index_t r = 0; r < a.rows; ++r) {
    double sum = 0.0;
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) sum += a.values[k];
    if (sum == 0.0) continue;
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      out.values[k] = a.values[k] / sum;
    }
  }
  return out;
}

DenseMatrix densify(const SparseMatrix& a) {
  DenseMatrix out(a.rows, a.cols);
  for (index_t r = 0; r < a.rows; ++r) {
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      out(r, a.col_idx[k]) = a.values[k];
    }
  }
  return out;
}

SparseMatrix drop_rows(const SparseMatrix& a,
                       std::span<const std::uint8_t> dropped) {
  if (static_cast<index_t>(dropped.size()) != a.rows) {
    throw_shape("drop_rows: mask length != rows");
  }
  SparseMatrix out = a;
  for (index_t r = 0; r < a.rows; ++r) {
    if (!dropped[r]) continue;
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) out.values[k] = 0.0;
  }
  return out;
}

}  // namespace bgcn
