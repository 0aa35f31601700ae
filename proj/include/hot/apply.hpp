// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "hot/masked_tensor.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {

// Per-row transform f: value-row -> value-row. All rows must map to the same
// output length.
template <typename T>
using RowFn = std::function<std::vector<T>(std::span<const T>)>;

// Matrix-level transform acting row-independently; the fast path for neural
// layers where the whole (rows x d) block goes through one call.
template <typename T>
using BlockFn = std::function<RowMatrix<T>(const RowMatrix<T>&)>;

namespace detail {

template <typename T>
RowMatrix<T> map_rows(const RowMatrix<T>& in, const RowFn<T>& f) {
  Index out_cols = -1;
  RowMatrix<T> out;
  for (Index r = 0; r < in.rows; ++r) {
    std::vector<T> mapped = f(in.row(r));
    if (out_cols < 0) {
      out_cols = static_cast<Index>(mapped.size());
      out = RowMatrix<T>(in.rows, out_cols);
    } else if (static_cast<Index>(mapped.size()) != out_cols) {
      throw ShapeError("tuplewise function output length varies across rows");
    }
    std::copy(mapped.begin(), mapped.end(), out.row(r).begin());
  }
  if (in.rows == 0) out = RowMatrix<T>(0, in.cols);
  return out;
}

}  // namespace detail

template <typename T>
SparseTensor<T> tuplewise_apply(const SparseTensor<T>& t, const RowFn<T>& f) {
  RowMatrix<T> out = detail::map_rows(t.values(), f);
  Shape dshape = out.cols == t.width() ? t.dense_shape() : Shape{out.cols};
  return t.with_values(std::move(dshape), std::move(out));
}

template <typename T>
SparseTensor<T> tuplewise_apply(const SparseTensor<T>& t, const BlockFn<T>& f) {
  RowMatrix<T> out = f(t.values());
  if (out.rows != t.nnz()) throw ShapeError("tuplewise block function changed row count");
  Shape dshape = out.cols == t.width() ? t.dense_shape() : Shape{out.cols};
  return t.with_values(std::move(dshape), std::move(out));
}

template <typename T>
MaskedTensor<T> tuplewise_apply(const MaskedTensor<T>& t, const RowFn<T>& f) {
  RowMatrix<T> in(t.positions(), t.width(), t.data());
  RowMatrix<T> out = detail::map_rows(in, f);
  Shape dshape = out.cols == t.width() ? t.dense_shape() : Shape{out.cols};
  return MaskedTensor<T>(t.masked_shape(), std::move(dshape), std::move(out.v), t.mask());
}

template <typename T>
MaskedTensor<T> tuplewise_apply(const MaskedTensor<T>& t, const BlockFn<T>& f) {
  RowMatrix<T> in(t.positions(), t.width(), t.data());
  RowMatrix<T> out = f(in);
  if (out.rows != t.positions()) throw ShapeError("tuplewise block function changed row count");
  Shape dshape = out.cols == t.width() ? t.dense_shape() : Shape{out.cols};
  return MaskedTensor<T>(t.masked_shape(), std::move(dshape), std::move(out.v), t.mask());
}

// Applies f only to entries whose first two indices coincide (i == j);
// everything else passes through unchanged. Output row width must not change.
template <typename T>
SparseTensor<T> diagonal_apply(const SparseTensor<T>& t, const RowFn<T>& f) {
  if (t.sparse_dim() < 2) throw RankError("diagonal_apply requires sparse_dim >= 2");
  RowMatrix<T> vals = t.values();
  for (Index e = 0; e < t.nnz(); ++e) {
    if (t.index(e, 0) == t.index(e, 1)) {
      std::vector<T> mapped = f(t.value_row(e));
      if (static_cast<Index>(mapped.size()) != t.width())
        throw ShapeError("diagonal_apply must preserve the dense shape");
      std::copy(mapped.begin(), mapped.end(), vals.row(e).begin());
    }
  }
  return t.with_values(t.dense_shape(), std::move(vals));
}

template <typename T>
MaskedTensor<T> diagonal_apply(const MaskedTensor<T>& t, const RowFn<T>& f) {
  if (t.masked_rank() < 2) throw RankError("diagonal_apply requires masked rank >= 2");
  const Shape& ms = t.masked_shape();
  if (ms[0] != ms[1]) throw ShapeError("diagonal_apply: first two dims must match");
  std::vector<T> data = t.data();
  const Index w = t.width();
  const Shape strides = row_major_strides(ms);
  const Index tail = t.positions() / (ms[0] * ms[1]);
  for (Index i = 0; i < ms[0]; ++i) {
    for (Index r = 0; r < tail; ++r) {
      Index flat = i * strides[0] + i * strides[1] + r;
      if (!t.mask_at(flat)) continue;
      std::vector<T> mapped = f(t.row(flat));
      if (static_cast<Index>(mapped.size()) != w)
        throw ShapeError("diagonal_apply must preserve the dense shape");
      std::copy(mapped.begin(), mapped.end(), data.begin() + flat * w);
    }
  }
  return MaskedTensor<T>(t.masked_shape(), t.dense_shape(), std::move(data), t.mask());
}

}  // namespace hot
