// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hot/convert.hpp"
#include "hot/masked_tensor.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {

// Union of supports; value rows on overlapping tuples are summed.
template <typename T>
SparseTensor<T> add(const SparseTensor<T>& A, const SparseTensor<T>& B) {
  if (A.sparse_shape() != B.sparse_shape() || A.dense_shape() != B.dense_shape())
    throw ShapeError("add: operand shapes differ");
  const Index sdim = A.sparse_dim();
  const Index w = A.width();
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>((A.nnz() + B.nnz()) * sdim));
  std::vector<T> vals;
  vals.reserve(static_cast<std::size_t>((A.nnz() + B.nnz()) * w));
  Index ea = 0, eb = 0, nnz = 0;
  while (ea < A.nnz() || eb < B.nnz()) {
    int cmp;
    if (ea >= A.nnz())
      cmp = 1;
    else if (eb >= B.nnz())
      cmp = -1;
    else
      cmp = SparseTensor<T>::lex_cmp(A.index_tuple(ea), B.index_tuple(eb));
    if (cmp < 0) {
      auto t = A.index_tuple(ea);
      idx.insert(idx.end(), t.begin(), t.end());
      auto r = A.value_row(ea);
      vals.insert(vals.end(), r.begin(), r.end());
      ++ea;
    } else if (cmp > 0) {
      auto t = B.index_tuple(eb);
      idx.insert(idx.end(), t.begin(), t.end());
      auto r = B.value_row(eb);
      vals.insert(vals.end(), r.begin(), r.end());
      ++eb;
    } else {
      auto t = A.index_tuple(ea);
      idx.insert(idx.end(), t.begin(), t.end());
      auto ra = A.value_row(ea);
      auto rb = B.value_row(eb);
      for (Index j = 0; j < w; ++j) vals.push_back(ra[j] + rb[j]);
      ++ea;
      ++eb;
    }
    ++nnz;
  }
  return SparseTensor<T>(A.sparse_shape(), A.dense_shape(), std::move(idx),
                         RowMatrix<T>(nnz, w, std::move(vals)));
}

// Elementwise sum; mask is the union of the operand masks.
template <typename T>
MaskedTensor<T> add(const MaskedTensor<T>& A, const MaskedTensor<T>& B) {
  if (A.masked_shape() != B.masked_shape() || A.dense_shape() != B.dense_shape())
    throw ShapeError("add: operand shapes differ");
  std::vector<T> data = A.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += B.data()[i];
  std::vector<std::uint8_t> mask = A.mask();
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] || B.mask()[i];
  return MaskedTensor<T>(A.masked_shape(), A.dense_shape(), std::move(data), std::move(mask));
}

// Mixed representation: result is masked.
template <typename T>
MaskedTensor<T> add(const SparseTensor<T>& A, const MaskedTensor<T>& B) {
  if (A.sparse_shape() != B.masked_shape() || A.dense_shape() != B.dense_shape())
    throw ShapeError("add: operand shapes differ");
  std::vector<T> data = B.data();
  std::vector<std::uint8_t> mask = B.mask();
  const Shape strides = row_major_strides(A.sparse_shape());
  const Index w = A.width();
  for (Index e = 0; e < A.nnz(); ++e) {
    Index flat = 0;
    for (Index d = 0; d < A.sparse_dim(); ++d) flat += A.index(e, d) * strides[d];
    mask[static_cast<std::size_t>(flat)] = 1;
    auto r = A.value_row(e);
    for (Index j = 0; j < w; ++j) data[static_cast<std::size_t>(flat * w + j)] += r[j];
  }
  return MaskedTensor<T>(B.masked_shape(), B.dense_shape(), std::move(data), std::move(mask));
}

template <typename T>
MaskedTensor<T> add(const MaskedTensor<T>& A, const SparseTensor<T>& B) {
  return add(B, A);
}

}  // namespace hot
