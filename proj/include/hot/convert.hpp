// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hot/masked_tensor.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {

// Scatter a coalesced SparseTensor into dense form. Mask is true exactly at
// the sparse index set; everything else is 0 / false.
template <typename T>
MaskedTensor<T> sparse_to_masked(const SparseTensor<T>& sp) {
  typename MaskedTensor<T>::Builder b(sp.sparse_shape(), sp.dense_shape());
  const Shape strides = row_major_strides(sp.sparse_shape());
  const Index sdim = sp.sparse_dim();
  for (Index e = 0; e < sp.nnz(); ++e) {
    Index flat = 0;
    for (Index d = 0; d < sdim; ++d) flat += sp.index(e, d) * strides[d];
    b.mask[static_cast<std::size_t>(flat)] = 1;
    auto src = sp.value_row(e);
    std::copy(src.begin(), src.end(), b.row(flat).begin());
  }
  return b.finish();
}

// Gather mask-true positions into coordinate form. Existence is mask-driven:
// a true position whose data is 0 becomes an explicit zero entry.
template <typename T>
SparseTensor<T> masked_to_sparse(const MaskedTensor<T>& mt) {
  const Index rank = mt.masked_rank();
  const Index w = mt.width();
  Index nnz = mt.valid_count();
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(nnz * rank));
  std::vector<T> vals;
  vals.reserve(static_cast<std::size_t>(nnz * w));
  std::vector<Index> pos(static_cast<std::size_t>(rank), 0);
  for (Index flat = 0; flat < mt.positions(); ++flat) {
    if (mt.mask_at(flat)) {
      idx.insert(idx.end(), pos.begin(), pos.end());
      auto r = mt.row(flat);
      vals.insert(vals.end(), r.begin(), r.end());
    }
    // advance the multi-index in row-major order, matching lexicographic order
    for (Index d = rank - 1; d >= 0; --d) {
      if (++pos[static_cast<std::size_t>(d)] < mt.masked_shape()[static_cast<std::size_t>(d)])
        break;
      pos[static_cast<std::size_t>(d)] = 0;
    }
  }
  return SparseTensor<T>(mt.masked_shape(), mt.dense_shape(), std::move(idx),
                         RowMatrix<T>(nnz, w, std::move(vals)));
}

// Prepend a size-1 batch axis. The batched form is what the graph-level
// operators expect on the dense route.
template <typename T>
MaskedTensor<T> add_batch_dim(const MaskedTensor<T>& mt) {
  Shape ms = mt.masked_shape();
  ms.insert(ms.begin(), 1);
  return MaskedTensor<T>(std::move(ms), mt.dense_shape(), mt.data(), mt.mask());
}

template <typename T>
MaskedTensor<T> drop_batch_dim(const MaskedTensor<T>& mt) {
  if (mt.masked_rank() < 2 || mt.masked_shape()[0] != 1)
    throw RankError("drop_batch_dim expects a leading batch axis of size 1");
  Shape ms(mt.masked_shape().begin() + 1, mt.masked_shape().end());
  return MaskedTensor<T>(std::move(ms), mt.dense_shape(), mt.data(), mt.mask());
}

}  // namespace hot
