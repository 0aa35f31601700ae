// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstring>
#include <utility>

#include "hot/common.hpp"

namespace hot {

// Coordinate-format high-order tensor. `sparse_shape` dimensions are tied to
// graph properties (node counts); `dense_shape` holds trailing hidden
// dimensions. Index tuples are kept coalesced: strictly lexicographically
// increasing, duplicate-free. Entries with value 0 are retained — the index
// set encodes tuple existence, not numeric support.
//
// Immutable after construction; all operations return new tensors.
template <typename T>
class SparseTensor {
 public:
  SparseTensor() = default;

  // Takes already-coalesced data. Index layout is entry-major: the tuple of
  // entry e occupies indices[e*sparse_dim .. e*sparse_dim + sparse_dim).
  SparseTensor(Shape sparse_shape, Shape dense_shape, std::vector<Index> indices,
               RowMatrix<T> values)
      : sparse_shape_(std::move(sparse_shape)),
        dense_shape_(std::move(dense_shape)),
        indices_(std::move(indices)),
        values_(std::move(values)) {
    validate();
    token_.rebind(footprint_bytes());
  }

  // Canonical constructor: sorts entries lexicographically and sums value
  // rows of duplicate index tuples.
  static SparseTensor from_entries(
      Shape sparse_shape, Shape dense_shape,
      const std::vector<std::pair<std::vector<Index>, std::vector<T>>>& entries) {
    const Index sdim = static_cast<Index>(sparse_shape.size());
    const Index width = shape_product(dense_shape);
    std::vector<Index> order(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& [idx, val] = entries[i];
      if (static_cast<Index>(idx.size()) != sdim)
        throw ShapeError("entry index tuple length != sparse_dim");
      for (Index d = 0; d < sdim; ++d) {
        if (idx[d] < 0 || idx[d] >= sparse_shape[d])
          throw BoundsError("entry index out of range at dim " + std::to_string(d));
      }
      if (static_cast<Index>(val.size()) != width)
        throw ShapeError("entry value row does not match dense_shape");
      order[i] = static_cast<Index>(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return entries[a].first < entries[b].first;
    });
    std::vector<Index> idx;
    idx.reserve(entries.size() * sdim);
    std::vector<T> vals;
    vals.reserve(entries.size() * width);
    Index nnz = 0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      const auto& e = entries[order[p]];
      if (nnz > 0 && std::equal(e.first.begin(), e.first.end(), idx.end() - sdim)) {
        T* acc = vals.data() + (nnz - 1) * width;
        for (Index c = 0; c < width; ++c) acc[c] += e.second[c];  // duplicate-sum rule
      } else {
        idx.insert(idx.end(), e.first.begin(), e.first.end());
        vals.insert(vals.end(), e.second.begin(), e.second.end());
        ++nnz;
      }
    }
    return SparseTensor(std::move(sparse_shape), std::move(dense_shape), std::move(idx),
                        RowMatrix<T>(nnz, width, std::move(vals)));
  }

  static SparseTensor empty(Shape sparse_shape, Shape dense_shape) {
    Index width = shape_product(dense_shape);
    return SparseTensor(std::move(sparse_shape), std::move(dense_shape), {},
                        RowMatrix<T>(0, width));
  }

  const Shape& sparse_shape() const { return sparse_shape_; }
  const Shape& dense_shape() const { return dense_shape_; }
  Index sparse_dim() const { return static_cast<Index>(sparse_shape_.size()); }
  Index nnz() const { return values_.rows; }
  Index width() const { return values_.cols; }

  const std::vector<Index>& indices() const { return indices_; }
  const RowMatrix<T>& values() const { return values_; }

  Index index(Index entry, Index dim) const { return indices_[entry * sparse_dim() + dim]; }
  std::span<const Index> index_tuple(Index entry) const {
    return {indices_.data() + entry * sparse_dim(), static_cast<std::size_t>(sparse_dim())};
  }
  std::span<const T> value_row(Index entry) const { return values_.row(entry); }

  // Entry position for an index tuple, or -1. Binary search over the
  // coalesced column order.
  Index find(std::span<const Index> tuple) const {
    const Index sdim = sparse_dim();
    Index lo = 0, hi = nnz();
    while (lo < hi) {
      Index mid = (lo + hi) / 2;
      auto t = index_tuple(mid);
      int cmp = lex_cmp(t, tuple);
      if (cmp == 0) return mid;
      if (cmp < 0)
        lo = mid + 1;
      else
        hi = mid;
    }
    (void)sdim;
    return -1;
  }

  // Rebuild with the given value matrix (same index set). Used by tuplewise
  // transforms; the new dense shape may differ.
  SparseTensor with_values(Shape new_dense_shape, RowMatrix<T> new_values) const {
    if (new_values.rows != nnz()) throw ShapeError("with_values: row count must equal nnz");
    return SparseTensor(sparse_shape_, std::move(new_dense_shape), indices_,
                        std::move(new_values));
  }

  // Reorder sparse dimensions by `perm` (new dim d comes from old perm[d]),
  // then re-coalesce.
  SparseTensor permute_dims(const std::vector<Index>& perm) const {
    const Index sdim = sparse_dim();
    if (static_cast<Index>(perm.size()) != sdim) throw RankError("permute_dims: bad permutation");
    Shape new_shape(sdim);
    for (Index d = 0; d < sdim; ++d) new_shape[d] = sparse_shape_[perm[d]];
    std::vector<Index> order(nnz());
    for (Index e = 0; e < nnz(); ++e) order[e] = e;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      for (Index d = 0; d < sdim; ++d) {
        Index va = index(a, perm[d]), vb = index(b, perm[d]);
        if (va != vb) return va < vb;
      }
      return false;
    });
    std::vector<Index> idx(nnz() * sdim);
    RowMatrix<T> vals(nnz(), width());
    for (Index p = 0; p < nnz(); ++p) {
      Index e = order[p];
      for (Index d = 0; d < sdim; ++d) idx[p * sdim + d] = index(e, perm[d]);
      auto src = value_row(e);
      std::copy(src.begin(), src.end(), vals.row(p).begin());
    }
    return SparseTensor(std::move(new_shape), dense_shape_, std::move(idx), std::move(vals));
  }

  // Swap the first two sparse dimensions.
  SparseTensor transpose() const {
    if (sparse_dim() < 2) throw RankError("transpose requires sparse_dim >= 2");
    std::vector<Index> perm(sparse_dim());
    for (Index d = 0; d < sparse_dim(); ++d) perm[d] = d;
    std::swap(perm[0], perm[1]);
    return permute_dims(perm);
  }

  bool same_support(const SparseTensor& o) const {
    return sparse_shape_ == o.sparse_shape_ && indices_ == o.indices_;
  }

  bool operator==(const SparseTensor& o) const {
    return sparse_shape_ == o.sparse_shape_ && dense_shape_ == o.dense_shape_ &&
           indices_ == o.indices_ && values_ == o.values_;
  }

  static int lex_cmp(std::span<const Index> a, std::span<const Index> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
  }

 private:
  std::int64_t footprint_bytes() const {
    return static_cast<std::int64_t>(indices_.size() * sizeof(Index) +
                                     values_.v.size() * sizeof(T));
  }

  void validate() const {
    for (Index d : sparse_shape_)
      if (d <= 0) throw ShapeError("sparse_shape entries must be positive");
    for (Index d : dense_shape_)
      if (d < 0) throw ShapeError("dense_shape entries must be non-negative");
    const Index sdim = sparse_dim();
    const Index n = values_.rows;
    if (static_cast<Index>(indices_.size()) != n * sdim)
      throw ShapeError("indices size != nnz * sparse_dim");
    if (values_.cols != shape_product(dense_shape_))
      throw ShapeError("values width != product(dense_shape)");
    for (Index e = 0; e < n; ++e) {
      for (Index d = 0; d < sdim; ++d) {
        Index v = indices_[e * sdim + d];
        if (v < 0 || v >= sparse_shape_[d]) throw BoundsError("index out of range");
      }
      if (e > 0 && lex_cmp(index_tuple(e - 1), index_tuple(e)) >= 0)
        throw ShapeError("indices not strictly lexicographically increasing");
    }
  }

  Shape sparse_shape_;
  Shape dense_shape_;
  std::vector<Index> indices_;
  RowMatrix<T> values_;
  MemToken token_;
};

}  // namespace hot
