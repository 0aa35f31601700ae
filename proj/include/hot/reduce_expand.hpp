// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>

#include "hot/aggregator.hpp"
#include "hot/masked_tensor.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {

// Collapse dimension `dim`. Sparse entries are grouped by the remaining
// indices; mean divides by the number of existing entries in the group.
template <typename T>
SparseTensor<T> reduce(const SparseTensor<T>& t, Index dim, Aggregator op) {
  if (op == Aggregator::softmax_weighted)
    throw UnsupportedError("reduce does not take the softmax-weighted aggregator");
  const Index sdim = t.sparse_dim();
  if (dim < 0 || dim >= sdim) throw RankError("reduce: dim out of range");
  Shape out_shape;
  for (Index d = 0; d < sdim; ++d)
    if (d != dim) out_shape.push_back(t.sparse_shape()[static_cast<std::size_t>(d)]);
  const Index out_sdim = sdim - 1;
  const Index w = t.width();

  std::vector<Index> order(static_cast<std::size_t>(t.nnz()));
  for (Index e = 0; e < t.nnz(); ++e) order[static_cast<std::size_t>(e)] = e;
  auto reduced_cmp = [&](Index a, Index b) {
    for (Index d = 0; d < sdim; ++d) {
      if (d == dim) continue;
      Index va = t.index(a, d), vb = t.index(b, d);
      if (va != vb) return va < vb ? -1 : 1;
    }
    return 0;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return reduced_cmp(a, b) < 0; });

  std::vector<Index> idx;
  std::vector<T> vals;
  Index nnz = 0;
  std::size_t p = 0;
  while (p < order.size()) {
    std::size_t p1 = p + 1;
    while (p1 < order.size() && reduced_cmp(order[p], order[p1]) == 0) ++p1;
    const Index e0 = order[p];
    for (Index d = 0; d < sdim; ++d)
      if (d != dim) idx.push_back(t.index(e0, d));
    std::vector<T> acc(t.value_row(e0).begin(), t.value_row(e0).end());
    for (std::size_t q = p + 1; q < p1; ++q) {
      auto r = t.value_row(order[q]);
      switch (op) {
        case Aggregator::sum:
        case Aggregator::mean:
          for (Index j = 0; j < w; ++j) acc[static_cast<std::size_t>(j)] += r[j];
          break;
        case Aggregator::max:
          for (Index j = 0; j < w; ++j)
            acc[static_cast<std::size_t>(j)] = std::max(acc[static_cast<std::size_t>(j)], r[j]);
          break;
        case Aggregator::min:
          for (Index j = 0; j < w; ++j)
            acc[static_cast<std::size_t>(j)] = std::min(acc[static_cast<std::size_t>(j)], r[j]);
          break;
        default:
          break;
      }
    }
    if (op == Aggregator::mean) {
      const T n = static_cast<T>(p1 - p);
      for (Index j = 0; j < w; ++j) acc[static_cast<std::size_t>(j)] /= n;
    }
    vals.insert(vals.end(), acc.begin(), acc.end());
    ++nnz;
    p = p1;
  }
  (void)out_sdim;
  return SparseTensor<T>(std::move(out_shape), t.dense_shape(), std::move(idx),
                         RowMatrix<T>(nnz, w, std::move(vals)));
}

// Masked reduce: only mask-true positions contribute; the output slot is
// mask-true iff at least one contributor exists.
template <typename T>
MaskedTensor<T> reduce(const MaskedTensor<T>& t, Index dim, Aggregator op) {
  if (op == Aggregator::softmax_weighted)
    throw UnsupportedError("reduce does not take the softmax-weighted aggregator");
  const Index rank = t.masked_rank();
  if (dim < 0 || dim >= rank) throw RankError("reduce: dim out of range");
  const Shape& ms = t.masked_shape();
  Shape out_ms;
  for (Index d = 0; d < rank; ++d)
    if (d != dim) out_ms.push_back(ms[static_cast<std::size_t>(d)]);
  const Index w = t.width();
  const Index D = ms[static_cast<std::size_t>(dim)];
  // split flat positions as (outer, d, inner)
  Index inner = 1;
  for (Index d = dim + 1; d < rank; ++d) inner *= ms[static_cast<std::size_t>(d)];
  const Index outer = t.positions() / (D * inner);

  typename MaskedTensor<T>::Builder out(out_ms, t.dense_shape());
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      const Index oflat = o * inner + i;
      T* ocell = out.data.data() + oflat * w;
      Index n = 0;
      for (Index d = 0; d < D; ++d) {
        const Index flat = (o * D + d) * inner + i;
        if (!t.mask_at(flat)) continue;
        auto r = t.row(flat);
        if (n == 0) {
          for (Index j = 0; j < w; ++j) ocell[j] = r[j];
        } else {
          switch (op) {
            case Aggregator::sum:
            case Aggregator::mean:
              for (Index j = 0; j < w; ++j) ocell[j] += r[j];
              break;
            case Aggregator::max:
              for (Index j = 0; j < w; ++j) ocell[j] = std::max(ocell[j], r[j]);
              break;
            case Aggregator::min:
              for (Index j = 0; j < w; ++j) ocell[j] = std::min(ocell[j], r[j]);
              break;
            default:
              break;
          }
        }
        ++n;
      }
      if (n > 0) {
        out.mask[static_cast<std::size_t>(oflat)] = 1;
        if (op == Aggregator::mean)
          for (Index j = 0; j < w; ++j) ocell[j] /= static_cast<T>(n);
      }
    }
  }
  return out.finish();
}

// Insert a new dimension at position `dim`. The target pattern supplies the
// output support; each target entry takes the source row at the index tuple
// with position `dim` deleted (zeros when the source tuple is absent).
template <typename T>
SparseTensor<T> expand(const SparseTensor<T>& t, Index dim, const OutputPattern& target) {
  const Index sdim = t.sparse_dim();
  if (target.sparse_dim != sdim + 1) throw RankError("expand: target order must be source + 1");
  if (dim < 0 || dim > sdim) throw RankError("expand: dim out of range");
  Shape reduced;
  for (Index d = 0; d < target.sparse_dim; ++d)
    if (d != dim) reduced.push_back(target.sparse_shape[static_cast<std::size_t>(d)]);
  if (reduced != t.sparse_shape()) throw ShapeError("expand: target incompatible with source shape");

  const Index w = t.width();
  std::vector<Index> idx(static_cast<std::size_t>(target.nnz * target.sparse_dim));
  std::copy(target.idx, target.idx + idx.size(), idx.begin());
  std::vector<T> vals(static_cast<std::size_t>(target.nnz * w), T(0));
  std::vector<Index> src(static_cast<std::size_t>(sdim));
  for (Index e = 0; e < target.nnz; ++e) {
    auto tup = target.tuple(e);
    Index d2 = 0;
    for (Index d = 0; d < target.sparse_dim; ++d)
      if (d != dim) src[static_cast<std::size_t>(d2++)] = tup[d];
    const Index pos = t.find(src);
    if (pos >= 0) {
      auto r = t.value_row(pos);
      std::copy(r.begin(), r.end(), vals.begin() + static_cast<std::size_t>(e * w));
    }
  }
  return SparseTensor<T>(target.sparse_shape, t.dense_shape(), std::move(idx),
                         RowMatrix<T>(target.nnz, w, std::move(vals)));
}

// Masked expand: `target_mask` (row-major over `target_shape`) defines the
// output mask exactly.
template <typename T>
MaskedTensor<T> expand(const MaskedTensor<T>& t, Index dim, const Shape& target_shape,
                       const std::vector<std::uint8_t>& target_mask) {
  const Index rank = t.masked_rank();
  if (static_cast<Index>(target_shape.size()) != rank + 1)
    throw RankError("expand: target order must be source + 1");
  if (dim < 0 || dim > rank) throw RankError("expand: dim out of range");
  Shape reduced;
  for (Index d = 0; d < rank + 1; ++d)
    if (d != dim) reduced.push_back(target_shape[static_cast<std::size_t>(d)]);
  if (reduced != t.masked_shape()) throw ShapeError("expand: target incompatible with source shape");
  if (static_cast<Index>(target_mask.size()) != shape_product(target_shape))
    throw ShapeError("expand: target mask size mismatch");

  const Index w = t.width();
  typename MaskedTensor<T>::Builder out(target_shape, t.dense_shape());
  const Shape tstr = row_major_strides(target_shape);
  const Shape sstr = row_major_strides(t.masked_shape());
  std::vector<Index> pos(target_shape.size(), 0);
  const Index total = shape_product(target_shape);
  for (Index flat = 0; flat < total; ++flat) {
    if (target_mask[static_cast<std::size_t>(flat)]) {
      out.mask[static_cast<std::size_t>(flat)] = 1;
      Index sflat = 0, d2 = 0;
      for (Index d = 0; d < rank + 1; ++d)
        if (d != dim) sflat += pos[static_cast<std::size_t>(d)] * sstr[static_cast<std::size_t>(d2++)];
      auto r = t.row(sflat);
      std::copy(r.begin(), r.end(), out.data.begin() + static_cast<std::size_t>(flat * w));
    }
    for (Index d = static_cast<Index>(target_shape.size()) - 1; d >= 0; --d) {
      if (++pos[static_cast<std::size_t>(d)] < target_shape[static_cast<std::size_t>(d)]) break;
      pos[static_cast<std::size_t>(d)] = 0;
    }
  }
  (void)tstr;
  return out.finish();
}

template <typename T>
MaskedTensor<T> expand(const MaskedTensor<T>& t, Index dim, const MaskedTensor<T>& target) {
  return expand(t, dim, target.masked_shape(), target.mask());
}

}  // namespace hot
