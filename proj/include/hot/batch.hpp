// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>

#include "hot/convert.hpp"
#include "hot/preprocess.hpp"

namespace hot {

// Block-diagonal multi-graph batch: per-graph tensors concatenated along the
// diagonal of larger sparse tensors, so batch and single-graph tensors share
// operator code.
struct SparseBatch {
  SparseTensor<double> adjacency;            // N x N, N = sum n_i
  RowMatrix<double> node_feat;               // N x d
  SparseTensor<std::int64_t> tuple_feature;  // block-diagonal support
  std::vector<Index> node_offsets;           // per-graph start, offsets[0] = 0
  std::vector<Index> graph_ids;              // per-node graph membership
  std::vector<double> targets;               // NaN where absent

  Index num_graphs() const { return static_cast<Index>(node_offsets.size()); }
  Index num_nodes() const { return static_cast<Index>(graph_ids.size()); }
};

// Pad-and-stack batch: per-graph tensors padded to the max node count and
// stacked along a new leading axis with masks on the valid ranges.
struct DenseBatch {
  MaskedTensor<double> adjacency;      // (B, ñ, ñ)
  MaskedTensor<double> node_feat;      // (B, ñ) with dense (d)
  MaskedTensor<double> tuple_feature;  // (B, ñ, ñ) with dense (w); mask = tuple support
  std::vector<Index> sizes;
  std::vector<double> targets;

  Index num_graphs() const { return static_cast<Index>(sizes.size()); }
  Index max_nodes() const { return adjacency.masked_shape()[1]; }
};

inline SparseBatch collate_sparse(const std::vector<PreprocessedGraph>& items) {
  if (items.empty()) throw ShapeError("collate_sparse: empty batch");
  const Index b = static_cast<Index>(items.size());
  const Index sdim = items[0].tuple_feature.sparse_dim();
  const Index tw = items[0].tuple_feature.width();
  const Index fd = items[0].graph.node_feat.cols;

  SparseBatch out;
  Index total = 0;
  for (const auto& it : items) {
    if (it.tuple_feature.sparse_dim() != sdim || it.tuple_feature.width() != tw)
      throw ShapeError("collate_sparse: mixed tuple orders in one batch");
    if (it.graph.node_feat.cols != fd)
      throw ShapeError("collate_sparse: node feature widths differ");
    out.node_offsets.push_back(total);
    total += it.graph.n;
  }

  out.node_feat = RowMatrix<double>(total, fd);
  out.graph_ids.resize(static_cast<std::size_t>(total));
  std::vector<Index> adj_idx;
  std::vector<double> adj_vals;
  std::vector<Index> tup_idx;
  std::vector<std::int64_t> tup_vals;

  for (Index gi = 0; gi < b; ++gi) {
    const auto& it = items[static_cast<std::size_t>(gi)];
    const Index off = out.node_offsets[static_cast<std::size_t>(gi)];
    for (Index r = 0; r < it.graph.n; ++r) {
      out.graph_ids[static_cast<std::size_t>(off + r)] = gi;
      auto src = it.graph.node_feat.row(r);
      std::copy(src.begin(), src.end(), out.node_feat.row(off + r).begin());
    }
    SparseTensor<double> a = adjacency_sparse(it.graph);
    for (Index e = 0; e < a.nnz(); ++e) {
      adj_idx.push_back(a.index(e, 0) + off);
      adj_idx.push_back(a.index(e, 1) + off);
      adj_vals.push_back(1.0);
    }
    const auto& t = it.tuple_feature;
    for (Index e = 0; e < t.nnz(); ++e) {
      for (Index d = 0; d < sdim; ++d) tup_idx.push_back(t.index(e, d) + off);
      auto r = t.value_row(e);
      tup_vals.insert(tup_vals.end(), r.begin(), r.end());
    }
    out.targets.push_back(it.graph.target ? *it.graph.target
                                          : std::numeric_limits<double>::quiet_NaN());
  }

  // blocks are disjoint and each block is sorted, so concatenation in graph
  // order is already coalesced
  const Index adj_nnz = static_cast<Index>(adj_vals.size());
  out.adjacency = SparseTensor<double>({total, total}, {}, std::move(adj_idx),
                                       RowMatrix<double>(adj_nnz, 1, std::move(adj_vals)));
  Shape tshape(static_cast<std::size_t>(sdim), total);
  const Index tup_nnz = static_cast<Index>(tup_vals.size()) / std::max<Index>(tw, 1);
  out.tuple_feature =
      SparseTensor<std::int64_t>(std::move(tshape), items[0].tuple_feature.dense_shape(),
                                 std::move(tup_idx),
                                 RowMatrix<std::int64_t>(tup_nnz, tw, std::move(tup_vals)));
  return out;
}

// Slice graph `gi` back out of a sparse batch (inverse of collate_sparse).
inline PreprocessedGraph slice_sparse(const SparseBatch& batch,
                                      const std::vector<PreprocessedGraph>& items, Index gi) {
  const auto& it = items[static_cast<std::size_t>(gi)];
  const Index off = batch.node_offsets[static_cast<std::size_t>(gi)];
  const Index n = it.graph.n;
  const Index sdim = batch.tuple_feature.sparse_dim();
  std::vector<Index> idx;
  std::vector<std::int64_t> vals;
  const Index w = batch.tuple_feature.width();
  for (Index e = 0; e < batch.tuple_feature.nnz(); ++e) {
    const Index i0 = batch.tuple_feature.index(e, 0);
    if (i0 < off || i0 >= off + n) continue;
    for (Index d = 0; d < sdim; ++d) idx.push_back(batch.tuple_feature.index(e, d) - off);
    auto r = batch.tuple_feature.value_row(e);
    vals.insert(vals.end(), r.begin(), r.end());
  }
  PreprocessedGraph pg;
  pg.graph = it.graph;
  const Index nnz = static_cast<Index>(vals.size()) / std::max<Index>(w, 1);
  pg.tuple_feature = SparseTensor<std::int64_t>(
      Shape(static_cast<std::size_t>(sdim), n), batch.tuple_feature.dense_shape(),
      std::move(idx), RowMatrix<std::int64_t>(nnz, w, std::move(vals)));
  return pg;
}

inline DenseBatch collate_dense(const std::vector<PreprocessedGraph>& items) {
  if (items.empty()) throw ShapeError("collate_dense: empty batch");
  const Index b = static_cast<Index>(items.size());
  if (items[0].tuple_feature.sparse_dim() != 2)
    throw UnsupportedError("collate_dense: dense batching covers order-2 tuples");
  const Index tw = items[0].tuple_feature.width();
  const Index fd = items[0].graph.node_feat.cols;
  Index nmax = 0;
  for (const auto& it : items) nmax = std::max(nmax, it.graph.n);

  typename MaskedTensor<double>::Builder adj({b, nmax, nmax}, {});
  typename MaskedTensor<double>::Builder feat({b, nmax}, {fd});
  typename MaskedTensor<double>::Builder tup({b, nmax, nmax}, {tw});

  DenseBatch out;
  for (Index gi = 0; gi < b; ++gi) {
    const auto& it = items[static_cast<std::size_t>(gi)];
    const Index n = it.graph.n;
    out.sizes.push_back(n);
    out.targets.push_back(it.graph.target ? *it.graph.target
                                          : std::numeric_limits<double>::quiet_NaN());
    for (Index i = 0; i < n; ++i) {
      feat.mask[static_cast<std::size_t>(gi * nmax + i)] = 1;
      auto src = it.graph.node_feat.row(i);
      std::copy(src.begin(), src.end(),
                feat.data.begin() + static_cast<std::size_t>((gi * nmax + i) * fd));
      for (Index j = 0; j < n; ++j)
        adj.mask[static_cast<std::size_t>((gi * nmax + i) * nmax + j)] = 1;
    }
    for (auto [u, v] : it.graph.edges) {
      adj.data[static_cast<std::size_t>((gi * nmax + u) * nmax + v)] = 1.0;
      adj.data[static_cast<std::size_t>((gi * nmax + v) * nmax + u)] = 1.0;
    }
    const auto& t = it.tuple_feature;
    for (Index e = 0; e < t.nnz(); ++e) {
      const Index flat = (gi * nmax + t.index(e, 0)) * nmax + t.index(e, 1);
      tup.mask[static_cast<std::size_t>(flat)] = 1;
      auto r = t.value_row(e);
      for (Index c = 0; c < tw; ++c)
        tup.data[static_cast<std::size_t>(flat * tw + c)] = static_cast<double>(r[c]);
    }
  }
  out.adjacency = adj.finish();
  out.node_feat = feat.finish();
  out.tuple_feature = tup.finish();
  return out;
}

}  // namespace hot
