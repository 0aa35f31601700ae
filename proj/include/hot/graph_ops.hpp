// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hot/aggregator.hpp"
#include "hot/elementwise.hpp"
#include "hot/matmul.hpp"
#include "hot/reduce_expand.hpp"

namespace hot {

// Records which graph operators ran while the scope is alive. Used to check
// that a model layer emits exactly its advertised operator multiset.
class OpTrace {
 public:
  OpTrace() {
    prev_ = current_;
    current_ = this;
  }
  ~OpTrace() { current_ = prev_; }
  OpTrace(const OpTrace&) = delete;
  OpTrace& operator=(const OpTrace&) = delete;

  static void record(std::string op) {
    if (current_) current_->ops_.push_back(std::move(op));
  }

  const std::vector<std::string>& ops() const { return ops_; }
  std::vector<std::string> sorted_ops() const {
    std::vector<std::string> s = ops_;
    std::sort(s.begin(), s.end());
    return s;
  }

 private:
  static inline thread_local OpTrace* current_ = nullptr;
  OpTrace* prev_ = nullptr;
  std::vector<std::string> ops_;
};

// Output-support policy for message passing. input_pattern restricts the
// product to the input tuple support (exact for supports induced by a node
// set); full_pattern keeps the structural product support.
enum class PatternPolicy { input_pattern, full_pattern };

namespace detail {

inline bool agg_keeps_empty(Aggregator agg) {
  // sum/mean/softmax produce 0 on an empty contributing set; max/min produce
  // an absent element.
  return agg == Aggregator::sum || agg == Aggregator::mean ||
         agg == Aggregator::softmax_weighted;
}

// r's support must be contained in target's; missing tuples become explicit
// zero rows so the output support equals target's exactly.
template <typename T>
SparseTensor<T> align_to_support(const SparseTensor<T>& r, const SparseTensor<T>& target) {
  const Index w = r.width();
  RowMatrix<T> vals(target.nnz(), w);
  Index er = 0;
  for (Index e = 0; e < target.nnz(); ++e) {
    if (er < r.nnz() &&
        SparseTensor<T>::lex_cmp(r.index_tuple(er), target.index_tuple(e)) == 0) {
      auto row = r.value_row(er);
      std::copy(row.begin(), row.end(), vals.row(e).begin());
      ++er;
    }
  }
  if (er != r.nnz()) throw ShapeError("align_to_support: source support exceeds target");
  return SparseTensor<T>(target.sparse_shape(), r.dense_shape(),
                         std::vector<Index>(target.indices()), std::move(vals));
}

template <typename T>
MaskedTensor<T> permute_masked_dims(const MaskedTensor<T>& t, const std::vector<Index>& perm) {
  const Index rank = t.masked_rank();
  if (static_cast<Index>(perm.size()) != rank) throw RankError("permute: bad permutation");
  Shape out_ms(rank);
  for (Index d = 0; d < rank; ++d) out_ms[d] = t.masked_shape()[perm[d]];
  const Shape in_str = row_major_strides(t.masked_shape());
  const Index w = t.width();
  typename MaskedTensor<T>::Builder out(out_ms, t.dense_shape());
  std::vector<Index> pos(static_cast<std::size_t>(rank), 0);
  const Index total = t.positions();
  for (Index flat = 0; flat < total; ++flat) {
    Index sflat = 0;
    for (Index d = 0; d < rank; ++d) sflat += pos[static_cast<std::size_t>(d)] * in_str[perm[d]];
    if (t.mask_at(sflat)) {
      out.mask[static_cast<std::size_t>(flat)] = 1;
      auto row = t.row(sflat);
      std::copy(row.begin(), row.end(), out.data.begin() + static_cast<std::size_t>(flat * w));
    }
    for (Index d = rank - 1; d >= 0; --d) {
      if (++pos[static_cast<std::size_t>(d)] < out_ms[static_cast<std::size_t>(d)]) break;
      pos[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out.finish();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Message passing: contract tuple dimension `dim` of H against the adjacency.
// dim = last: H·A exchanges messages between nodes within a subgraph;
// dim = 0: Aᵀ·H exchanges messages between copies of a node across subgraphs.
// ---------------------------------------------------------------------------
template <typename T>
SparseTensor<T> message_passing(const SparseTensor<T>& H, const SparseTensor<T>& A, Index dim,
                                Aggregator agg,
                                PatternPolicy policy = PatternPolicy::input_pattern,
                                const ScoreFn<T>& score = {}) {
  const Index m = H.sparse_dim();
  if (dim < 0 || dim >= m) throw RankError("message_passing: dim out of range");
  if (A.sparse_dim() != 2 || A.sparse_shape()[0] != A.sparse_shape()[1])
    throw ShapeError("message_passing: adjacency must be square");
  if (H.sparse_shape()[static_cast<std::size_t>(dim)] != A.sparse_shape()[0])
    throw ShapeError("message_passing: H dim size != adjacency size");
  OpTrace::record("M" + std::to_string(dim));

  const bool restrict_to_input = policy == PatternPolicy::input_pattern;
  if (dim == m - 1) {
    OutputPattern pat = OutputPattern::of(H);
    SparseTensor<T> r = matmul(H, A, agg, restrict_to_input ? &pat : nullptr, score);
    if (restrict_to_input && detail::agg_keeps_empty(agg)) r = detail::align_to_support(r, H);
    return r;
  }
  if (dim == 0) {
    SparseTensor<T> at = A.transpose();
    OutputPattern pat = OutputPattern::of(H);
    SparseTensor<T> r = matmul(at, H, agg, restrict_to_input ? &pat : nullptr, score);
    if (restrict_to_input && detail::agg_keeps_empty(agg)) r = detail::align_to_support(r, H);
    return r;
  }
  // interior dimension (order-3 tuples): rotate it to the back, contract,
  // rotate back
  std::vector<Index> perm(static_cast<std::size_t>(m));
  for (Index d = 0; d < m; ++d) perm[static_cast<std::size_t>(d)] = d;
  std::swap(perm[static_cast<std::size_t>(dim)], perm[static_cast<std::size_t>(m - 1)]);
  SparseTensor<T> hp = H.permute_dims(perm);
  OutputPattern pat = OutputPattern::of(hp);
  SparseTensor<T> r = matmul(hp, A, agg, restrict_to_input ? &pat : nullptr, score);
  r = r.permute_dims(perm);
  if (restrict_to_input && detail::agg_keeps_empty(agg)) r = detail::align_to_support(r, H);
  return r;
}

// Dense route. H is batched: (B, n, ..., n[, d]); A is (B, n, n).
template <typename T>
MaskedTensor<T> message_passing(const MaskedTensor<T>& H, const MaskedTensor<T>& A, Index dim,
                                Aggregator agg,
                                PatternPolicy policy = PatternPolicy::input_pattern,
                                const ScoreFn<T>& score = {}) {
  if (A.masked_rank() != 3 || A.masked_shape()[1] != A.masked_shape()[2])
    throw ShapeError("message_passing: adjacency must be (batch, n, n)");
  const Index m = H.masked_rank() - 1;
  if (m < 1) throw RankError("message_passing: H must carry a batch dim plus tuple dims");
  if (dim < 0 || dim >= m) throw RankError("message_passing: dim out of range");
  OpTrace::record("M" + std::to_string(dim));

  MaskedTensor<T> r;
  if (dim == m - 1 && m >= 2) {
    r = matmul(H, A, agg, /*batched=*/true, score);
  } else if (dim == 0) {
    MaskedTensor<T> at = detail::permute_masked_dims(A, {0, 2, 1});
    r = matmul(at, H, agg, /*batched=*/true, score);
  } else {
    throw UnsupportedError("dense message passing supports 2-D tuples (and node level at dim 0)");
  }
  if (policy == PatternPolicy::input_pattern) {
    std::vector<std::uint8_t> mask = H.mask();
    if (!detail::agg_keeps_empty(agg)) {
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && r.mask()[i];
    }
    return MaskedTensor<T>(r.masked_shape(), r.dense_shape(), r.data(), std::move(mask));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pooling / unpooling / diagonal
// ---------------------------------------------------------------------------
template <typename T>
SparseTensor<T> pooling(const SparseTensor<T>& H, Index dim, Aggregator op) {
  OpTrace::record("P" + std::to_string(dim));
  return reduce(H, dim, op);
}

// Dense route: `dim` indexes tuple dimensions; the batch axis is implicit.
template <typename T>
MaskedTensor<T> pooling(const MaskedTensor<T>& H, Index dim, Aggregator op) {
  OpTrace::record("P" + std::to_string(dim));
  return reduce(H, dim + 1, op);
}

template <typename T>
SparseTensor<T> unpooling(const SparseTensor<T>& h, Index dim, const SparseTensor<T>& target) {
  OpTrace::record("U" + std::to_string(dim));
  return expand(h, dim, OutputPattern::of(target));
}

template <typename T>
MaskedTensor<T> unpooling(const MaskedTensor<T>& h, Index dim, const MaskedTensor<T>& target) {
  OpTrace::record("U" + std::to_string(dim));
  return expand(h, dim + 1, target.masked_shape(), target.mask());
}

// Extract the (i, i, ...) entries: the representation of each subgraph's
// root node.
template <typename T>
SparseTensor<T> diagonal(const SparseTensor<T>& H) {
  if (H.sparse_dim() < 2) throw RankError("diagonal requires order >= 2");
  if (H.sparse_shape()[0] != H.sparse_shape()[1])
    throw ShapeError("diagonal: first two dims must match");
  OpTrace::record("D");
  const Index sdim = H.sparse_dim();
  const Index w = H.width();
  std::vector<Index> idx;
  std::vector<T> vals;
  Index nnz = 0;
  for (Index e = 0; e < H.nnz(); ++e) {
    if (H.index(e, 0) != H.index(e, 1)) continue;
    for (Index d = 1; d < sdim; ++d) idx.push_back(H.index(e, d));
    auto r = H.value_row(e);
    vals.insert(vals.end(), r.begin(), r.end());
    ++nnz;
  }
  Shape out_shape(H.sparse_shape().begin() + 1, H.sparse_shape().end());
  return SparseTensor<T>(std::move(out_shape), H.dense_shape(), std::move(idx),
                         RowMatrix<T>(nnz, w, std::move(vals)));
}

template <typename T>
MaskedTensor<T> diagonal(const MaskedTensor<T>& H) {
  if (H.masked_rank() < 3) throw RankError("diagonal (dense) requires (batch, n, n, ...)");
  const Shape& ms = H.masked_shape();
  if (ms[1] != ms[2]) throw ShapeError("diagonal: tuple dims must match");
  OpTrace::record("D");
  Shape out_ms;
  out_ms.push_back(ms[0]);
  out_ms.push_back(ms[1]);
  for (std::size_t d = 3; d < ms.size(); ++d) out_ms.push_back(ms[d]);
  const Index tail = shape_product(Shape(ms.begin() + 3, ms.end()));
  const Index w = H.width();
  typename MaskedTensor<T>::Builder out(out_ms, H.dense_shape());
  for (Index b = 0; b < ms[0]; ++b) {
    for (Index i = 0; i < ms[1]; ++i) {
      for (Index t = 0; t < tail; ++t) {
        const Index sflat = ((b * ms[1] + i) * ms[2] + i) * tail + t;
        const Index oflat = (b * ms[1] + i) * tail + t;
        if (H.mask_at(sflat)) {
          out.mask[static_cast<std::size_t>(oflat)] = 1;
          auto r = H.row(sflat);
          std::copy(r.begin(), r.end(), out.data.begin() + static_cast<std::size_t>(oflat * w));
        }
      }
    }
  }
  return out.finish();
}

// Tuple-tensor x tuple-tensor contraction (the dense-matmul realization of
// within-subgraph message passing when both operands carry hidden channels).
template <typename T>
SparseTensor<T> tuple_contract(const SparseTensor<T>& A, const SparseTensor<T>& B,
                               const SparseTensor<T>& support_like, Aggregator agg) {
  OpTrace::record("M1");
  OutputPattern pat = OutputPattern::of(support_like);
  SparseTensor<T> r = matmul_channelwise(A, B, agg, &pat);
  if (detail::agg_keeps_empty(agg)) r = detail::align_to_support(r, support_like);
  return r;
}

template <typename T>
MaskedTensor<T> tuple_contract(const MaskedTensor<T>& A, const MaskedTensor<T>& B,
                               const MaskedTensor<T>& mask_like, Aggregator agg) {
  OpTrace::record("M1");
  MaskedTensor<T> r = matmul_channelwise(A, B, agg, /*batched=*/true);
  std::vector<std::uint8_t> mask = mask_like.mask();
  if (!detail::agg_keeps_empty(agg)) {
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && r.mask()[i];
  }
  return MaskedTensor<T>(r.masked_shape(), r.dense_shape(), r.data(), std::move(mask));
}

}  // namespace hot
