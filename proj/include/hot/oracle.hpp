// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference implementations used by the verification suites and
// the test oracles. Everything here works on fully materialized arrays with
// explicit existence flags and shares no code with the optimized kernels.

#include <cmath>

#include "hot/aggregator.hpp"
#include "hot/convert.hpp"
#include "hot/graph.hpp"

namespace hot::oracle {

template <typename T>
struct DenseRef {
  Shape shape;  // graph-tied dims
  Index width = 1;
  std::vector<T> data;
  std::vector<std::uint8_t> exist;

  DenseRef() = default;
  DenseRef(Shape s, Index w)
      : shape(std::move(s)),
        width(w),
        data(static_cast<std::size_t>(shape_product(shape) * w), T(0)),
        exist(static_cast<std::size_t>(shape_product(shape)), 0) {}

  Index positions() const { return static_cast<Index>(exist.size()); }
  T* row(Index flat) { return data.data() + flat * width; }
  const T* row(Index flat) const { return data.data() + flat * width; }
};

template <typename T>
DenseRef<T> from_sparse(const SparseTensor<T>& sp) {
  DenseRef<T> r(sp.sparse_shape(), std::max<Index>(sp.width(), 1));
  const Shape strides = row_major_strides(sp.sparse_shape());
  for (Index e = 0; e < sp.nnz(); ++e) {
    Index flat = 0;
    for (Index d = 0; d < sp.sparse_dim(); ++d) flat += sp.index(e, d) * strides[d];
    r.exist[static_cast<std::size_t>(flat)] = 1;
    auto it = sp.value_row(e);
    std::copy(it.begin(), it.end(), r.row(flat));
  }
  return r;
}

template <typename T>
DenseRef<T> from_masked(const MaskedTensor<T>& mt) {
  DenseRef<T> r(mt.masked_shape(), std::max<Index>(mt.width(), 1));
  r.exist.assign(mt.mask().begin(), mt.mask().end());
  r.data = mt.data();
  if (r.data.empty()) r.data.assign(static_cast<std::size_t>(mt.positions()), T(0));
  return r;
}

// Reference generalized matmul: contracts the last dim of A against the
// first dim of B. A contribution exists where both operands exist,
// independent of value. Softmax uses the plain two-pass formulation.
template <typename T>
DenseRef<T> matmul_ref(const DenseRef<T>& A, const DenseRef<T>& B, Aggregator agg,
                       const DenseRef<std::uint8_t>* pattern = nullptr,
                       const ScoreFn<T>& score = {}, bool channelwise = false) {
  const Index K = A.shape.back();
  if (K != B.shape.front()) throw ShapeError("oracle matmul: inner dims");
  Shape out_shape(A.shape.begin(), A.shape.end() - 1);
  out_shape.insert(out_shape.end(), B.shape.begin() + 1, B.shape.end());
  const Index P = shape_product(Shape(A.shape.begin(), A.shape.end() - 1));
  const Index Q = shape_product(Shape(B.shape.begin() + 1, B.shape.end()));
  const Index w = channelwise ? A.width : std::max(A.width, B.width);
  DenseRef<T> out(out_shape, w);
  for (Index p = 0; p < P; ++p) {
    for (Index q = 0; q < Q; ++q) {
      if (pattern && !pattern->exist[static_cast<std::size_t>(p * Q + q)]) continue;
      std::vector<Index> ks;
      for (Index k = 0; k < K; ++k)
        if (A.exist[static_cast<std::size_t>(p * K + k)] &&
            B.exist[static_cast<std::size_t>(k * Q + q)])
          ks.push_back(k);
      if (ks.empty()) continue;
      out.exist[static_cast<std::size_t>(p * Q + q)] = 1;
      T* cell = out.row(p * Q + q);
      auto contrib = [&](Index k, Index j) -> T {
        const T* ar = A.row(p * K + k);
        const T* br = B.row(k * Q + q);
        if (channelwise) return ar[j] * br[j];
        if (A.width > 1) return ar[j] * br[0];
        return ar[0] * br[j];
      };
      switch (agg) {
        case Aggregator::sum:
        case Aggregator::mean:
          for (Index j = 0; j < w; ++j) {
            T acc = T(0);
            for (Index k : ks) acc += contrib(k, j);
            cell[j] = agg == Aggregator::mean ? acc / static_cast<T>(ks.size()) : acc;
          }
          break;
        case Aggregator::max:
          for (Index j = 0; j < w; ++j) {
            T acc = contrib(ks[0], j);
            for (std::size_t i = 1; i < ks.size(); ++i) acc = std::max(acc, contrib(ks[i], j));
            cell[j] = acc;
          }
          break;
        case Aggregator::min:
          for (Index j = 0; j < w; ++j) {
            T acc = contrib(ks[0], j);
            for (std::size_t i = 1; i < ks.size(); ++i) acc = std::min(acc, contrib(ks[i], j));
            cell[j] = acc;
          }
          break;
        case Aggregator::softmax_weighted: {
          if constexpr (std::is_floating_point_v<T>) {
            std::vector<double> scores;
            for (Index k : ks) {
              const T* ar = A.row(p * K + k);
              const T* br = B.row(k * Q + q);
              scores.push_back(score(std::span<const T>(ar, static_cast<std::size_t>(A.width)),
                                     std::span<const T>(br, static_cast<std::size_t>(B.width))));
            }
            double mx = scores[0];
            for (double s : scores) mx = std::max(mx, s);
            double denom = 0;
            for (double s : scores) denom += std::exp(s - mx);
            for (Index j = 0; j < w; ++j) {
              double acc = 0;
              for (std::size_t i = 0; i < ks.size(); ++i)
                acc += std::exp(scores[i] - mx) * static_cast<double>(contrib(ks[i], j));
              cell[j] = static_cast<T>(acc / denom);
            }
          }
          break;
        }
      }
    }
  }
  return out;
}

template <typename T>
DenseRef<T> add_ref(const DenseRef<T>& A, const DenseRef<T>& B) {
  DenseRef<T> out(A.shape, A.width);
  for (Index p = 0; p < out.positions(); ++p) {
    if (!A.exist[static_cast<std::size_t>(p)] && !B.exist[static_cast<std::size_t>(p)]) continue;
    out.exist[static_cast<std::size_t>(p)] = 1;
    for (Index j = 0; j < out.width; ++j)
      out.row(p)[j] = A.row(p)[j] + B.row(p)[j];
  }
  return out;
}

template <typename T>
DenseRef<T> reduce_ref(const DenseRef<T>& t, Index dim, Aggregator agg) {
  const Index rank = static_cast<Index>(t.shape.size());
  Shape out_shape;
  for (Index d = 0; d < rank; ++d)
    if (d != dim) out_shape.push_back(t.shape[static_cast<std::size_t>(d)]);
  const Index D = t.shape[static_cast<std::size_t>(dim)];
  Index inner = 1;
  for (Index d = dim + 1; d < rank; ++d) inner *= t.shape[static_cast<std::size_t>(d)];
  const Index outer = t.positions() / (D * inner);
  DenseRef<T> out(out_shape, t.width);
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      std::vector<Index> ds;
      for (Index d = 0; d < D; ++d)
        if (t.exist[static_cast<std::size_t>((o * D + d) * inner + i)]) ds.push_back(d);
      if (ds.empty()) continue;
      const Index oflat = o * inner + i;
      out.exist[static_cast<std::size_t>(oflat)] = 1;
      T* cell = out.row(oflat);
      for (Index j = 0; j < t.width; ++j) {
        T acc = t.row((o * D + ds[0]) * inner + i)[j];
        for (std::size_t s = 1; s < ds.size(); ++s) {
          const T v = t.row((o * D + ds[s]) * inner + i)[j];
          if (agg == Aggregator::max)
            acc = std::max(acc, v);
          else if (agg == Aggregator::min)
            acc = std::min(acc, v);
          else
            acc += v;
        }
        if (agg == Aggregator::mean) acc /= static_cast<T>(ds.size());
        cell[j] = acc;
      }
    }
  }
  return out;
}

template <typename T>
DenseRef<T> expand_ref(const DenseRef<T>& t, Index dim, const DenseRef<std::uint8_t>& target) {
  DenseRef<T> out(target.shape, t.width);
  const Index rank = static_cast<Index>(target.shape.size());
  const Shape tstr = row_major_strides(target.shape);
  const Shape sstr = row_major_strides(t.shape);
  std::vector<Index> pos(static_cast<std::size_t>(rank), 0);
  for (Index flat = 0; flat < out.positions(); ++flat) {
    if (target.exist[static_cast<std::size_t>(flat)]) {
      out.exist[static_cast<std::size_t>(flat)] = 1;
      Index sflat = 0, d2 = 0;
      for (Index d = 0; d < rank; ++d)
        if (d != dim) sflat += pos[static_cast<std::size_t>(d)] * sstr[static_cast<std::size_t>(d2++)];
      if (t.exist[static_cast<std::size_t>(sflat)])
        for (Index j = 0; j < t.width; ++j) out.row(flat)[j] = t.row(sflat)[j];
    }
    for (Index d = rank - 1; d >= 0; --d) {
      if (++pos[static_cast<std::size_t>(d)] < target.shape[static_cast<std::size_t>(d)]) break;
      pos[static_cast<std::size_t>(d)] = 0;
    }
  }
  (void)tstr;
  return out;
}

// All-pairs shortest path distances by Floyd-Warshall (-1 = unreachable).
// Deliberately a different algorithm than the samplers' BFS.
inline std::vector<std::vector<Index>> spd_floyd_warshall(const Graph& g) {
  const Index inf = g.n + 1;
  std::vector<std::vector<Index>> d(static_cast<std::size_t>(g.n),
                                    std::vector<Index>(static_cast<std::size_t>(g.n), inf));
  for (Index i = 0; i < g.n; ++i) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
  for (auto [u, v] : g.edges) {
    d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    d[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  }
  for (Index k = 0; k < g.n; ++k)
    for (Index i = 0; i < g.n; ++i)
      for (Index j = 0; j < g.n; ++j)
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            std::min(d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                     d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                         d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
  for (auto& row : d)
    for (auto& v : row)
      if (v >= inf) v = -1;
  return d;
}

// Naive within-subgraph message passing (sum), evaluated only on the tuple
// support: out[i][j] = sum over k with (i,k) in support(H) and (k,j) in E.
template <typename T>
DenseRef<T> message_loop_ref(const DenseRef<T>& H, const Graph& g) {
  const Index n = g.n;
  auto adj = adjacency_list(g);
  DenseRef<T> out(H.shape, H.width);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index flat = i * n + j;
      if (!H.exist[static_cast<std::size_t>(flat)]) continue;
      out.exist[static_cast<std::size_t>(flat)] = 1;
      for (Index k : adj[static_cast<std::size_t>(j)]) {
        if (!H.exist[static_cast<std::size_t>(i * n + k)]) continue;
        for (Index c = 0; c < H.width; ++c) out.row(flat)[c] += H.row(i * n + k)[c];
      }
    }
  }
  return out;
}

template <typename T>
bool ref_equal(const DenseRef<T>& a, const DenseRef<T>& b, double rel_tol,
               std::string* why = nullptr) {
  if (a.shape != b.shape || a.width != b.width) {
    if (why) *why = "shape mismatch";
    return false;
  }
  for (Index p = 0; p < a.positions(); ++p) {
    if (a.exist[static_cast<std::size_t>(p)] != b.exist[static_cast<std::size_t>(p)]) {
      if (why) *why = "existence differs at position " + std::to_string(p);
      return false;
    }
    if (!a.exist[static_cast<std::size_t>(p)]) continue;
    for (Index j = 0; j < a.width; ++j) {
      const double x = static_cast<double>(a.row(p)[j]);
      const double y = static_cast<double>(b.row(p)[j]);
      const double scale = std::max({std::abs(x), std::abs(y), 1.0});
      if (std::abs(x - y) > rel_tol * scale) {
        if (why)
          *why = "value differs at position " + std::to_string(p) + " channel " +
                 std::to_string(j) + ": " + std::to_string(x) + " vs " + std::to_string(y);
        return false;
      }
    }
  }
  return true;
}

}  // namespace hot::oracle
