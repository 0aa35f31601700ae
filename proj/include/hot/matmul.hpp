// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <type_traits>

#include "hot/aggregator.hpp"
#include "hot/convert.hpp"
#include "hot/masked_tensor.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {
namespace detail {

// Exactly one operand may carry a dense (hidden) shape; its rows are scaled
// by the other operand's scalar entries. In channelwise mode both operands
// carry the same dense shape and rows are multiplied elementwise.
inline Shape matmul_dense_shape(const Shape& da, const Shape& db, bool channelwise) {
  if (channelwise) {
    if (da != db) throw ShapeError("channelwise matmul requires matching dense shapes");
    return da;
  }
  if (!da.empty() && !db.empty())
    throw UnsupportedError("matmul: both operands carry a dense shape");
  return da.empty() ? db : da;
}

// Row-wise merge over B's leading index with a per-output-row accumulator
// keyed by the flattened suffix. Output is coalesced by construction: groups
// follow A's prefix order and cells are emitted in ascending column order.
template <typename T>
SparseTensor<T> spspmm(const SparseTensor<T>& A, const SparseTensor<T>& B, Aggregator agg,
                       const OutputPattern* pattern, const ScoreFn<T>& score, bool channelwise) {
  const Index sdA = A.sparse_dim(), sdB = B.sparse_dim();
  if (sdA < 1 || sdB < 1) throw RankError("matmul operands need at least one sparse dim");
  if (A.sparse_shape().back() != B.sparse_shape().front())
    throw ShapeError("matmul inner dimensions disagree: " + shape_str(A.sparse_shape()) + " x " +
                     shape_str(B.sparse_shape()));
  const Index out_sdim = sdA + sdB - 2;
  if (out_sdim < 1) throw RankError("matmul would contract away every sparse dim");

  Shape out_dshape = matmul_dense_shape(A.dense_shape(), B.dense_shape(), channelwise);
  const Index w = shape_product(out_dshape);
  const bool a_dense = channelwise ? false : A.width() == w && !A.dense_shape().empty();

  Shape out_sshape(A.sparse_shape().begin(), A.sparse_shape().end() - 1);
  out_sshape.insert(out_sshape.end(), B.sparse_shape().begin() + 1, B.sparse_shape().end());

  if (agg == Aggregator::softmax_weighted) {
    if (!std::is_floating_point_v<T>)
      throw UnsupportedError("softmax-weighted aggregation needs floating-point values");
    if (!score) throw UnsupportedError("softmax-weighted aggregation needs a score function");
  }
  if (pattern) {
    if (pattern->sparse_dim != out_sdim || pattern->sparse_shape != out_sshape)
      throw ShapeError("output pattern shape does not match the product shape");
  }

  // CSR-style offsets over B's leading index.
  const Index K = B.sparse_shape().front();
  std::vector<Index> bptr(static_cast<std::size_t>(K) + 1, 0);
  for (Index f = 0; f < B.nnz(); ++f) ++bptr[static_cast<std::size_t>(B.index(f, 0)) + 1];
  for (Index k = 0; k < K; ++k) bptr[static_cast<std::size_t>(k) + 1] += bptr[static_cast<std::size_t>(k)];

  const Shape suffix_shape(B.sparse_shape().begin() + 1, B.sparse_shape().end());
  const Shape suffix_strides = row_major_strides(suffix_shape);
  const Index S = shape_product(suffix_shape);
  const Index suffix_dims = sdB - 1;

  auto b_suffix_flat = [&](Index f) {
    Index c = 0;
    for (Index d = 0; d < suffix_dims; ++d) c += B.index(f, d + 1) * suffix_strides[d];
    return c;
  };
  auto pattern_suffix_flat = [&](std::span<const Index> tup) {
    Index c = 0;
    for (Index d = 0; d < suffix_dims; ++d) c += tup[sdA - 1 + d] * suffix_strides[d];
    return c;
  };

  const bool use_soft = agg == Aggregator::softmax_weighted;
  std::vector<T> vals(use_soft ? 0 : static_cast<std::size_t>(S * w));
  std::vector<double> dvals(use_soft ? static_cast<std::size_t>(S * w) : 0);
  std::vector<double> maxsc(use_soft ? static_cast<std::size_t>(S) : 0);
  std::vector<double> sumw(use_soft ? static_cast<std::size_t>(S) : 0);
  std::vector<Index> cnt(agg == Aggregator::mean ? static_cast<std::size_t>(S) : 0);
  std::vector<Index> stamp(static_cast<std::size_t>(S), -1);
  std::vector<Index> pstamp(pattern ? static_cast<std::size_t>(S) : 0, -1);
  std::vector<Index> touched;

  std::vector<Index> out_idx;
  std::vector<T> out_vals;

  const Index prefix_dims = sdA - 1;
  Index pg = 0;  // pattern cursor
  Index epoch = 0;

  auto prefix_cmp = [&](std::span<const Index> a, std::span<const Index> b) {
    for (Index d = 0; d < prefix_dims; ++d) {
      if (a[d] != b[d]) return a[d] < b[d] ? -1 : 1;
    }
    return 0;
  };

  Index e0 = 0;
  while (e0 < A.nnz()) {
    Index e1 = e0 + 1;
    while (e1 < A.nnz() && prefix_cmp(A.index_tuple(e0), A.index_tuple(e1)) == 0) ++e1;
    auto prefix = A.index_tuple(e0);

    Index ps = -1, pe = -1;
    if (pattern) {
      while (pg < pattern->nnz && prefix_cmp(pattern->tuple(pg), prefix) < 0) ++pg;
      ps = pg;
      while (pg < pattern->nnz && prefix_cmp(pattern->tuple(pg), prefix) == 0) {
        pstamp[static_cast<std::size_t>(pattern_suffix_flat(pattern->tuple(pg)))] = epoch;
        ++pg;
      }
      pe = pg;
    }

    touched.clear();
    for (Index e = e0; e < e1; ++e) {
      const Index k = A.index(e, sdA - 1);
      auto arow = A.value_row(e);
      for (Index f = bptr[static_cast<std::size_t>(k)]; f < bptr[static_cast<std::size_t>(k) + 1];
           ++f) {
        const Index c = b_suffix_flat(f);
        if (pattern && pstamp[static_cast<std::size_t>(c)] != epoch) continue;
        auto brow = B.value_row(f);
        auto prod_at = [&](Index j) -> T {
          if (channelwise) return arow[static_cast<std::size_t>(j)] * brow[static_cast<std::size_t>(j)];
          if (a_dense) return arow[static_cast<std::size_t>(j)] * brow[0];
          return arow[0] * brow[static_cast<std::size_t>(j)];
        };
        const bool first = stamp[static_cast<std::size_t>(c)] != epoch;
        if (first) {
          stamp[static_cast<std::size_t>(c)] = epoch;
          touched.push_back(c);
        }
        if (use_soft) {
          if constexpr (std::is_floating_point_v<T>) {
            const double s = score(arow, brow);
            double* cell = dvals.data() + c * w;
            if (first) {
              maxsc[static_cast<std::size_t>(c)] = s;
              sumw[static_cast<std::size_t>(c)] = 1.0;
              for (Index j = 0; j < w; ++j) cell[j] = static_cast<double>(prod_at(j));
            } else if (s <= maxsc[static_cast<std::size_t>(c)]) {
              const double ew = std::exp(s - maxsc[static_cast<std::size_t>(c)]);
              sumw[static_cast<std::size_t>(c)] += ew;
              for (Index j = 0; j < w; ++j) cell[j] += ew * static_cast<double>(prod_at(j));
            } else {
              const double ef = std::exp(maxsc[static_cast<std::size_t>(c)] - s);
              sumw[static_cast<std::size_t>(c)] = sumw[static_cast<std::size_t>(c)] * ef + 1.0;
              for (Index j = 0; j < w; ++j)
                cell[j] = cell[j] * ef + static_cast<double>(prod_at(j));
              maxsc[static_cast<std::size_t>(c)] = s;
            }
          }
        } else {
          T* cell = vals.data() + c * w;
          switch (agg) {
            case Aggregator::sum:
              if (first)
                for (Index j = 0; j < w; ++j) cell[j] = prod_at(j);
              else
                for (Index j = 0; j < w; ++j) cell[j] += prod_at(j);
              break;
            case Aggregator::mean:
              if (first) {
                for (Index j = 0; j < w; ++j) cell[j] = prod_at(j);
                cnt[static_cast<std::size_t>(c)] = 1;
              } else {
                for (Index j = 0; j < w; ++j) cell[j] += prod_at(j);
                ++cnt[static_cast<std::size_t>(c)];
              }
              break;
            case Aggregator::max:
              if (first)
                for (Index j = 0; j < w; ++j) cell[j] = prod_at(j);
              else
                for (Index j = 0; j < w; ++j) cell[j] = std::max(cell[j], prod_at(j));
              break;
            case Aggregator::min:
              if (first)
                for (Index j = 0; j < w; ++j) cell[j] = prod_at(j);
              else
                for (Index j = 0; j < w; ++j) cell[j] = std::min(cell[j], prod_at(j));
              break;
            default:
              break;
          }
        }
      }
    }

    auto emit = [&](Index c, std::span<const Index> suffix_tuple) {
      for (Index d = 0; d < prefix_dims; ++d) out_idx.push_back(prefix[d]);
      for (Index d = 0; d < suffix_dims; ++d) out_idx.push_back(suffix_tuple[d]);
      if (use_soft) {
        const double* cell = dvals.data() + c * w;
        const double denom = sumw[static_cast<std::size_t>(c)];
        for (Index j = 0; j < w; ++j) out_vals.push_back(static_cast<T>(cell[j] / denom));
      } else if (agg == Aggregator::mean) {
        const T* cell = vals.data() + c * w;
        const Index n = cnt[static_cast<std::size_t>(c)];
        for (Index j = 0; j < w; ++j) out_vals.push_back(cell[j] / static_cast<T>(n));
      } else {
        const T* cell = vals.data() + c * w;
        for (Index j = 0; j < w; ++j) out_vals.push_back(cell[j]);
      }
    };

    if (pattern) {
      for (Index p = ps; p < pe; ++p) {
        auto tup = pattern->tuple(p);
        const Index c = pattern_suffix_flat(tup);
        if (stamp[static_cast<std::size_t>(c)] == epoch)
          emit(c, tup.subspan(static_cast<std::size_t>(prefix_dims)));
      }
    } else {
      std::sort(touched.begin(), touched.end());
      std::vector<Index> suffix_tuple(static_cast<std::size_t>(suffix_dims));
      for (Index c : touched) {
        Index rem = c;
        for (Index d = 0; d < suffix_dims; ++d) {
          suffix_tuple[static_cast<std::size_t>(d)] = rem / suffix_strides[d];
          rem %= suffix_strides[d];
        }
        emit(c, suffix_tuple);
      }
    }

    ++epoch;
    e0 = e1;
  }

  const Index out_nnz = static_cast<Index>(out_idx.size()) / std::max<Index>(out_sdim, 1);
  return SparseTensor<T>(std::move(out_sshape), std::move(out_dshape), std::move(out_idx),
                         RowMatrix<T>(out_nnz, w, std::move(out_vals)));
}

struct MaskBits {
  Index rows = 0, bits = 0, words = 0;
  std::vector<std::uint64_t> v;

  MaskBits(Index r, Index b) : rows(r), bits(b), words((b + 63) / 64), v(static_cast<std::size_t>(r * words), 0) {}

  void set(Index r, Index b) { v[static_cast<std::size_t>(r * words + b / 64)] |= 1ULL << (b % 64); }
  const std::uint64_t* row(Index r) const { return v.data() + r * words; }
  std::uint64_t* row(Index r) { return v.data() + r * words; }
};

// Dense (masked) product. Data at mask-false slots is guaranteed 0, so the
// sum/mean numerators run over the raw buffers; the output mask is the
// structural product support, computed on bitsets.
template <typename T>
MaskedTensor<T> mammm(const MaskedTensor<T>& A, const MaskedTensor<T>& B, Aggregator agg,
                      bool batched, const ScoreFn<T>& score, bool channelwise) {
  Shape amd = A.masked_shape(), bmd = B.masked_shape();
  Index nb = 1;
  if (batched) {
    if (amd.size() < 2 || bmd.size() < 2) throw RankError("batched matmul needs a batch dim");
    if (amd[0] != bmd[0]) throw ShapeError("batch dims disagree");
    nb = amd[0];
    amd.erase(amd.begin());
    bmd.erase(bmd.begin());
  }
  if (amd.empty() || bmd.empty()) throw RankError("matmul operands need a masked dim");
  const Index K = amd.back();
  if (K != bmd.front()) throw ShapeError("matmul inner dimensions disagree");

  Shape out_dshape = matmul_dense_shape(A.dense_shape(), B.dense_shape(), channelwise);
  const Index w = shape_product(out_dshape);
  const Index wA = A.width(), wB = B.width();
  const bool a_dense = channelwise ? false : wA == w && !A.dense_shape().empty();

  Shape a_pre(amd.begin(), amd.end() - 1);
  Shape b_suf(bmd.begin() + 1, bmd.end());
  const Index P = shape_product(a_pre);
  const Index Q = shape_product(b_suf);

  Shape out_ms;
  if (batched) out_ms.push_back(nb);
  out_ms.insert(out_ms.end(), a_pre.begin(), a_pre.end());
  out_ms.insert(out_ms.end(), b_suf.begin(), b_suf.end());
  if (out_ms.empty()) throw RankError("matmul would contract away every masked dim");

  if (agg == Aggregator::softmax_weighted) {
    if (!std::is_floating_point_v<T>)
      throw UnsupportedError("softmax-weighted aggregation needs floating-point values");
    if (!score) throw UnsupportedError("softmax-weighted aggregation needs a score function");
  }

  typename MaskedTensor<T>::Builder out(out_ms, out_dshape);

  std::vector<Index> cnt(agg == Aggregator::mean ? static_cast<std::size_t>(Q) : 0);

  for (Index b = 0; b < nb; ++b) {
    const T* Ad = A.data().data() + b * P * K * wA;
    const std::uint8_t* Am = A.mask().data() + b * P * K;
    const T* Bd = B.data().data() + b * K * Q * wB;
    const std::uint8_t* Bm = B.mask().data() + b * K * Q;
    T* Od = out.data.data() + b * P * Q * w;
    std::uint8_t* Om = out.mask.data() + b * P * Q;

    MaskBits bbits(K, Q);
    for (Index k = 0; k < K; ++k)
      for (Index q = 0; q < Q; ++q)
        if (Bm[k * Q + q]) bbits.set(k, q);

    // structural output mask
    std::vector<std::uint64_t> acc(static_cast<std::size_t>(bbits.words));
    for (Index p = 0; p < P; ++p) {
      std::fill(acc.begin(), acc.end(), 0);
      for (Index k = 0; k < K; ++k) {
        if (!Am[p * K + k]) continue;
        const std::uint64_t* brow = bbits.row(k);
        for (Index t = 0; t < bbits.words; ++t) acc[static_cast<std::size_t>(t)] |= brow[t];
      }
      for (Index t = 0; t < bbits.words; ++t) {
        std::uint64_t word = acc[static_cast<std::size_t>(t)];
        while (word) {
          const Index q = t * 64 + std::countr_zero(word);
          word &= word - 1;
          Om[p * Q + q] = 1;
        }
      }
    }

    if (agg == Aggregator::sum || agg == Aggregator::mean) {
      for (Index p = 0; p < P; ++p) {
        T* orow = Od + p * Q * w;
        for (Index k = 0; k < K; ++k) {
          if (channelwise) {
            if (!Am[p * K + k]) continue;
            const T* arow = Ad + (p * K + k) * wA;
            const T* bkq = Bd + k * Q * wB;
            for (Index q = 0; q < Q; ++q)
              for (Index j = 0; j < w; ++j) orow[q * w + j] += arow[j] * bkq[q * w + j];
          } else if (a_dense) {
            if (!Am[p * K + k]) continue;
            const T* arow = Ad + (p * K + k) * wA;
            const T* bk = Bd + k * Q;
            for (Index q = 0; q < Q; ++q) {
              const T s = bk[q];
              if (s == T(0)) continue;
              T* cell = orow + q * w;
              for (Index j = 0; j < w; ++j) cell[j] += s * arow[j];
            }
          } else {
            const T s = Ad[p * K + k];
            if (s == T(0)) continue;
            const T* bk = Bd + k * Q * wB;
            for (Index q = 0; q < Q * w; ++q) orow[q] += s * bk[q];
          }
        }
        if (agg == Aggregator::mean) {
          std::fill(cnt.begin(), cnt.end(), 0);
          for (Index k = 0; k < K; ++k) {
            if (!Am[p * K + k]) continue;
            const std::uint64_t* brow = bbits.row(k);
            for (Index t = 0; t < bbits.words; ++t) {
              std::uint64_t word = brow[t];
              while (word) {
                const Index q = t * 64 + std::countr_zero(word);
                word &= word - 1;
                ++cnt[static_cast<std::size_t>(q)];
              }
            }
          }
          for (Index q = 0; q < Q; ++q)
            if (cnt[static_cast<std::size_t>(q)] > 0) {
              T* cell = orow + q * w;
              for (Index j = 0; j < w; ++j) cell[j] /= static_cast<T>(cnt[static_cast<std::size_t>(q)]);
            }
        }
      }
    } else {
      // max / min / softmax: per-cell walk over the contributing set
      MaskBits abits(P, K);
      for (Index p = 0; p < P; ++p)
        for (Index k = 0; k < K; ++k)
          if (Am[p * K + k]) abits.set(p, k);
      MaskBits bcols(Q, K);
      for (Index k = 0; k < K; ++k)
        for (Index q = 0; q < Q; ++q)
          if (Bm[k * Q + q]) bcols.set(q, k);

      std::vector<double> cell(static_cast<std::size_t>(w));
      for (Index p = 0; p < P; ++p) {
        for (Index q = 0; q < Q; ++q) {
          if (!Om[p * Q + q]) continue;
          T* ocell = Od + (p * Q + q) * w;
          bool first = true;
          double mx = 0, sw = 0;
          const std::uint64_t* ar = abits.row(p);
          const std::uint64_t* bc = bcols.row(q);
          for (Index t = 0; t < abits.words; ++t) {
            std::uint64_t word = ar[t] & bc[t];
            while (word) {
              const Index k = t * 64 + std::countr_zero(word);
              word &= word - 1;
              const T* arow = Ad + (p * K + k) * wA;
              const T* brow = Bd + (k * Q + q) * wB;
              auto prod_at = [&](Index j) -> T {
                if (channelwise) return arow[j] * brow[j];
                if (a_dense) return arow[j] * brow[0];
                return arow[0] * brow[j];
              };
              if (agg == Aggregator::softmax_weighted) {
                if constexpr (std::is_floating_point_v<T>) {
                  std::span<const T> aspan{arow, static_cast<std::size_t>(wA)};
                  std::span<const T> bspan{brow, static_cast<std::size_t>(wB)};
                  const double s = score(aspan, bspan);
                  if (first) {
                    mx = s;
                    sw = 1.0;
                    for (Index j = 0; j < w; ++j) cell[static_cast<std::size_t>(j)] = prod_at(j);
                  } else if (s <= mx) {
                    const double ew = std::exp(s - mx);
                    sw += ew;
                    for (Index j = 0; j < w; ++j)
                      cell[static_cast<std::size_t>(j)] += ew * static_cast<double>(prod_at(j));
                  } else {
                    const double ef = std::exp(mx - s);
                    sw = sw * ef + 1.0;
                    for (Index j = 0; j < w; ++j)
                      cell[static_cast<std::size_t>(j)] =
                          cell[static_cast<std::size_t>(j)] * ef + static_cast<double>(prod_at(j));
                    mx = s;
                  }
                }
              } else if (first) {
                for (Index j = 0; j < w; ++j) ocell[j] = prod_at(j);
              } else if (agg == Aggregator::max) {
                for (Index j = 0; j < w; ++j) ocell[j] = std::max(ocell[j], prod_at(j));
              } else {
                for (Index j = 0; j < w; ++j) ocell[j] = std::min(ocell[j], prod_at(j));
              }
              first = false;
            }
          }
          if (agg == Aggregator::softmax_weighted && !first) {
            for (Index j = 0; j < w; ++j)
              ocell[j] = static_cast<T>(cell[static_cast<std::size_t>(j)] / sw);
          }
        }
      }
    }
  }
  return out.finish();
}

}  // namespace detail

// sparse x sparse -> sparse. Support is the structural product support (any
// matching inner index with existing entries contributes, value 0 included),
// restricted to `pattern` when given.
template <typename T>
SparseTensor<T> matmul(const SparseTensor<T>& A, const SparseTensor<T>& B, Aggregator agg,
                       const OutputPattern* pattern = nullptr, const ScoreFn<T>& score = {}) {
  return detail::spspmm(A, B, agg, pattern, score, false);
}

// masked x masked -> masked. With `batched`, the leading masked dim of both
// operands is a shared batch axis.
template <typename T>
MaskedTensor<T> matmul(const MaskedTensor<T>& A, const MaskedTensor<T>& B, Aggregator agg,
                       bool batched = false, const ScoreFn<T>& score = {}) {
  return detail::mammm(A, B, agg, batched, score, false);
}

// mixed combinations (unbatched); the masked operand's mask is its support
template <typename T>
MaskedTensor<T> matmul(const SparseTensor<T>& A, const MaskedTensor<T>& B, Aggregator agg,
                       const ScoreFn<T>& score = {}) {
  return sparse_to_masked(detail::spspmm(A, masked_to_sparse(B), agg, nullptr, score, false));
}

template <typename T>
MaskedTensor<T> matmul(const MaskedTensor<T>& A, const SparseTensor<T>& B, Aggregator agg,
                       const ScoreFn<T>& score = {}) {
  return sparse_to_masked(detail::spspmm(masked_to_sparse(A), B, agg, nullptr, score, false));
}

template <typename T>
SparseTensor<T> matmul(const SparseTensor<T>& A, const MaskedTensor<T>& B, Aggregator agg,
                       const OutputPattern& pattern, const ScoreFn<T>& score = {}) {
  return detail::spspmm(A, masked_to_sparse(B), agg, &pattern, score, false);
}

template <typename T>
SparseTensor<T> matmul(const MaskedTensor<T>& A, const SparseTensor<T>& B, Aggregator agg,
                       const OutputPattern& pattern, const ScoreFn<T>& score = {}) {
  return detail::spspmm(masked_to_sparse(A), B, agg, &pattern, score, false);
}

// Channelwise contraction: both operands carry the same dense shape and
// contributions multiply elementwise per channel. This is the tuple-tensor x
// tuple-tensor product; the generic matmul rejects two dense-carrying
// operands.
template <typename T>
SparseTensor<T> matmul_channelwise(const SparseTensor<T>& A, const SparseTensor<T>& B,
                                   Aggregator agg, const OutputPattern* pattern = nullptr) {
  return detail::spspmm(A, B, agg, pattern, ScoreFn<T>{}, true);
}

template <typename T>
MaskedTensor<T> matmul_channelwise(const MaskedTensor<T>& A, const MaskedTensor<T>& B,
                                   Aggregator agg, bool batched = false) {
  return detail::mammm(A, B, agg, batched, ScoreFn<T>{}, true);
}

}  // namespace hot
