// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>

#include "hot/sparse_tensor.hpp"

namespace hot {

// Reduction rule for matmul contractions and dimension collapses. Mean over
// an empty contributing set yields 0 by convention; max/min over an empty set
// yields an absent element (sparse) or a mask-false slot (dense).
enum class Aggregator { sum, mean, max, min, softmax_weighted };

inline std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::sum: return "sum";
    case Aggregator::mean: return "mean";
    case Aggregator::max: return "max";
    case Aggregator::min: return "min";
    case Aggregator::softmax_weighted: return "softmax";
  }
  return "?";
}

inline Aggregator aggregator_from_string(const std::string& s) {
  if (s == "sum") return Aggregator::sum;
  if (s == "mean") return Aggregator::mean;
  if (s == "max") return Aggregator::max;
  if (s == "min") return Aggregator::min;
  if (s == "softmax") return Aggregator::softmax_weighted;
  throw ParseError("unknown aggregator '" + s + "'");
}

// Score hook for the softmax-weighted aggregator: maps the two operand value
// rows of one contribution to a scalar attention score. Weights are the
// softmax of the scores over the contributing set, stabilized by the
// per-group maximum.
template <typename T>
using ScoreFn = std::function<double(std::span<const T>, std::span<const T>)>;

// Restricts which output positions of a sparse-path matmul/expand are
// computed. A non-owning view of a coalesced index set: keep the source
// tensor alive across the call.
struct OutputPattern {
  Shape sparse_shape;
  Index sparse_dim = 0;
  Index nnz = 0;
  const Index* idx = nullptr;

  OutputPattern() = default;

  template <typename T>
  static OutputPattern of(const SparseTensor<T>& t) {
    OutputPattern p;
    p.sparse_shape = t.sparse_shape();
    p.sparse_dim = t.sparse_dim();
    p.nnz = t.nnz();
    p.idx = t.indices().data();
    return p;
  }

  std::span<const Index> tuple(Index e) const {
    return {idx + e * sparse_dim, static_cast<std::size_t>(sparse_dim)};
  }
};

}  // namespace hot
