// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <hot/hot.hpp>

namespace hottest {

template <typename T>
hot::SparseTensor<T> sp(hot::Shape ss, hot::Shape ds,
                        std::vector<std::pair<std::vector<hot::Index>, std::vector<T>>> es) {
  return hot::SparseTensor<T>::from_entries(std::move(ss), std::move(ds), std::move(es));
}

inline hot::SparseTensor<double> sparse_identity(hot::Index n) {
  std::vector<std::pair<std::vector<hot::Index>, std::vector<double>>> es;
  for (hot::Index i = 0; i < n; ++i) es.push_back({{i, i}, {1.0}});
  return hot::SparseTensor<double>::from_entries({n, n}, {}, es);
}

// scalar entry lookup, NaN when absent
template <typename T>
double at(const hot::SparseTensor<T>& t, std::vector<hot::Index> idx) {
  hot::Index e = t.find(idx);
  return e < 0 ? std::numeric_limits<double>::quiet_NaN()
               : static_cast<double>(t.values()(e, 0));
}

inline hot::Graph path_graph(hot::Index n) {
  hot::Rng rng(0);
  hot::Graph g = hot::gen_path(n, rng);
  for (auto& v : g.node_feat.v) v = 1.0;
  return g;
}

// data slots under false mask must hold exactly zero
template <typename T>
bool mask_zero_invariant(const hot::MaskedTensor<T>& t) {
  for (hot::Index p = 0; p < t.positions(); ++p) {
    if (t.mask_at(p)) continue;
    for (T v : t.row(p))
      if (v != T(0)) return false;
  }
  return true;
}

}  // namespace hottest
