// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic synthetic graph and tensor generators shared by the CLI, the
// verification suites and the tests.

#include <numeric>

#include "hot/graph.hpp"
#include "hot/rng.hpp"

namespace hot {

inline RowMatrix<double> gen_node_features(Index n, Rng& rng, Index d = 1) {
  RowMatrix<double> f(n, d);
  for (auto& v : f.v) v = static_cast<double>(rng.next_below(4));
  return f;
}

inline void finish_graph(Graph& g, Rng& rng) {
  g.node_feat = gen_node_features(g.n, rng);
  g.target = 0.1 * static_cast<double>(g.num_edges()) / std::max<Index>(g.n, 1);
}

inline Graph gen_path(Index n, Rng& rng) {
  Graph g;
  g.n = n;
  for (Index i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  finish_graph(g, rng);
  return g;
}

inline Graph gen_er(Index n, double p, Rng& rng) {
  Graph g;
  g.n = n;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (rng.next_unit() < p) g.edges.push_back({u, v});
  finish_graph(g, rng);
  return g;
}

// Circulant graph: node i joins i +- 1 .. i +- degree/2 (mod n); an extra
// antipodal chord when degree is odd (n must be even then).
inline Graph gen_regular(Index n, Index degree, Rng& rng) {
  if (degree >= n) throw BoundsError("regular graph needs degree < n");
  if (degree % 2 == 1 && n % 2 == 1)
    throw BoundsError("odd-degree regular graph needs an even node count");
  Graph g;
  g.n = n;
  std::set<std::pair<Index, Index>> seen;
  auto put = [&](Index u, Index v) {
    auto key = std::minmax(u, v);
    if (u != v && seen.insert(key).second) g.edges.push_back(key);
  };
  for (Index i = 0; i < n; ++i) {
    for (Index o = 1; o <= degree / 2; ++o) put(i, (i + o) % n);
    if (degree % 2 == 1) put(i, (i + n / 2) % n);
  }
  std::sort(g.edges.begin(), g.edges.end());
  finish_graph(g, rng);
  return g;
}

// Molecule-like: 10..38 nodes, a random spanning tree plus extra edges,
// degree capped at 4.
inline Graph gen_zinc_like(Rng& rng) {
  Graph g;
  g.n = 10 + static_cast<Index>(rng.next_below(29));
  std::vector<Index> deg(static_cast<std::size_t>(g.n), 0);
  std::set<std::pair<Index, Index>> seen;
  auto try_put = [&](Index u, Index v) {
    if (u == v) return false;
    if (deg[static_cast<std::size_t>(u)] >= 4 || deg[static_cast<std::size_t>(v)] >= 4)
      return false;
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second) return false;
    g.edges.push_back(key);
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
    return true;
  };
  for (Index i = 1; i < g.n; ++i) {
    Index tries = 0;
    while (tries++ < 16 && !try_put(i, static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i))))) {
    }
  }
  const Index extra = g.n / 5;
  for (Index e = 0; e < extra; ++e)
    try_put(static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(g.n))),
            static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(g.n))));
  std::sort(g.edges.begin(), g.edges.end());
  finish_graph(g, rng);
  return g;
}

inline std::vector<Index> random_permutation(Index n, Rng& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (Index i = n - 1; i > 0; --i) {
    Index j = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

// Relabels nodes: new id of node v is perm[v].
inline Graph permute_graph(const Graph& g, const std::vector<Index>& perm) {
  Graph out;
  out.n = g.n;
  std::vector<std::pair<Index, Index>> raw;
  for (auto [u, v] : g.edges)
    raw.push_back({perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]});
  LoadStats stats;
  symmetrize_edges(out, raw, nullptr, &stats);
  out.node_feat = RowMatrix<double>(g.n, g.node_feat.cols);
  for (Index v = 0; v < g.n; ++v) {
    auto src = g.node_feat.row(v);
    std::copy(src.begin(), src.end(), out.node_feat.row(perm[static_cast<std::size_t>(v)]).begin());
  }
  out.target = g.target;
  return out;
}

// Random coalesced tensors for kernel-vs-oracle checks.
template <typename T>
SparseTensor<T> gen_sparse(const Shape& sshape, const Shape& dshape, double density, Rng& rng,
                           bool integer_values) {
  std::vector<std::pair<std::vector<Index>, std::vector<T>>> entries;
  const Index total = shape_product(sshape);
  const Index w = shape_product(dshape);
  std::vector<Index> pos(sshape.size(), 0);
  for (Index flat = 0; flat < total; ++flat) {
    if (rng.next_unit() < density) {
      std::vector<T> row(static_cast<std::size_t>(w));
      for (auto& v : row)
        v = integer_values ? static_cast<T>(static_cast<std::int64_t>(rng.next_below(9)) - 4)
                           : static_cast<T>(rng.next_uniform(-2.0, 2.0));
      entries.push_back({pos, std::move(row)});
    }
    for (Index d = static_cast<Index>(sshape.size()) - 1; d >= 0; --d) {
      if (++pos[static_cast<std::size_t>(d)] < sshape[static_cast<std::size_t>(d)]) break;
      pos[static_cast<std::size_t>(d)] = 0;
    }
  }
  return SparseTensor<T>::from_entries(sshape, dshape, entries);
}

}  // namespace hot
