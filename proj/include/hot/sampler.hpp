// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>

#include "hot/graph.hpp"
#include "hot/sparse_tensor.hpp"

namespace hot {

using TupleSampler = std::function<SparseTensor<std::int64_t>(const Graph&)>;

namespace detail {

// BFS distances from `root`, capped at `max_depth` (-1 where unreachable or
// beyond the cap; max_depth < 0 means unbounded).
inline std::vector<Index> bfs_depths(const std::vector<std::vector<Index>>& adj, Index root,
                                     Index max_depth) {
  std::vector<Index> dist(adj.size(), -1);
  std::deque<Index> queue;
  dist[static_cast<std::size_t>(root)] = 0;
  queue.push_back(root);
  while (!queue.empty()) {
    Index u = queue.front();
    queue.pop_front();
    Index du = dist[static_cast<std::size_t>(u)];
    if (max_depth >= 0 && du >= max_depth) continue;
    for (Index v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = du + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace detail

// Rooted hop-limited ego networks: entry (i, j) exists iff the shortest path
// distance from i to j is at most `hop`; its value is that distance. The
// diagonal (i, i) = 0 is always present, so every root's subgraph is induced
// by its hop-ball.
inline SparseTensor<std::int64_t> khop_sampler(const Graph& g, Index hop) {
  if (hop < 1) throw BoundsError("khop_sampler: hop must be >= 1");
  auto adj = adjacency_list(g);
  std::vector<Index> idx;
  std::vector<std::int64_t> vals;
  for (Index i = 0; i < g.n; ++i) {
    auto dist = detail::bfs_depths(adj, i, hop);
    for (Index j = 0; j < g.n; ++j) {
      if (dist[static_cast<std::size_t>(j)] >= 0) {
        idx.push_back(i);
        idx.push_back(j);
        vals.push_back(dist[static_cast<std::size_t>(j)]);
      }
    }
  }
  const Index nnz = static_cast<Index>(vals.size());
  return SparseTensor<std::int64_t>({g.n, g.n}, {}, std::move(idx),
                                    RowMatrix<std::int64_t>(nnz, 1, std::move(vals)));
}

// Order-3 tuples rooted at node pairs: entry (i, j, k) exists iff j is i or a
// neighbor of i and k lies in i's hop-ball. The value packs the distance pair
// (SPD(i,k), SPD(j,k)) as SPD(i,k)*(hop+2) + min(SPD(j,k), hop+1); distances
// beyond the hop cap (or unreachable) saturate at hop+1.
inline SparseTensor<std::int64_t> i2_sampler(const Graph& g, Index hop) {
  if (hop < 1) throw BoundsError("i2_sampler: hop must be >= 1");
  auto adj = adjacency_list(g);
  std::vector<std::vector<Index>> dist(static_cast<std::size_t>(g.n));
  for (Index v = 0; v < g.n; ++v)
    dist[static_cast<std::size_t>(v)] = detail::bfs_depths(adj, v, -1);

  auto packed = [&](Index j, Index k) {
    Index djk = dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    if (djk < 0 || djk > hop) djk = hop + 1;
    return djk;
  };

  std::vector<Index> idx;
  std::vector<std::int64_t> vals;
  for (Index i = 0; i < g.n; ++i) {
    std::vector<Index> roots2;
    roots2.push_back(i);
    for (Index j : adj[static_cast<std::size_t>(i)]) roots2.push_back(j);
    std::sort(roots2.begin(), roots2.end());
    for (Index j : roots2) {
      for (Index k = 0; k < g.n; ++k) {
        Index dik = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        if (dik < 0 || dik > hop) continue;
        idx.push_back(i);
        idx.push_back(j);
        idx.push_back(k);
        vals.push_back(dik * (hop + 2) + packed(j, k));
      }
    }
  }
  const Index nnz = static_cast<Index>(vals.size());
  return SparseTensor<std::int64_t>({g.n, g.n, g.n}, {}, std::move(idx),
                                    RowMatrix<std::int64_t>(nnz, 1, std::move(vals)));
}

// Parses "khop:3" / "i2:2" into a sampler plus its canonical tag.
inline TupleSampler make_sampler(const std::string& desc, std::string* tag_out = nullptr) {
  auto colon = desc.find(':');
  std::string kind = desc.substr(0, colon);
  Index hop = 1;
  if (colon != std::string::npos) {
    try {
      hop = std::stoll(desc.substr(colon + 1));
    } catch (...) {
      throw ParseError("bad sampler descriptor '" + desc + "'");
    }
  }
  if (tag_out) *tag_out = kind + ":" + std::to_string(hop);
  if (kind == "khop") return [hop](const Graph& g) { return khop_sampler(g, hop); };
  if (kind == "i2") return [hop](const Graph& g) { return i2_sampler(g, hop); };
  throw ParseError("unknown sampler '" + kind + "' (expected khop or i2)");
}

}  // namespace hot
