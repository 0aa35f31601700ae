// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "hot/sparse_tensor.hpp"

namespace hot {

// Simple undirected graph. Edges are stored symmetrized as canonical (u < v)
// pairs, deduplicated, self-loop free.
struct Graph {
  Index n = 0;
  std::vector<std::pair<Index, Index>> edges;
  RowMatrix<double> node_feat;                  // n x d
  std::optional<RowMatrix<double>> edge_feat;   // per canonical edge
  std::optional<double> target;

  Index num_edges() const { return static_cast<Index>(edges.size()); }
};

struct LoadStats {
  Index graphs = 0;
  Index self_loops_dropped = 0;
  Index duplicate_edges_dropped = 0;
};

// Sorted adjacency lists (both directions of every undirected edge).
inline std::vector<std::vector<Index>> adjacency_list(const Graph& g) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(g.n));
  for (auto [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

// Adjacency as a coalesced n x n sparse tensor with unit values.
inline SparseTensor<double> adjacency_sparse(const Graph& g) {
  std::vector<std::pair<std::vector<Index>, std::vector<double>>> entries;
  entries.reserve(g.edges.size() * 2);
  for (auto [u, v] : g.edges) {
    entries.push_back({{u, v}, {1.0}});
    entries.push_back({{v, u}, {1.0}});
  }
  return SparseTensor<double>::from_entries({g.n, g.n}, {}, entries);
}

// Normalizes an edge list: drops self-loops (counted), symmetrizes and
// deduplicates. Edge features follow the first occurrence of each edge.
inline void symmetrize_edges(Graph& g, const std::vector<std::pair<Index, Index>>& raw,
                             const RowMatrix<double>* raw_feat, LoadStats* stats) {
  std::set<std::pair<Index, Index>> seen;
  std::vector<std::pair<Index, Index>> out;
  std::vector<double> feat;
  Index fcols = raw_feat ? raw_feat->cols : 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [u, v] = raw[i];
    if (u == v) {
      if (stats) ++stats->self_loops_dropped;
      continue;
    }
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second) {
      if (stats) ++stats->duplicate_edges_dropped;
      continue;
    }
    out.push_back(key);
    if (raw_feat) {
      auto r = raw_feat->row(static_cast<Index>(i));
      feat.insert(feat.end(), r.begin(), r.end());
    }
  }
  std::vector<Index> order(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) order[i] = static_cast<Index>(i);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return out[a] < out[b]; });
  g.edges.clear();
  std::vector<double> feat_sorted;
  for (Index i : order) {
    g.edges.push_back(out[static_cast<std::size_t>(i)]);
    if (raw_feat) {
      for (Index c = 0; c < fcols; ++c)
        feat_sorted.push_back(feat[static_cast<std::size_t>(i * fcols + c)]);
    }
  }
  if (raw_feat)
    g.edge_feat = RowMatrix<double>(static_cast<Index>(g.edges.size()), fcols,
                                    std::move(feat_sorted));
}

// One JSON object per line: {"num_nodes": int>=1, "edges": [[u,v],...],
// "node_feat": [[...],...], optional "edge_feat", optional "y"}.
inline std::vector<Graph> load_graphs(const std::string& path, LoadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Graph> graphs;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      Graph g;
      if (!j.contains("num_nodes") || !j["num_nodes"].is_number_integer())
        throw ParseError("missing integer num_nodes");
      g.n = j["num_nodes"].get<Index>();
      if (g.n < 1) throw ParseError("num_nodes must be >= 1 (empty graphs rejected)");

      std::vector<std::pair<Index, Index>> raw;
      for (const auto& e : j.value("edges", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 2) throw ParseError("edge must be a [u,v] pair");
        Index u = e[0].get<Index>(), v = e[1].get<Index>();
        if (u < 0 || u >= g.n || v < 0 || v >= g.n)
          throw BoundsError("edge endpoint out of range");
        raw.push_back({u, v});
      }

      if (!j.contains("node_feat") || !j["node_feat"].is_array())
        throw ParseError("missing node_feat");
      const auto& nf = j["node_feat"];
      if (static_cast<Index>(nf.size()) != g.n)
        throw ParseError("node_feat must have num_nodes rows");
      Index d = nf.empty() ? 0 : static_cast<Index>(nf[0].size());
      RowMatrix<double> feat(g.n, d);
      for (Index r = 0; r < g.n; ++r) {
        const auto& row = nf[static_cast<std::size_t>(r)];
        if (static_cast<Index>(row.size()) != d)
          throw ParseError("node_feat rows have inconsistent length");
        for (Index c = 0; c < d; ++c) feat(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
      g.node_feat = std::move(feat);

      std::optional<RowMatrix<double>> raw_edge_feat;
      if (j.contains("edge_feat") && !j["edge_feat"].is_null()) {
        const auto& ef = j["edge_feat"];
        if (static_cast<Index>(ef.size()) != static_cast<Index>(raw.size()))
          throw ParseError("edge_feat must parallel edges");
        Index dc = ef.empty() ? 0 : static_cast<Index>(ef[0].size());
        RowMatrix<double> efm(static_cast<Index>(raw.size()), dc);
        for (std::size_t r = 0; r < raw.size(); ++r) {
          const auto& row = ef[r];
          if (static_cast<Index>(row.size()) != dc)
            throw ParseError("edge_feat rows have inconsistent length");
          for (Index c = 0; c < dc; ++c)
            efm(static_cast<Index>(r), c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        raw_edge_feat = std::move(efm);
      }

      if (j.contains("y") && !j["y"].is_null()) g.target = j["y"].get<double>();

      symmetrize_edges(g, raw, raw_edge_feat ? &*raw_edge_feat : nullptr, stats);
      graphs.push_back(std::move(g));
      if (stats) ++stats->graphs;
    } catch (const ParseError&) {
      throw;
    } catch (const BoundsError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return graphs;
}

inline void save_graphs(const std::vector<Graph>& graphs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& g : graphs) {
    nlohmann::json j;
    j["num_nodes"] = g.n;
    auto edges = nlohmann::json::array();
    for (auto [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    auto nf = nlohmann::json::array();
    for (Index r = 0; r < g.n; ++r) {
      auto row = nlohmann::json::array();
      for (Index c = 0; c < g.node_feat.cols; ++c) row.push_back(g.node_feat(r, c));
      nf.push_back(std::move(row));
    }
    j["node_feat"] = std::move(nf);
    if (g.edge_feat) {
      auto ef = nlohmann::json::array();
      for (Index r = 0; r < g.edge_feat->rows; ++r) {
        auto row = nlohmann::json::array();
        for (Index c = 0; c < g.edge_feat->cols; ++c) row.push_back((*g.edge_feat)(r, c));
        ef.push_back(std::move(row));
      }
      j["edge_feat"] = std::move(ef);
    }
    if (g.target) j["y"] = *g.target;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace hot
