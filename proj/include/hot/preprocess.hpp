// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <zlib.h>

#include "hot/graph.hpp"
#include "hot/sampler.hpp"

namespace hot {

struct PreprocessedGraph {
  Graph graph;
  SparseTensor<std::int64_t> tuple_feature;
};

namespace cachefmt {

// Little-endian binary cache: magic "HOT1", version byte, sampler tag,
// per-graph records, trailing CRC32 of everything before it.
inline constexpr char kMagic[4] = {'H', 'O', 'T', '1'};
inline constexpr std::uint8_t kVersion = 1;

inline void put_u8(std::vector<std::uint8_t>& b, std::uint8_t v) { b.push_back(v); }
inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_i64(std::vector<std::uint8_t>& b, std::int64_t v) {
  put_u64(b, static_cast<std::uint64_t>(v));
}
inline void put_f64(std::vector<std::uint8_t>& b, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(b, bits);
}

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string bytes(std::size_t len) {
    need(len);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  void need(std::size_t k) const {
    if (pos_ + k > n_) throw IoError("cache truncated");
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

inline void put_record(std::vector<std::uint8_t>& b, const PreprocessedGraph& pg) {
  const Graph& g = pg.graph;
  put_u64(b, static_cast<std::uint64_t>(g.n));
  put_u64(b, static_cast<std::uint64_t>(g.edges.size()));
  for (auto [u, v] : g.edges) {
    put_i64(b, u);
    put_i64(b, v);
  }
  put_u64(b, static_cast<std::uint64_t>(g.node_feat.rows));
  put_u64(b, static_cast<std::uint64_t>(g.node_feat.cols));
  for (double v : g.node_feat.v) put_f64(b, v);
  put_u8(b, g.target ? 1 : 0);
  if (g.target) put_f64(b, *g.target);

  const auto& t = pg.tuple_feature;
  put_u8(b, static_cast<std::uint8_t>(t.sparse_dim()));
  for (Index d : t.sparse_shape()) put_i64(b, d);
  put_u8(b, static_cast<std::uint8_t>(t.dense_shape().size()));
  for (Index d : t.dense_shape()) put_i64(b, d);
  put_u64(b, static_cast<std::uint64_t>(t.nnz()));
  for (Index v : t.indices()) put_i64(b, v);
  for (std::int64_t v : t.values().v) put_i64(b, v);
}

inline PreprocessedGraph get_record(Reader& r) {
  PreprocessedGraph pg;
  Graph& g = pg.graph;
  g.n = static_cast<Index>(r.u64());
  const Index ne = static_cast<Index>(r.u64());
  for (Index e = 0; e < ne; ++e) {
    Index u = r.i64(), v = r.i64();
    g.edges.push_back({u, v});
  }
  const Index rows = static_cast<Index>(r.u64());
  const Index cols = static_cast<Index>(r.u64());
  std::vector<double> feat(static_cast<std::size_t>(rows * cols));
  for (auto& v : feat) v = r.f64();
  g.node_feat = RowMatrix<double>(rows, cols, std::move(feat));
  if (r.u8()) g.target = r.f64();

  const Index sdim = r.u8();
  Shape sshape(static_cast<std::size_t>(sdim));
  for (auto& d : sshape) d = r.i64();
  const Index ddim = r.u8();
  Shape dshape(static_cast<std::size_t>(ddim));
  for (auto& d : dshape) d = r.i64();
  const Index nnz = static_cast<Index>(r.u64());
  std::vector<Index> idx(static_cast<std::size_t>(nnz * sdim));
  for (auto& v : idx) v = r.i64();
  const Index width = shape_product(dshape);
  std::vector<std::int64_t> vals(static_cast<std::size_t>(nnz * width));
  for (auto& v : vals) v = r.i64();
  pg.tuple_feature = SparseTensor<std::int64_t>(
      std::move(sshape), std::move(dshape), std::move(idx),
      RowMatrix<std::int64_t>(nnz, width, std::move(vals)));
  return pg;
}

}  // namespace cachefmt

inline std::vector<std::uint8_t> serialize_cache(const std::vector<PreprocessedGraph>& items,
                                                 const std::string& sampler_tag) {
  std::vector<std::uint8_t> b;
  b.insert(b.end(), cachefmt::kMagic, cachefmt::kMagic + 4);
  cachefmt::put_u8(b, cachefmt::kVersion);
  cachefmt::put_u32(b, static_cast<std::uint32_t>(sampler_tag.size()));
  b.insert(b.end(), sampler_tag.begin(), sampler_tag.end());
  cachefmt::put_u64(b, items.size());
  for (const auto& pg : items) cachefmt::put_record(b, pg);
  std::uint32_t crc =
      static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size())));
  cachefmt::put_u32(b, crc);
  return b;
}

// Throws IoError on any structural problem (bad magic, truncation, CRC),
// ParseError on version or sampler-tag mismatch; callers treat both as
// "recompute".
inline std::vector<PreprocessedGraph> deserialize_cache(const std::vector<std::uint8_t>& bytes,
                                                        const std::string& expect_tag) {
  if (bytes.size() < 4 + 1 + 4 + 8 + 4) throw IoError("cache truncated");
  std::uint32_t stored;
  {
    cachefmt::Reader tail(bytes.data() + bytes.size() - 4, 4);
    stored = tail.u32();
  }
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size() - 4)));
  if (crc != stored) throw IoError("cache CRC mismatch");

  cachefmt::Reader r(bytes.data(), bytes.size() - 4);
  if (r.bytes(4) != std::string(cachefmt::kMagic, 4)) throw IoError("bad cache magic");
  std::uint8_t version = r.u8();
  if (version != cachefmt::kVersion)
    throw ParseError("cache version " + std::to_string(version) + " != " +
                     std::to_string(cachefmt::kVersion));
  std::string tag = r.bytes(r.u32());
  if (!expect_tag.empty() && tag != expect_tag)
    throw ParseError("cache sampler tag '" + tag + "' != '" + expect_tag + "'");
  const std::uint64_t count = r.u64();
  std::vector<PreprocessedGraph> items;
  items.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) items.push_back(cachefmt::get_record(r));
  if (r.remaining() != 0) throw IoError("cache has trailing bytes");
  return items;
}

inline void write_cache_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write cache " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("cache write failed: " + path);
}

inline bool read_file_bytes(const std::string& path, std::vector<std::uint8_t>& bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return true;
}

inline std::vector<PreprocessedGraph> load_cache(const std::string& path,
                                                 const std::string& expect_tag = "") {
  std::vector<std::uint8_t> bytes;
  if (!read_file_bytes(path, bytes)) throw IoError("cannot open cache " + path);
  return deserialize_cache(bytes, expect_tag);
}

// Runs the sampler over every graph on `workers` threads. Results keep input
// order and are bytewise independent of the worker count. A valid existing
// cache (same layout version and sampler tag) short-circuits recomputation;
// an invalid one is recomputed and overwritten with a warning.
inline std::vector<PreprocessedGraph> preprocess_parallel(const std::vector<Graph>& graphs,
                                                          const TupleSampler& sampler,
                                                          int workers,
                                                          const std::string& cache_path,
                                                          const std::string& sampler_tag) {
  if (!cache_path.empty()) {
    std::vector<std::uint8_t> bytes;
    if (read_file_bytes(cache_path, bytes)) {
      try {
        return deserialize_cache(bytes, sampler_tag);
      } catch (const std::exception& e) {
        std::cerr << "[hot] stale cache at " << cache_path << " (" << e.what()
                  << "), recomputing\n";
      }
    }
  }

  std::vector<PreprocessedGraph> items(graphs.size());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, std::max<int>(1, static_cast<int>(graphs.size())));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto run = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= graphs.size()) break;
      try {
        items[i] = {graphs[i], sampler(graphs[i])};
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (!cache_path.empty()) write_cache_file(cache_path, serialize_cache(items, sampler_tag));
  return items;
}

}  // namespace hot
