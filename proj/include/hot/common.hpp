// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hot {

using Index = std::int64_t;
using Shape = std::vector<Index>;

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error("shape error: " + msg) {}
};

class BoundsError : public std::runtime_error {
 public:
  explicit BoundsError(const std::string& msg) : std::runtime_error("bounds error: " + msg) {}
};

class RankError : public std::runtime_error {
 public:
  explicit RankError(const std::string& msg) : std::runtime_error("rank error: " + msg) {}
};

class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& msg) : std::runtime_error("unsupported: " + msg) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error("parse error: " + msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error("io error: " + msg) {}
};

inline Index shape_product(const Shape& s) {
  Index p = 1;
  for (Index d : s) p *= d;
  return p;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

// Row-major strides of a shape; stride of the last dim is 1.
inline Shape row_major_strides(const Shape& s) {
  Shape st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
  return st;
}

// ----------------------------------------------------------------------------
// RowMatrix: a dense row-major (rows x cols) buffer. Used for tensor values
// (one row per existing tuple), node features and network weights.
// ----------------------------------------------------------------------------
template <typename T>
struct RowMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<T> v;

  RowMatrix() = default;
  RowMatrix(Index r, Index c) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), T(0)) {}
  RowMatrix(Index r, Index c, std::vector<T> data) : rows(r), cols(c), v(std::move(data)) {
    if (static_cast<Index>(v.size()) != r * c) throw ShapeError("RowMatrix data size mismatch");
  }

  static RowMatrix zeros(Index r, Index c) { return RowMatrix(r, c); }

  T& operator()(Index r, Index c) { return v[static_cast<std::size_t>(r * cols + c)]; }
  const T& operator()(Index r, Index c) const { return v[static_cast<std::size_t>(r * cols + c)]; }

  std::span<T> row(Index r) { return {v.data() + r * cols, static_cast<std::size_t>(cols)}; }
  std::span<const T> row(Index r) const {
    return {v.data() + r * cols, static_cast<std::size_t>(cols)};
  }

  bool operator==(const RowMatrix& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

// ----------------------------------------------------------------------------
// Tensor buffer accounting. Every SparseTensor / MaskedTensor registers its
// buffer footprint here, which gives the benchmark harness a deterministic
// peak-allocation figure per run.
// ----------------------------------------------------------------------------
class MemStats {
 public:
  static void add(std::int64_t bytes) {
    std::int64_t cur = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::int64_t peak = peak_.load(std::memory_order_relaxed);
    while (cur > peak && !peak_.compare_exchange_weak(peak, cur, std::memory_order_relaxed)) {
    }
  }
  static void sub(std::int64_t bytes) { current_.fetch_sub(bytes, std::memory_order_relaxed); }
  static std::int64_t current() { return current_.load(std::memory_order_relaxed); }
  static std::int64_t peak() { return peak_.load(std::memory_order_relaxed); }
  static void reset_peak() { peak_.store(current(), std::memory_order_relaxed); }

 private:
  static inline std::atomic<std::int64_t> current_{0};
  static inline std::atomic<std::int64_t> peak_{0};
};

// RAII token carried by tensor objects.
class MemToken {
 public:
  MemToken() = default;
  explicit MemToken(std::int64_t bytes) : bytes_(bytes) { MemStats::add(bytes_); }
  MemToken(const MemToken& o) : bytes_(o.bytes_) { MemStats::add(bytes_); }
  MemToken(MemToken&& o) noexcept : bytes_(o.bytes_) { o.bytes_ = 0; }
  MemToken& operator=(const MemToken& o) {
    if (this != &o) {
      MemStats::sub(bytes_);
      bytes_ = o.bytes_;
      MemStats::add(bytes_);
    }
    return *this;
  }
  MemToken& operator=(MemToken&& o) noexcept {
    if (this != &o) {
      MemStats::sub(bytes_);
      bytes_ = o.bytes_;
      o.bytes_ = 0;
    }
    return *this;
  }
  ~MemToken() { MemStats::sub(bytes_); }

  void rebind(std::int64_t bytes) {
    MemStats::sub(bytes_);
    bytes_ = bytes;
    MemStats::add(bytes_);
  }

 private:
  std::int64_t bytes_ = 0;
};

}  // namespace hot
