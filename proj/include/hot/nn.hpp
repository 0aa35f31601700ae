// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "hot/common.hpp"
#include "hot/rng.hpp"

namespace hot {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

struct Linear {
  RowMatrix<double> weight;  // out x in
  std::vector<double> bias;  // out

  Index in() const { return weight.cols; }
  Index out() const { return weight.rows; }

  RowMatrix<double> apply(const RowMatrix<double>& x) const {
    if (x.cols != weight.cols) throw ShapeError("linear: input width mismatch");
    RowMatrix<double> y(x.rows, weight.rows);
    for (Index r = 0; r < x.rows; ++r) {
      auto xr = x.row(r);
      auto yr = y.row(r);
      for (Index o = 0; o < weight.rows; ++o) {
        double acc = bias[static_cast<std::size_t>(o)];
        auto wr = weight.row(o);
        for (Index i = 0; i < weight.cols; ++i) acc += wr[i] * xr[i];
        yr[o] = acc;
      }
    }
    return y;
  }
};

inline Linear make_linear(const Rng& stream, Index in, Index out) {
  Linear l;
  l.weight = RowMatrix<double>(out, in);
  l.bias.assign(static_cast<std::size_t>(out), 0.0);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Rng w = stream.fork("weight");
  for (std::size_t i = 0; i < l.weight.v.size(); ++i)
    l.weight.v[i] = limit * (2.0 * static_cast<double>(w.bits(i) >> 11) * 0x1.0p-53 - 1.0);
  Rng b = stream.fork("bias");
  for (std::size_t i = 0; i < l.bias.size(); ++i)
    l.bias[i] = 0.1 * (2.0 * static_cast<double>(b.bits(i) >> 11) * 0x1.0p-53 - 1.0);
  return l;
}

// Per-feature affine standardization computed from the current batch, over
// existing tuples only. group_of_row segments the statistics (whole batch or
// per graph); rows with valid == 0 are excluded and left untouched.
struct Norm {
  std::vector<double> gamma;
  std::vector<double> beta;
  static constexpr double kEps = 1e-5;

  void apply(RowMatrix<double>& x, const std::vector<Index>& group_of_row, Index ngroups,
             const std::uint8_t* valid) const {
    const Index w = x.cols;
    if (static_cast<Index>(gamma.size()) != w) throw ShapeError("norm width mismatch");
    std::vector<double> sum(static_cast<std::size_t>(ngroups * w), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(ngroups * w), 0.0);
    std::vector<Index> cnt(static_cast<std::size_t>(ngroups), 0);
    for (Index r = 0; r < x.rows; ++r) {
      if (valid && !valid[r]) continue;
      const Index g = group_of_row[static_cast<std::size_t>(r)];
      auto xr = x.row(r);
      double* s = sum.data() + g * w;
      double* q = sq.data() + g * w;
      for (Index c = 0; c < w; ++c) {
        s[c] += xr[c];
        q[c] += xr[c] * xr[c];
      }
      ++cnt[static_cast<std::size_t>(g)];
    }
    std::vector<double> mean(sum.size(), 0.0), inv(sum.size(), 0.0);
    for (Index g = 0; g < ngroups; ++g) {
      const Index n = cnt[static_cast<std::size_t>(g)];
      for (Index c = 0; c < w; ++c) {
        if (n == 0) continue;
        const double m = sum[static_cast<std::size_t>(g * w + c)] / static_cast<double>(n);
        const double var =
            sq[static_cast<std::size_t>(g * w + c)] / static_cast<double>(n) - m * m;
        mean[static_cast<std::size_t>(g * w + c)] = m;
        inv[static_cast<std::size_t>(g * w + c)] = 1.0 / std::sqrt(std::max(var, 0.0) + kEps);
      }
    }
    for (Index r = 0; r < x.rows; ++r) {
      if (valid && !valid[r]) continue;
      const Index g = group_of_row[static_cast<std::size_t>(r)];
      auto xr = x.row(r);
      const double* m = mean.data() + g * w;
      const double* iv = inv.data() + g * w;
      for (Index c = 0; c < w; ++c)
        xr[c] = gamma[static_cast<std::size_t>(c)] * (xr[c] - m[c]) * iv[c] +
                beta[static_cast<std::size_t>(c)];
    }
  }
};

inline Norm make_norm(Index width) {
  Norm n;
  n.gamma.assign(static_cast<std::size_t>(width), 1.0);
  n.beta.assign(static_cast<std::size_t>(width), 0.0);
  return n;
}

// Two affine blocks, each followed by standardization and SiLU.
struct Mlp {
  Linear l1, l2;
  Norm n1, n2;

  RowMatrix<double> apply(const RowMatrix<double>& x, const std::vector<Index>& groups,
                          Index ngroups, const std::uint8_t* valid) const {
    RowMatrix<double> h = l1.apply(x);
    n1.apply(h, groups, ngroups, valid);
    for (Index r = 0; r < h.rows; ++r) {
      if (valid && !valid[r]) continue;
      for (auto& v : h.row(r)) v = silu(v);
    }
    RowMatrix<double> y = l2.apply(h);
    n2.apply(y, groups, ngroups, valid);
    for (Index r = 0; r < y.rows; ++r) {
      if (valid && !valid[r]) continue;
      for (auto& v : y.row(r)) v = silu(v);
    }
    return y;
  }
};

inline Mlp make_mlp(const Rng& stream, Index in, Index hidden, Index out) {
  Mlp m;
  m.l1 = make_linear(stream.fork("l1"), in, hidden);
  m.l2 = make_linear(stream.fork("l2"), hidden, out);
  m.n1 = make_norm(hidden);
  m.n2 = make_norm(out);
  return m;
}

inline RowMatrix<double> make_embedding(const Rng& stream, Index table, Index width) {
  RowMatrix<double> e(table, width);
  Rng w = stream.fork("table");
  for (std::size_t i = 0; i < e.v.size(); ++i)
    e.v[i] = static_cast<double>(w.bits(i) >> 11) * 0x1.0p-53 - 0.5;
  return e;
}

}  // namespace hot
