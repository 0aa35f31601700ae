// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdio>

#include "hot/models.hpp"

namespace hot {

struct BenchRow {
  std::string arch;
  std::string representation;
  Index n = 0;
  double density = 0.0;
  double time_ms = 0.0;        // median of the timed runs
  std::int64_t peak_bytes = 0; // peak tensor-buffer allocation during a run
  double checksum = 0.0;       // sum of the prediction vector

  static const char* csv_header() {
    return "arch,representation,n,density,time_ms,peak_bytes,checksum";
  }
  std::string csv() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%.6g,%.6g,%lld,%.4f", arch.c_str(),
                  representation.c_str(), static_cast<long long>(n), density, time_ms,
                  static_cast<long long>(peak_bytes), checksum);
    return buf;
  }
};

struct BenchReport {
  std::vector<BenchRow> rows;

  void sort() {
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
      return std::tie(a.arch, a.representation, a.n) < std::tie(b.arch, b.representation, b.n);
    });
  }
  std::string to_csv() const {
    std::string out = std::string(BenchRow::csv_header()) + "\n";
    for (const auto& r : rows) out += r.csv() + "\n";
    return out;
  }
};

namespace detail {

template <typename BatchT>
BenchRow bench_one(const ModelConfig& cfg, const BatchT& batch, Index n, double density,
                   int warmups, int runs) {
  Model model = build_model(cfg, /*feat_dim=*/[&] {
    if constexpr (std::is_same_v<BatchT, SparseBatch>)
      return batch.node_feat.cols;
    else
      return batch.node_feat.width();
  }());
  for (int i = 0; i < warmups; ++i) (void)forward(model, batch);
  std::vector<double> times;
  std::int64_t peak = 0;
  std::vector<double> preds;
  for (int i = 0; i < runs; ++i) {
    MemStats::reset_peak();
    const std::int64_t before = MemStats::current();
    auto t0 = std::chrono::steady_clock::now();
    preds = forward(model, batch);
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    peak = std::max(peak, MemStats::peak() - before);
  }
  std::sort(times.begin(), times.end());
  BenchRow row;
  row.arch = to_string(cfg.arch);
  row.representation = to_string(cfg.representation);
  row.n = n;
  row.density = density;
  row.time_ms = times[times.size() / 2];
  row.peak_bytes = peak;
  for (double p : preds) row.checksum += p;
  return row;
}

}  // namespace detail

// Benchmarks one forward per (arch, representation) over the given batch
// content: median wall time of `runs` timed runs after `warmups` warmups.
inline BenchReport run_bench(const std::vector<PreprocessedGraph>& items,
                             const std::vector<Arch>& archs, bool do_sparse, bool do_dense,
                             const ModelConfig& base, int warmups = 2, int runs = 5) {
  BenchReport report;
  Index n = 0, edges = 0;
  for (const auto& it : items) {
    n += it.graph.n;
    edges += it.graph.num_edges();
  }
  const double density =
      n > 1 ? 2.0 * static_cast<double>(edges) / (static_cast<double>(n) * (n - 1)) : 0.0;

  SparseBatch sbatch;
  if (do_sparse) sbatch = collate_sparse(items);
  DenseBatch dbatch;
  if (do_dense) dbatch = collate_dense(items);

  for (Arch arch : archs) {
    if (do_sparse) {
      ModelConfig cfg = base;
      cfg.arch = arch;
      cfg.representation = Rep::sparse;
      cfg.allow_rep_override = native_representation(arch) != Rep::sparse;
      report.rows.push_back(detail::bench_one(cfg, sbatch, n, density, warmups, runs));
    }
    if (do_dense) {
      if (tuple_order(arch) != 2)
        throw UnsupportedError(to_string(arch) + " has no dense route (order-3 tuples)");
      ModelConfig cfg = base;
      cfg.arch = arch;
      cfg.representation = Rep::dense;
      cfg.allow_rep_override = native_representation(arch) != Rep::dense;
      report.rows.push_back(detail::bench_one(cfg, dbatch, n, density, warmups, runs));
    }
  }
  report.sort();
  return report;
}

}  // namespace hot
