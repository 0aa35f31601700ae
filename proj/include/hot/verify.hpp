// SPDX-License-Identifier: Apache-2.0
#pragma once

// Verification suites: optimized kernels and whole-model forwards checked
// against the brute-force references in hot/oracle.hpp. Shared by `hot
// verify` and the acceptance harness.

#include <cmath>
#include <cstdio>

#include "hot/batch.hpp"
#include "hot/graph_ops.hpp"
#include "hot/models.hpp"
#include "hot/oracle.hpp"
#include "hot/random_gen.hpp"

namespace hot {

struct SuiteResult {
  std::string name;
  bool pass = true;
  Index checks = 0;
  std::string detail;

  void fail(std::string why) {
    if (pass) {
      pass = false;
      detail = std::move(why);
    }
  }
};

namespace detail {

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

template <typename T>
void check_against_oracle(SuiteResult& res, const std::string& what, const SparseTensor<T>& got,
                          const oracle::DenseRef<T>& want, double tol) {
  std::string why;
  if (!oracle::ref_equal(oracle::from_sparse(got), want, tol, &why))
    res.fail(what + ": " + why);
  ++res.checks;
}

template <typename T>
void check_against_oracle(SuiteResult& res, const std::string& what, const MaskedTensor<T>& got,
                          const oracle::DenseRef<T>& want, double tol) {
  std::string why;
  if (!oracle::ref_equal(oracle::from_masked(got), want, tol, &why))
    res.fail(what + ": " + why);
  ++res.checks;
}

template <typename T>
void kernel_trial(SuiteResult& res, Rng& rng, Index n, double density, double tol) {
  const bool integer_values = std::is_integral_v<T>;
  const Shape dshape = rng.next_below(2) == 0 ? Shape{} : Shape{3};
  SparseTensor<T> A = gen_sparse<T>({n, n}, dshape, density, rng, integer_values);
  SparseTensor<T> B = gen_sparse<T>({n, n}, {}, density, rng, integer_values);
  auto Aref = oracle::from_sparse(A);
  auto Bref = oracle::from_sparse(B);
  MaskedTensor<T> Am = sparse_to_masked(A);
  MaskedTensor<T> Bm = sparse_to_masked(B);

  for (Aggregator agg :
       {Aggregator::sum, Aggregator::mean, Aggregator::max, Aggregator::min}) {
    auto want = oracle::matmul_ref(Aref, Bref, agg);
    check_against_oracle(res, "spspmm/" + to_string(agg), matmul(A, B, agg), want, tol);
    check_against_oracle(res, "mamm/" + to_string(agg), matmul(Am, Bm, agg), want, tol);
    check_against_oracle(res, "spmamm/" + to_string(agg), matmul(A, Bm, agg), want, tol);
    check_against_oracle(res, "maspmm/" + to_string(agg), matmul(Am, B, agg), want, tol);
    if (!res.pass) return;
  }

  // representation-type invariants ride along with every trial
  {
    if (!(masked_to_sparse(Am) == A)) res.fail("masked/sparse round trip broke");
    ++res.checks;
    std::vector<std::pair<std::vector<Index>, std::vector<T>>> entries;
    for (Index e = 0; e < A.nnz(); ++e) {
      auto idx = A.index_tuple(e);
      auto row = A.value_row(e);
      entries.push_back({{idx.begin(), idx.end()}, {row.begin(), row.end()}});
    }
    for (std::size_t i = entries.size(); i > 1; --i)
      std::swap(entries[i - 1], entries[rng.next_below(i)]);
    if (!(SparseTensor<T>::from_entries(A.sparse_shape(), A.dense_shape(), entries) == A))
      res.fail("entry-order invariance / coalesce idempotence broke");
    ++res.checks;
    auto id = RowFn<T>([](std::span<const T> v) { return std::vector<T>(v.begin(), v.end()); });
    if (!(tuplewise_apply(A, id) == A) || !(tuplewise_apply(Am, id) == Am))
      res.fail("tuplewise identity is not the identity");
    ++res.checks;
    const MaskedTensor<T>& m = Am;
    for (Index p = 0; p < m.positions(); ++p) {
      if (m.mask_at(p)) continue;
      for (T v : m.row(p))
        if (v != T(0)) res.fail("masked-out slot holds a nonzero");
    }
    ++res.checks;
  }

  // restricted output pattern: all-inclusive pattern must equal no pattern
  {
    OutputPattern pat = OutputPattern::of(A);
    auto want = oracle::matmul_ref(Aref, Bref, Aggregator::sum, nullptr);
    oracle::DenseRef<std::uint8_t> pref(A.sparse_shape(), 1);
    pref.exist = oracle::from_sparse(A).exist;
    auto want_pat = oracle::matmul_ref(Aref, Bref, Aggregator::sum, &pref);
    check_against_oracle(res, "spspmm/pattern", matmul(A, B, Aggregator::sum, &pat), want_pat,
                         tol);
    SparseTensor<T> full = gen_sparse<T>({n, n}, {}, 1.01, rng, integer_values);
    OutputPattern allpat = OutputPattern::of(full);
    auto lhs = matmul(A, B, Aggregator::sum, &allpat);
    auto rhs = matmul(A, B, Aggregator::sum);
    if (!(lhs == rhs)) res.fail("all-inclusive pattern != no pattern");
    ++res.checks;
  }

  // add
  {
    SparseTensor<T> C = gen_sparse<T>({n, n}, dshape, density, rng, integer_values);
    auto want = oracle::add_ref(Aref, oracle::from_sparse(C));
    check_against_oracle(res, "add/sparse", add(A, C), want, tol);
    check_against_oracle(res, "add/masked", add(Am, sparse_to_masked(C)), want, tol);
    check_against_oracle(res, "add/mixed", add(A, sparse_to_masked(C)), want, tol);
  }

  // reduce over both dims
  for (Index dim = 0; dim < 2; ++dim) {
    for (Aggregator agg :
         {Aggregator::sum, Aggregator::mean, Aggregator::max, Aggregator::min}) {
      auto want = oracle::reduce_ref(Aref, dim, agg);
      check_against_oracle(res, "reduce/sparse", reduce(A, dim, agg), want, tol);
      check_against_oracle(res, "reduce/masked", reduce(Am, dim, agg), want, tol);
      if (!res.pass) return;
    }
  }

  // expand back through the support of A
  {
    SparseTensor<T> h = reduce(A, 0, Aggregator::sum);
    auto href = oracle::reduce_ref(Aref, 0, Aggregator::sum);
    oracle::DenseRef<std::uint8_t> tref(A.sparse_shape(), 1);
    tref.exist = Aref.exist;
    for (Index dim = 0; dim < 2; ++dim) {
      auto want = oracle::expand_ref(href, dim, tref);
      check_against_oracle(res, "expand/sparse", expand(h, dim, OutputPattern::of(A)), want, tol);
      check_against_oracle(res, "expand/masked",
                           expand(sparse_to_masked(h), dim, A.sparse_shape(),
                                  sparse_to_masked(A).mask()),
                           want, tol);
    }
  }
}

}  // namespace detail

// Layer-1 kernels vs dense brute force on random operands.
inline SuiteResult verify_kernels(Index trials, Index max_n, std::uint64_t seed) {
  SuiteResult res{"dense-equivalence"};
  const double densities[] = {0.1, 0.3, 1.0};
  for (Index t = 0; t < trials && res.pass; ++t) {
    Rng rng = Rng(seed).fork("kernel-trial").fork(static_cast<std::uint64_t>(t));
    const Index n = 2 + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(max_n - 1)));
    const double density = densities[t % 3];
    if (t % 2 == 0)
      detail::kernel_trial<std::int64_t>(res, rng, n, density, 0.0);
    else
      detail::kernel_trial<double>(res, rng, n, density, 1e-5);
  }
  return res;
}

inline SparseTensor<std::int64_t> adjacency_int(const Graph& g) {
  std::vector<std::pair<std::vector<Index>, std::vector<std::int64_t>>> entries;
  for (auto [u, v] : g.edges) {
    entries.push_back({{u, v}, {1}});
    entries.push_back({{v, u}, {1}});
  }
  return SparseTensor<std::int64_t>::from_entries({g.n, g.n}, {}, entries);
}

// message_passing(dim=1, sum, input-pattern) against the naive loop on
// khop-induced supports, plus the induced-subgraph claim: input-pattern
// equals full-pattern intersected with the support.
inline SuiteResult verify_message_loop(const std::vector<Graph>& graphs, Index hop, std::uint64_t seed) {
  SuiteResult res{"message-loop-conformance"};
  for (std::size_t gi = 0; gi < graphs.size() && res.pass; ++gi) {
    const Graph& g = graphs[gi];
    Rng rng = Rng(seed).fork("message-loop").fork(static_cast<std::uint64_t>(gi));
    SparseTensor<std::int64_t> support = khop_sampler(g, hop);
    // integer payloads on the khop support
    RowMatrix<std::int64_t> vals(support.nnz(), 1);
    for (Index e = 0; e < support.nnz(); ++e)
      vals(e, 0) = static_cast<std::int64_t>(rng.next_below(9)) - 4;
    SparseTensor<std::int64_t> H = support.with_values({}, std::move(vals));
    SparseTensor<std::int64_t> adj = adjacency_int(g);

    SparseTensor<std::int64_t> got = message_passing(H, adj, 1, Aggregator::sum);
    auto want = oracle::message_loop_ref(oracle::from_sparse(H), g);
    detail::check_against_oracle(res, "message-loop", got, want, 0.0);

    SparseTensor<std::int64_t> full =
        message_passing(H, adj, 1, Aggregator::sum, PatternPolicy::full_pattern);
    for (Index e = 0; e < got.nnz() && res.pass; ++e) {
      const Index pos = full.find(got.index_tuple(e));
      const std::int64_t fv = pos >= 0 ? full.values()(pos, 0) : 0;
      if (fv != got.values()(e, 0))
        res.fail("input-pattern != full-pattern restricted to the support");
    }
    ++res.checks;
  }
  return res;
}

// khop SPD annotations against Floyd-Warshall.
inline SuiteResult verify_sampler(const std::vector<Graph>& graphs,
                                  const std::vector<Index>& hops) {
  SuiteResult res{"bfs-spd"};
  for (const Graph& g : graphs) {
    auto spd = oracle::spd_floyd_warshall(g);
    for (Index hop : hops) {
      SparseTensor<std::int64_t> t = khop_sampler(g, hop);
      Index e = 0;
      for (Index i = 0; i < g.n && res.pass; ++i) {
        for (Index j = 0; j < g.n; ++j) {
          const Index d = spd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          const bool want_exist = d >= 0 && d <= hop;
          const bool got_exist = e < t.nnz() && t.index(e, 0) == i && t.index(e, 1) == j;
          if (want_exist != got_exist) {
            res.fail("support mismatch at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            break;
          }
          if (got_exist) {
            if (t.values()(e, 0) != d) {
              res.fail("SPD mismatch at (" + std::to_string(i) + "," + std::to_string(j) + ")");
              break;
            }
            ++e;
          }
        }
      }
      if (res.pass && e != t.nnz()) res.fail("sampler emitted extra entries");
      ++res.checks;
      if (!res.pass) break;
    }
    if (!res.pass) break;
  }
  return res;
}

// forward(collated batch) against the concatenation of per-graph forwards.
inline SuiteResult verify_batching(const std::vector<PreprocessedGraph>& items,
                                   const std::vector<Arch>& archs, Index num_batches,
                                   Index max_batch, std::uint64_t seed, double tol) {
  SuiteResult res{"batching-consistency"};
  if (items.empty()) {
    res.fail("no preprocessed graphs");
    return res;
  }
  for (Arch arch : archs) {
    ModelConfig cfg;
    cfg.arch = arch;
    cfg.num_layers = 2;
    cfg.hidden = 16;
    cfg.representation = Rep::sparse;
    cfg.allow_rep_override = native_representation(arch) != Rep::sparse;
    cfg.norm = NormMode::per_graph;
    cfg.seed = seed;
    for (Index b = 0; b < num_batches && res.pass; ++b) {
      Rng rng = Rng(seed).fork("batching").fork(to_string(arch)).fork(static_cast<std::uint64_t>(b));
      const Index bs = 1 + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(max_batch)));
      std::vector<PreprocessedGraph> sel;
      for (Index i = 0; i < bs; ++i)
        sel.push_back(items[rng.next_below(items.size())]);
      std::vector<double> batched = forward(cfg, collate_sparse(sel));
      for (Index gi = 0; gi < bs && res.pass; ++gi) {
        std::vector<PreprocessedGraph> one{sel[static_cast<std::size_t>(gi)]};
        const double single = forward(cfg, collate_sparse(one))[0];
        if (detail::rel_diff(batched[static_cast<std::size_t>(gi)], single) > tol)
          res.fail(to_string(arch) + ": batch slot " + std::to_string(gi) + " " +
                   std::to_string(batched[static_cast<std::size_t>(gi)]) + " vs single " +
                   std::to_string(single));
      }
      ++res.checks;
    }
    if (!res.pass) break;
  }
  return res;
}

// Node relabelings must leave the prediction unchanged.
inline SuiteResult verify_permutation(const std::vector<Graph>& graphs,
                                      const std::vector<Arch>& archs,
                                      const TupleSampler& sampler, Index pairs_per_arch,
                                      std::uint64_t seed, double tol) {
  SuiteResult res{"permutation-invariance"};
  if (graphs.empty()) {
    res.fail("no graphs");
    return res;
  }
  for (Arch arch : archs) {
    ModelConfig cfg;
    cfg.arch = arch;
    cfg.num_layers = 2;
    cfg.hidden = 16;
    cfg.representation = Rep::sparse;
    cfg.allow_rep_override = native_representation(arch) != Rep::sparse;
    cfg.seed = seed;
    for (Index p = 0; p < pairs_per_arch && res.pass; ++p) {
      Rng rng = Rng(seed).fork("perm").fork(to_string(arch)).fork(static_cast<std::uint64_t>(p));
      const Graph& g = graphs[rng.next_below(graphs.size())];
      std::vector<Index> perm = random_permutation(g.n, rng);
      Graph pg = permute_graph(g, perm);
      std::vector<PreprocessedGraph> a{{g, sampler(g)}};
      std::vector<PreprocessedGraph> b{{pg, sampler(pg)}};
      const double ya = forward(cfg, collate_sparse(a))[0];
      const double yb = forward(cfg, collate_sparse(b))[0];
      if (detail::rel_diff(ya, yb) > tol)
        res.fail(to_string(arch) + ": " + std::to_string(ya) + " vs permuted " +
                 std::to_string(yb));
      ++res.checks;
    }
    if (!res.pass) break;
  }
  return res;
}

inline void print_suite(const SuiteResult& r) {
  std::printf("%-28s %s (%lld checks)%s%s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
              static_cast<long long>(r.checks), r.detail.empty() ? "" : " -- ",
              r.detail.c_str());
}

}  // namespace hot
