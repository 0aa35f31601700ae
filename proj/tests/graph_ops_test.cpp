// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace hot;
using hottest::at;
using hottest::sp;

namespace {

SparseTensor<double> path3_adj() {
  return sp<double>({3, 3}, {},
                    {{{0, 1}, {1.0}}, {{1, 0}, {1.0}}, {{1, 2}, {1.0}}, {{2, 1}, {1.0}}});
}

SparseTensor<double> full_ones(Index n) {
  std::vector<std::pair<std::vector<Index>, std::vector<double>>> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) es.push_back({{i, j}, {1.0}});
  return SparseTensor<double>::from_entries({n, n}, {}, es);
}

}  // namespace

TEST(MessagePassing, RootOnlyPatternOnPathGraph) {
  // H holds only the root tuples (i, i); with hop-limited pattern nothing can
  // arrive on-pattern because A has no diagonal, so all entries become 0 but
  // the support survives.
  auto h = hottest::sparse_identity(3);
  auto r = message_passing(h, path3_adj(), 1, Aggregator::sum);
  ASSERT_EQ(r.nnz(), 3);
  EXPECT_EQ(at(r, {0, 0}), 0.0);
  EXPECT_EQ(at(r, {1, 1}), 0.0);
  EXPECT_EQ(at(r, {2, 2}), 0.0);
}

TEST(MessagePassing, FullSupportCountsNeighborDegrees) {
  auto r = message_passing(full_ones(3), path3_adj(), 1, Aggregator::sum);
  // out[i][j] = deg(j) on the path 0-1-2
  for (Index i = 0; i < 3; ++i) {
    EXPECT_EQ(at(r, {i, 0}), 1.0);
    EXPECT_EQ(at(r, {i, 1}), 2.0);
    EXPECT_EQ(at(r, {i, 2}), 1.0);
  }
  EXPECT_EQ(at(r, {0, 1}), 2.0);
}

TEST(MessagePassing, IdentityAdjacencyFullPattern) {
  Rng rng(3);
  auto h = gen_sparse<double>({4, 4}, {2}, 0.5, rng, false);
  auto r = message_passing(h, hottest::sparse_identity(4), 1, Aggregator::sum,
                           PatternPolicy::full_pattern);
  EXPECT_TRUE(r == h);
}

TEST(MessagePassing, DimZeroCountsRowDegrees) {
  auto r = message_passing(full_ones(3), path3_adj(), 0, Aggregator::sum);
  // out[i][j] = deg(i)
  EXPECT_EQ(at(r, {0, 0}), 1.0);
  EXPECT_EQ(at(r, {1, 2}), 2.0);
  EXPECT_EQ(at(r, {2, 1}), 1.0);
}

TEST(MessagePassing, SizeAndRankErrors) {
  auto h = full_ones(3);
  auto a4 = hottest::sparse_identity(4);
  EXPECT_THROW(message_passing(h, a4, 1, Aggregator::sum), ShapeError);
  EXPECT_THROW(message_passing(h, path3_adj(), 2, Aggregator::sum), RankError);
}

TEST(Pooling, DelegatesToReduce) {
  auto h = sp<double>({2, 2}, {}, {{{0, 0}, {2.0}}, {{0, 1}, {3.0}}, {{1, 1}, {5.0}}});
  auto p = pooling(h, 1, Aggregator::sum);
  EXPECT_EQ(at(p, {0}), 5.0);
  EXPECT_EQ(at(p, {1}), 5.0);
}

TEST(Pooling, SingletonMeanIsTheEntry) {
  auto h = sp<double>({2, 2}, {}, {{{1, 0}, {7.0}}});
  EXPECT_EQ(at(pooling(h, 1, Aggregator::mean), {1}), 7.0);
}

TEST(Pooling, SymmetricTensorPoolsEquallyOnBothDims) {
  Rng rng(5);
  auto x = gen_sparse<double>({5, 5}, {}, 0.4, rng, false);
  auto sym = add(x, x.transpose());
  auto p0 = pooling(sym, 0, Aggregator::sum);
  auto p1 = pooling(sym, 1, Aggregator::sum);
  EXPECT_TRUE(p0 == p1);
}

TEST(Unpooling, BroadcastsAlongDim1) {
  auto h = sp<double>({2}, {}, {{{0}, {4.0}}, {{1}, {9.0}}});
  auto target = sp<double>({2, 2}, {}, {{{0, 0}, {1.0}}, {{0, 1}, {1.0}}, {{1, 1}, {1.0}}});
  auto r = unpooling(h, 1, target);
  EXPECT_EQ(at(r, {0, 0}), 4.0);
  EXPECT_EQ(at(r, {0, 1}), 4.0);
  EXPECT_EQ(at(r, {1, 1}), 9.0);
}

TEST(Unpooling, PoolingMeanRoundTrip) {
  auto h = sp<double>({3}, {}, {{{0}, {1.0}}, {{1}, {2.0}}, {{2}, {3.0}}});
  Rng rng(7);
  auto target = gen_sparse<double>({3, 3}, {}, 0.6, rng, false);
  for (Index dim = 0; dim < 2; ++dim) {
    auto round = pooling(unpooling(h, dim, target), dim, Aggregator::mean);
    for (Index e = 0; e < round.nnz(); ++e) {
      const Index i = round.index(e, 0);
      EXPECT_NEAR(round.values()(e, 0), at(h, {i}), 1e-12);
    }
  }
}

TEST(Unpooling, EmptyTarget) {
  auto h = sp<double>({2}, {}, {{{0}, {4.0}}});
  auto target = SparseTensor<double>::empty({2, 2}, {});
  EXPECT_EQ(unpooling(h, 0, target).nnz(), 0);
}

TEST(Diagonal, ExtractsRootEntries) {
  auto h = sp<double>({2, 2}, {}, {{{0, 0}, {2.0}}, {{0, 1}, {3.0}}, {{1, 1}, {5.0}}});
  auto d = diagonal(h);
  ASSERT_EQ(d.nnz(), 2);
  EXPECT_EQ(at(d, {0}), 2.0);
  EXPECT_EQ(at(d, {1}), 5.0);
}

TEST(Diagonal, NoDiagonalEntries) {
  auto h = sp<double>({2, 2}, {}, {{{0, 1}, {3.0}}});
  EXPECT_EQ(diagonal(h).nnz(), 0);
}

TEST(Diagonal, UnpoolDiagonalRoundTrip) {
  auto h = sp<double>({3}, {}, {{{0}, {1.0}}, {{1}, {2.0}}, {{2}, {3.0}}});
  auto diag_target = hottest::sparse_identity(3);
  EXPECT_TRUE(diagonal(unpooling(h, 1, diag_target)) == h);
}

TEST(SparseDenseAgreement, AllOpsAllAggregators) {
  Rng rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.next_below(9));
    Graph g = gen_er(n, 0.35, rng);
    auto hsp = [&] {
      auto support = khop_sampler(g, 2);
      RowMatrix<double> vals(support.nnz(), 2);
      for (auto& v : vals.v) v = rng.next_uniform(-1, 1);
      std::vector<Index> idx(support.indices());
      return SparseTensor<double>({n, n}, {2}, std::move(idx), std::move(vals));
    }();
    auto asp = adjacency_sparse(g);
    auto hma = add_batch_dim(sparse_to_masked(hsp));
    auto ama = add_batch_dim(sparse_to_masked(asp));

    for (Aggregator agg :
         {Aggregator::sum, Aggregator::mean, Aggregator::max, Aggregator::min}) {
      for (Index dim = 0; dim < 2; ++dim) {
        auto s = message_passing(hsp, asp, dim, agg);
        auto m = message_passing(hma, ama, dim, agg);
        EXPECT_TRUE(sparse_to_masked(s) == drop_batch_dim(m))
            << "message_passing dim=" << dim << " agg=" << to_string(agg);
        auto ps = pooling(hsp, dim, agg);
        auto pm = pooling(hma, dim, agg);
        EXPECT_TRUE(sparse_to_masked(ps) == drop_batch_dim(pm))
            << "pooling dim=" << dim << " agg=" << to_string(agg);
        auto us = unpooling(ps, dim, hsp);
        auto um = unpooling(pm, dim, hma);
        EXPECT_TRUE(sparse_to_masked(us) == drop_batch_dim(um)) << "unpooling dim=" << dim;
      }
    }
    EXPECT_TRUE(sparse_to_masked(diagonal(hsp)) == drop_batch_dim(diagonal(hma)));
  }
}

TEST(Equivariance, OpsCommuteWithRelabeling) {
  Rng rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.next_below(6));
    Graph g = gen_er(n, 0.4, rng);
    Graph pg;
    std::vector<Index> perm = random_permutation(n, rng);
    pg = permute_graph(g, perm);
    auto h = khop_sampler(g, 2);
    auto ph = khop_sampler(pg, 2);
    auto a = adjacency_int(g);
    auto pa = adjacency_int(pg);
    auto r = message_passing(h, a, 1, Aggregator::sum);
    auto pr = message_passing(ph, pa, 1, Aggregator::sum);
    ASSERT_EQ(r.nnz(), pr.nnz());
    for (Index e = 0; e < r.nnz(); ++e) {
      std::vector<Index> mapped{perm[static_cast<std::size_t>(r.index(e, 0))],
                                perm[static_cast<std::size_t>(r.index(e, 1))]};
      const Index pe = pr.find(mapped);
      ASSERT_GE(pe, 0);
      EXPECT_EQ(pr.values()(pe, 0), r.values()(e, 0));
    }
  }
}

TEST(OpTrace, RecordsLayerOperators) {
  auto h = full_ones(3);
  auto a = path3_adj();
  OpTrace trace;
  (void)message_passing(h, a, 1, Aggregator::sum);
  (void)pooling(h, 0, Aggregator::sum);
  (void)diagonal(h);
  EXPECT_EQ(trace.ops(), (std::vector<std::string>{"M1", "P0", "D"}));
}

TEST(MessagePassing, Dim1OnOrderThreeTuples) {
  // out[i][j][k] = sum_l H[i][l][k] A[l][j], checked by a direct loop
  Rng rng(17);
  const Index n = 4;
  Graph g = gen_er(n, 0.5, rng);
  auto a = adjacency_int(g);
  auto h = gen_sparse<std::int64_t>({n, n, n}, {}, 0.4, rng, true);
  auto r = message_passing(h, a, 1, Aggregator::sum, PatternPolicy::full_pattern);
  auto aref = oracle::from_sparse(a);
  auto href = oracle::from_sparse(h);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        std::int64_t want = 0;
        bool exists = false;
        for (Index l = 0; l < n; ++l) {
          if (href.exist[(i * n + l) * n + k] && aref.exist[l * n + j]) {
            exists = true;
            want += href.row((i * n + l) * n + k)[0] * aref.row(l * n + j)[0];
          }
        }
        const Index e = r.find(std::vector<Index>{i, j, k});
        EXPECT_EQ(e >= 0, exists);
        if (e >= 0) EXPECT_EQ(r.values()(e, 0), want);
      }
}
