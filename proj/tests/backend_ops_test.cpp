// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace hot;
using hottest::at;
using hottest::sp;

TEST(Matmul, SparseSparseSum) {
  // frozen from the dense 3x3 product of the scattered operands
  auto a = sp<std::int64_t>({3, 3}, {}, {{{0, 1}, {1}}, {{1, 2}, {1}}});
  auto b = sp<std::int64_t>({3, 3}, {}, {{{1, 0}, {1}}, {{2, 2}, {1}}});
  auto c = matmul(a, b, Aggregator::sum);
  ASSERT_EQ(c.nnz(), 2);
  EXPECT_EQ(at(c, {0, 0}), 1.0);
  EXPECT_EQ(at(c, {1, 2}), 1.0);
}

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  Rng rng(2);
  auto b = gen_sparse<double>({4, 4}, {}, 0.5, rng, false);
  auto c = matmul(hottest::sparse_identity(4), b, Aggregator::sum);
  EXPECT_TRUE(c == b);
}

TEST(Matmul, MaxWithPatternComputesOnlyPatternCells) {
  auto a = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {2}}, {{0, 1}, {3}}});
  auto eye = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {1}}, {{1, 1}, {1}}});
  auto patt = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {1}}});
  OutputPattern pat = OutputPattern::of(patt);
  auto c = matmul(a, eye, Aggregator::max, &pat);
  ASSERT_EQ(c.nnz(), 1);
  EXPECT_EQ(at(c, {0, 0}), 2.0);
}

TEST(Matmul, SoftmaxWeightedMatchesClosedForm) {
  // row 0 gathers v0 = [0] and v1 = [ln 3] with score = B's entry value;
  // weights are (1, 3)/4, result (3/4) ln 3
  const double ln3 = std::log(3.0);
  auto a = sp<double>({2, 2}, {}, {{{0, 0}, {1.0}}, {{0, 1}, {1.0}}});
  auto b = sp<double>({2, 1}, {1}, {{{0, 0}, {0.0}}, {{1, 0}, {ln3}}});
  ScoreFn<double> score = [](std::span<const double>, std::span<const double> bv) {
    return bv[0];
  };
  auto c = matmul(a, b, Aggregator::softmax_weighted, nullptr, score);
  ASSERT_EQ(c.nnz(), 1);
  EXPECT_NEAR(at(c, {0, 0}), 0.75 * ln3, 1e-12);
  EXPECT_NEAR(at(c, {0, 0}), 0.8239592165010822, 1e-9);
}

TEST(Matmul, ErrorsOnBadCombinations) {
  auto a = sp<double>({2, 2}, {2}, {{{0, 0}, {1.0, 1.0}}});
  auto b = sp<double>({2, 2}, {2}, {{{0, 0}, {1.0, 1.0}}});
  EXPECT_THROW(matmul(a, b, Aggregator::sum), UnsupportedError);
  auto c = sp<double>({3, 3}, {}, {{{0, 0}, {1.0}}});
  EXPECT_THROW(matmul(a, c, Aggregator::sum), ShapeError);
  EXPECT_THROW(matmul(c, c, Aggregator::softmax_weighted), UnsupportedError);  // no score fn
}

TEST(Matmul, ChannelwiseContractsPerChannel) {
  auto a = sp<double>({2, 2}, {2}, {{{0, 0}, {1.0, 2.0}}, {{0, 1}, {3.0, 4.0}}});
  auto b = sp<double>({2, 2}, {2}, {{{0, 1}, {5.0, 6.0}}, {{1, 1}, {7.0, 8.0}}});
  auto c = matmul_channelwise(a, b, Aggregator::sum);
  // (0,1): a(0,0)*b(0,1) + a(0,1)*b(1,1) = [1*5+3*7, 2*6+4*8]
  ASSERT_EQ(c.nnz(), 1);
  EXPECT_EQ(c.values()(0, 0), 26.0);
  EXPECT_EQ(c.values()(0, 1), 44.0);
  auto am = sparse_to_masked(a);
  auto bm = sparse_to_masked(b);
  auto cm = matmul_channelwise(am, bm, Aggregator::sum);
  EXPECT_TRUE(masked_to_sparse(cm) == c);
}

TEST(Add, UnionWithSummedOverlap) {
  auto a = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {1}}});
  auto b = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {2}}, {{1, 1}, {5}}});
  auto c = add(a, b);
  ASSERT_EQ(c.nnz(), 2);
  EXPECT_EQ(at(c, {0, 0}), 3.0);
  EXPECT_EQ(at(c, {1, 1}), 5.0);
}

TEST(Add, EmptyIsAdditiveIdentity) {
  Rng rng(4);
  auto a = gen_sparse<std::int64_t>({5, 5}, {2}, 0.4, rng, true);
  EXPECT_TRUE(add(a, SparseTensor<std::int64_t>::empty({5, 5}, {2})) == a);
}

TEST(Add, MaskUnion) {
  MaskedTensor<double> a({2, 2}, {}, {1, 0, 0, 0}, {1, 0, 0, 0});
  MaskedTensor<double> b({2, 2}, {}, {0, 2, 0, 0}, {0, 1, 0, 0});
  auto c = add(a, b);
  EXPECT_EQ(c.mask(), (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(c.data(), (std::vector<double>{1, 2, 0, 0}));
}

TEST(Add, CommutativeAndAssociativeOnIntegers) {
  Rng rng(6);
  auto a = gen_sparse<std::int64_t>({6, 6}, {}, 0.3, rng, true);
  auto b = gen_sparse<std::int64_t>({6, 6}, {}, 0.3, rng, true);
  auto c = gen_sparse<std::int64_t>({6, 6}, {}, 0.3, rng, true);
  EXPECT_TRUE(add(a, b) == add(b, a));
  EXPECT_TRUE(add(add(a, b), c) == add(a, add(b, c)));
}

TEST(Reduce, SumAndMeanOverDim1) {
  auto t = sp<double>({2, 2}, {}, {{{0, 0}, {2.0}}, {{0, 1}, {3.0}}, {{1, 1}, {5.0}}});
  auto s = reduce(t, 1, Aggregator::sum);
  ASSERT_EQ(s.nnz(), 2);
  EXPECT_EQ(at(s, {0}), 5.0);
  EXPECT_EQ(at(s, {1}), 5.0);
  auto m = reduce(t, 1, Aggregator::mean);
  EXPECT_EQ(at(m, {0}), 2.5);  // two existing entries in row 0, one in row 1
  EXPECT_EQ(at(m, {1}), 5.0);
}

TEST(Reduce, MaskedMaxConsultsTheMask) {
  MaskedTensor<double> t({2, 2}, {}, {1, 3, 5, 7}, {1, 0, 1, 1});
  auto r = reduce(t, 1, Aggregator::max);
  EXPECT_EQ(r.mask(), (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(r.data(), (std::vector<double>{1, 7}));  // the masked 3 is ignored
}

TEST(Reduce, MeanTimesCountEqualsSum) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = gen_sparse<double>({6, 6}, {2}, 0.4, rng, false);
    for (Index dim = 0; dim < 2; ++dim) {
      auto s = reduce(t, dim, Aggregator::sum);
      auto m = reduce(t, dim, Aggregator::mean);
      // recover group counts from an all-ones payload
      auto ones = tuplewise_apply(t, RowFn<double>([](std::span<const double>) {
                                    return std::vector<double>{1.0};
                                  }));
      auto cnt = reduce(ones, dim, Aggregator::sum);
      ASSERT_TRUE(s.same_support(m));
      for (Index e = 0; e < s.nnz(); ++e) {
        const double c = cnt.values()(e, 0);
        for (Index j = 0; j < s.width(); ++j)
          EXPECT_NEAR(m.values()(e, j) * c, s.values()(e, j), 1e-9);
      }
    }
  }
}

TEST(Reduce, DimOutOfRange) {
  auto t = sp<double>({2, 2}, {}, {{{0, 0}, {1.0}}});
  EXPECT_THROW(reduce(t, 2, Aggregator::sum), RankError);
  EXPECT_THROW(reduce(t, 0, Aggregator::softmax_weighted), UnsupportedError);
}

TEST(Expand, BroadcastAtDimZero) {
  auto h = sp<double>({2}, {}, {{{0}, {4.0}}, {{1}, {9.0}}});
  auto target = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {1}}, {{0, 1}, {1}}, {{1, 1}, {1}}});
  auto r = expand(h, 0, OutputPattern::of(target));
  // inserting dim 0 means entry (a, b) takes h[b]
  EXPECT_EQ(at(r, {0, 0}), 4.0);
  EXPECT_EQ(at(r, {0, 1}), 9.0);
  EXPECT_EQ(at(r, {1, 1}), 9.0);
}

TEST(Expand, ReduceRoundTripOnSingleEntryTargets) {
  auto h = sp<double>({3}, {}, {{{0}, {1.0}}, {{1}, {2.0}}, {{2}, {3.0}}});
  auto diag = sp<std::int64_t>({3, 3}, {}, {{{0, 0}, {1}}, {{1, 1}, {1}}, {{2, 2}, {1}}});
  for (Index dim = 0; dim < 2; ++dim) {
    auto r = reduce(expand(h, dim, OutputPattern::of(diag)), dim, Aggregator::sum);
    EXPECT_TRUE(r == h);
  }
}

TEST(Expand, EmptyTargetGivesEmptyOutput) {
  auto h = sp<double>({2}, {}, {{{0}, {4.0}}});
  auto target = SparseTensor<std::int64_t>::empty({2, 2}, {});
  EXPECT_EQ(expand(h, 0, OutputPattern::of(target)).nnz(), 0);
}

TEST(Expand, IncompatibleTargetThrows) {
  auto h = sp<double>({2}, {}, {{{0}, {4.0}}});
  auto target = sp<std::int64_t>({3, 3}, {}, {{{0, 0}, {1}}});
  EXPECT_THROW(expand(h, 0, OutputPattern::of(target)), ShapeError);
}

TEST(KernelOracle, RandomOperandsMatchBruteForce) {
  SuiteResult res = verify_kernels(40, 12, 123);
  EXPECT_TRUE(res.pass) << res.detail;
  EXPECT_GT(res.checks, 0);
}

TEST(KernelOracle, PermutationMatrixRelabelsSupport) {
  Rng rng(14);
  const Index n = 6;
  auto x = gen_sparse<double>({n, n}, {}, 0.4, rng, false);
  std::vector<Index> perm = random_permutation(n, rng);
  std::vector<std::pair<std::vector<Index>, std::vector<double>>> pes, tes;
  for (Index i = 0; i < n; ++i) {
    pes.push_back({{perm[static_cast<std::size_t>(i)], i}, {1.0}});  // P[pi(i), i] = 1
    tes.push_back({{i, perm[static_cast<std::size_t>(i)]}, {1.0}});  // P^T
  }
  auto P = SparseTensor<double>::from_entries({n, n}, {}, pes);
  auto Pt = SparseTensor<double>::from_entries({n, n}, {}, tes);
  auto relabeled = matmul(P, matmul(x, Pt, Aggregator::sum), Aggregator::sum);
  for (Index e = 0; e < x.nnz(); ++e) {
    std::vector<Index> idx{perm[static_cast<std::size_t>(x.index(e, 0))],
                           perm[static_cast<std::size_t>(x.index(e, 1))]};
    EXPECT_EQ(at(relabeled, idx), x.values()(e, 0));
  }
  EXPECT_EQ(relabeled.nnz(), x.nnz());
}
