// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace hot;
using hottest::sp;

TEST(SparseFromEntries, CoalescedPermutationMatrix) {
  auto t = sp<std::int64_t>({2, 2}, {}, {{{0, 1}, {1}}, {{1, 0}, {1}}});
  ASSERT_EQ(t.nnz(), 2);
  EXPECT_EQ(t.index(0, 0), 0);
  EXPECT_EQ(t.index(0, 1), 1);
  EXPECT_EQ(t.index(1, 0), 1);
  EXPECT_EQ(t.index(1, 1), 0);
  EXPECT_EQ(t.values()(0, 0), 1);
  EXPECT_EQ(t.values()(1, 0), 1);
}

TEST(SparseFromEntries, DuplicatesAreSummed) {
  auto t = sp<std::int64_t>({2, 2}, {}, {{{0, 0}, {2}}, {{0, 0}, {3}}});
  ASSERT_EQ(t.nnz(), 1);
  EXPECT_EQ(t.values()(0, 0), 5);
}

TEST(SparseFromEntries, ColumnsSortedLexicographically) {
  auto t = sp<std::int64_t>({3, 3}, {2}, {{{2, 1}, {1, 0}}, {{0, 2}, {0, 1}}});
  ASSERT_EQ(t.nnz(), 2);
  EXPECT_EQ(t.index(0, 0), 0);
  EXPECT_EQ(t.index(0, 1), 2);
  EXPECT_EQ(t.index(1, 0), 2);
  EXPECT_EQ(t.index(1, 1), 1);
  EXPECT_EQ(t.values()(0, 1), 1);
  EXPECT_EQ(t.values()(1, 0), 1);
}

TEST(SparseFromEntries, BoundsAndShapeErrors) {
  EXPECT_THROW(sp<std::int64_t>({2, 2}, {}, {{{0, 2}, {1}}}), BoundsError);
  EXPECT_THROW(sp<std::int64_t>({2, 2}, {}, {{{0}, {1}}}), ShapeError);
  EXPECT_THROW(sp<std::int64_t>({2, 2}, {2}, {{{0, 0}, {1}}}), ShapeError);
}

TEST(SparseFromEntries, OrderInvariantConstruction) {
  Rng rng(11);
  std::vector<std::pair<std::vector<Index>, std::vector<double>>> es;
  for (int i = 0; i < 40; ++i)
    es.push_back({{static_cast<Index>(rng.next_below(5)), static_cast<Index>(rng.next_below(5))},
                  {rng.next_uniform(-1, 1)}});
  auto a = SparseTensor<double>::from_entries({5, 5}, {}, es);
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = es.size(); i > 1; --i)
      std::swap(es[i - 1], es[rng.next_below(i)]);
    EXPECT_TRUE(a == SparseTensor<double>::from_entries({5, 5}, {}, es));
  }
}

TEST(SparseFromEntries, CoalesceIdempotent) {
  Rng rng(5);
  auto a = gen_sparse<std::int64_t>({6, 6}, {2}, 0.5, rng, true);
  std::vector<std::pair<std::vector<Index>, std::vector<std::int64_t>>> es;
  for (Index e = 0; e < a.nnz(); ++e) {
    auto idx = a.index_tuple(e);
    auto row = a.value_row(e);
    es.push_back({{idx.begin(), idx.end()}, {row.begin(), row.end()}});
  }
  EXPECT_TRUE(a == SparseTensor<std::int64_t>::from_entries({6, 6}, {2}, es));
}

TEST(SparseToMasked, ScatterByDefinition) {
  auto t = sp<double>({2, 2}, {}, {{{0, 1}, {7.0}}});
  auto m = sparse_to_masked(t);
  EXPECT_EQ(m.data(), (std::vector<double>{0, 7, 0, 0}));
  EXPECT_EQ(m.mask(), (std::vector<std::uint8_t>{0, 1, 0, 0}));
}

TEST(SparseToMasked, EmptyTensor) {
  auto t = SparseTensor<double>::empty({2, 2}, {});
  auto m = sparse_to_masked(t);
  EXPECT_EQ(m.valid_count(), 0);
  EXPECT_EQ(m.data(), (std::vector<double>(4, 0.0)));
}

TEST(SparseToMasked, RoundTripIsIdentity) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Shape ss = trial % 2 == 0 ? Shape{4, 6} : Shape{3, 3, 3};
    auto t = gen_sparse<double>(ss, trial % 3 == 0 ? Shape{} : Shape{2}, 0.35, rng, false);
    EXPECT_TRUE(masked_to_sparse(sparse_to_masked(t)) == t);
  }
}

TEST(MaskedToSparse, InverseOfScatter) {
  MaskedTensor<double> m({2, 2}, {}, {0, 7, 0, 0}, {0, 1, 0, 0});
  auto t = masked_to_sparse(m);
  ASSERT_EQ(t.nnz(), 1);
  EXPECT_EQ(t.index(0, 0), 0);
  EXPECT_EQ(t.index(0, 1), 1);
  EXPECT_EQ(t.values()(0, 0), 7.0);
}

TEST(MaskedToSparse, AllFalseMask) {
  MaskedTensor<double> m({2, 2}, {}, std::vector<double>(4, 0.0), {0, 0, 0, 0});
  EXPECT_EQ(masked_to_sparse(m).nnz(), 0);
}

TEST(MaskedToSparse, ZeroValuedTrueSlotIsKept) {
  MaskedTensor<double> m({2, 2}, {}, {0, 0, 0, 0}, {1, 0, 0, 0});
  auto t = masked_to_sparse(m);
  ASSERT_EQ(t.nnz(), 1);
  EXPECT_EQ(t.values()(0, 0), 0.0);
}

TEST(MaskedTensor, ConstructionZeroesMaskedOutData) {
  MaskedTensor<double> m({2, 2}, {}, {1, 2, 3, 4}, {1, 0, 0, 1});
  EXPECT_EQ(m.data(), (std::vector<double>{1, 0, 0, 4}));
  EXPECT_TRUE(hottest::mask_zero_invariant(m));
}

TEST(TuplewiseApply, SquaresSparseValues) {
  auto t = sp<double>({2, 2}, {}, {{{0, 1}, {2.0}}, {{1, 0}, {3.0}}});
  auto r = tuplewise_apply(t, RowFn<double>([](std::span<const double> v) {
                             return std::vector<double>{v[0] * v[0]};
                           }));
  EXPECT_EQ(hottest::at(r, {0, 1}), 4.0);
  EXPECT_EQ(hottest::at(r, {1, 0}), 9.0);
  EXPECT_TRUE(r.same_support(t));
}

TEST(TuplewiseApply, MaskedSlotsRezeroed) {
  MaskedTensor<double> m({2, 2}, {}, {1, 1, 1, 1}, {1, 0, 1, 1});
  auto r = tuplewise_apply(m, RowFn<double>([](std::span<const double> v) {
                             return std::vector<double>{v[0] + 1.0};
                           }));
  EXPECT_EQ(r.data(), (std::vector<double>{2, 0, 2, 2}));
}

TEST(TuplewiseApply, IdentityIsIdentity) {
  Rng rng(9);
  auto t = gen_sparse<double>({5, 5}, {3}, 0.4, rng, false);
  auto id = RowFn<double>(
      [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); });
  EXPECT_TRUE(tuplewise_apply(t, id) == t);
  auto m = sparse_to_masked(t);
  EXPECT_TRUE(tuplewise_apply(m, id) == m);
}

TEST(TuplewiseApply, InconsistentOutputWidthThrows) {
  auto t = sp<double>({2, 2}, {}, {{{0, 0}, {1.0}}, {{1, 1}, {2.0}}});
  auto bad = RowFn<double>([](std::span<const double> v) {
    return v[0] > 1.5 ? std::vector<double>{1.0, 2.0} : std::vector<double>{1.0};
  });
  EXPECT_THROW(tuplewise_apply(t, bad), ShapeError);
}

TEST(DiagonalApply, OnlyDiagonalTouched) {
  auto t = sp<double>({2, 2}, {}, {{{0, 0}, {1.0}}, {{0, 1}, {1.0}}});
  auto r = diagonal_apply(t, RowFn<double>([](std::span<const double> v) {
                            return std::vector<double>{10.0 * v[0]};
                          }));
  EXPECT_EQ(hottest::at(r, {0, 0}), 10.0);
  EXPECT_EQ(hottest::at(r, {0, 1}), 1.0);
}

TEST(DiagonalApply, MaskedDiagonalZeroed) {
  MaskedTensor<double> m({2, 2}, {}, {1, 2, 3, 4}, {1, 1, 1, 1});
  auto r = diagonal_apply(m, RowFn<double>([](std::span<const double>) {
                            return std::vector<double>{0.0};
                          }));
  EXPECT_EQ(r.data(), (std::vector<double>{0, 2, 3, 0}));
}

TEST(DiagonalApply, NoDiagonalEntriesUnchanged) {
  auto t = sp<double>({2, 2}, {}, {{{0, 1}, {5.0}}});
  auto r = diagonal_apply(t, RowFn<double>([](std::span<const double>) {
                            return std::vector<double>{99.0};
                          }));
  EXPECT_TRUE(r == t);
}

TEST(DiagonalApply, RankErrors) {
  auto t = sp<double>({4}, {}, {{{1}, {1.0}}});
  auto f = RowFn<double>(
      [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); });
  EXPECT_THROW(diagonal_apply(t, f), RankError);
}
