#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pire/errors.hpp"
#include "pire/regularizer.hpp"

using namespace pire;
using pire::testing::TestRng;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const RegularizerKind kAllKinds[] = {RegularizerKind::AbsoluteValue, RegularizerKind::Square,
                                     RegularizerKind::GroupL2, RegularizerKind::RowL1};

Regularizer make_kind(RegularizerKind kind, Index n) {
  switch (kind) {
    case RegularizerKind::AbsoluteValue:
      return Regularizer::absolute(n);
    case RegularizerKind::Square:
      return Regularizer::square(n);
    case RegularizerKind::GroupL2: {
      std::vector<std::vector<Index>> groups;
      for (Index i = 0; i < n; i += 3) {
        std::vector<Index> g;
        for (Index j = i; j < std::min(n, i + 3); ++j) g.push_back(j);
        groups.push_back(g);
      }
      return Regularizer::group_l2(GroupPartition(n, groups));
    }
    case RegularizerKind::RowL1:
      return Regularizer::row_l1(n / 2, 2);
  }
  return Regularizer::absolute(n);
}

}  // namespace

TEST(Regularizer, ValueExamples) {
  EXPECT_EQ(Regularizer::absolute(2).value(vec({-1, 2})), vec({1, 2}));
  const auto group = Regularizer::group_l2(GroupPartition(3, {{0, 1}, {2}}));
  EXPECT_EQ(group.value(vec({3, 4, -5})), vec({5, 5}));
  EXPECT_EQ(Regularizer::row_l1(2, 2).value(vec({1, -1, 0, 2})), vec({2, 2}));
  EXPECT_EQ(Regularizer::square(2).value(vec({-3, 0.5})), vec({9, 0.25}));
}

TEST(Regularizer, ProxExamples) {
  EXPECT_DOUBLE_EQ(Regularizer::absolute(1).prox(vec({2}), 1.0, 1.0, vec({3}))[0], 1.0);
  const auto group = Regularizer::group_l2(GroupPartition(2, {{0, 1}}));
  const Vector g = group.prox(vec({1}), 1.0, 1.0, vec({3, 4}));
  EXPECT_NEAR(g[0], 2.4, 1e-15);
  EXPECT_NEAR(g[1], 3.2, 1e-15);
  EXPECT_DOUBLE_EQ(Regularizer::square(1).prox(vec({0.5}), 1.0, 1.0, vec({2}))[0], 1.0);
}

TEST(Regularizer, ProxExamplesAgreeWithGrid) {
  // 1-D brute force of w|x| + (x - b)^2 / 2 with w = 2, b = 3.
  const double grid = pire::testing::grid_min_1d(
      [](double x) { return 2.0 * std::abs(x) + 0.5 * (x - 3.0) * (x - 3.0); }, -6.0, 6.0, 1e-4);
  EXPECT_NEAR(grid, 2.0 * 1.0 + 0.5 * 4.0, 1e-7);
  // Radial brute force for the group example: x = t b / |b|.
  const double radial = pire::testing::grid_min_1d(
      [](double t) { return t + 0.5 * (t - 5.0) * (t - 5.0); }, 0.0, 6.0, 1e-4);
  EXPECT_NEAR(radial, 4.0 + 0.5, 1e-7);
}

TEST(Regularizer, ZeroWeightIsIdentity) {
  TestRng rng(21);
  for (auto kind : kAllKinds) {
    const auto reg = make_kind(kind, 6);
    const Vector b = rng.normal_vector(6);
    EXPECT_EQ(reg.prox(Vector::Zero(reg.output_dim()), 1.3, 0.7, b), b);
  }
}

TEST(Regularizer, ZeroPreservation) {
  for (auto kind : kAllKinds) {
    const auto reg = make_kind(kind, 6);
    const Vector w = Vector::Constant(reg.output_dim(), 0.4);
    EXPECT_EQ(reg.prox(w, 1.0, 1.0, Vector::Zero(6)), Vector::Zero(6));
  }
}

TEST(Regularizer, GroupWithZeroCenterReturnsZeroBlock) {
  const auto group = Regularizer::group_l2(GroupPartition(3, {{0, 1}, {2}}));
  const Vector out = group.prox(vec({0.0, 1.0}), 1.0, 1.0, vec({0, 0, 2}));
  EXPECT_EQ(out, vec({0, 0, 1}));
}

TEST(Regularizer, ProxBeatsGridOracle) {
  TestRng rng(22);
  for (auto kind : kAllKinds) {
    for (int trial = 0; trial < 60; ++trial) {
      const Index n = trial % 2 == 0 ? 1 : 2;
      const auto c = pire::testing::random_prox_case(rng, kind, n);
      const Vector x = c.reg.prox(c.w, c.lambda, c.mu, c.b);
      const double closed = pire::testing::prox_objective(c.reg, c.w, c.lambda, c.mu, c.b, x);
      EXPECT_LE(closed, pire::testing::prox_grid_min(c, 1e-4) + 1e-6);
    }
  }
}

TEST(Regularizer, Nonexpansive) {
  TestRng rng(23);
  for (auto kind : {RegularizerKind::AbsoluteValue, RegularizerKind::GroupL2}) {
    const auto reg = make_kind(kind, 9);
    for (int trial = 0; trial < 300; ++trial) {
      const Vector w = rng.uniform_vector(reg.output_dim(), 0.0, 2.0);
      const Vector b1 = rng.normal_vector(9), b2 = rng.normal_vector(9);
      const Vector p1 = reg.prox(w, 0.8, 1.2, b1), p2 = reg.prox(w, 0.8, 1.2, b2);
      EXPECT_LE((p1 - p2).norm(), (b1 - b2).norm() + 1e-12);
    }
  }
}

TEST(Regularizer, Separability) {
  TestRng rng(24);
  for (auto kind : {RegularizerKind::AbsoluteValue, RegularizerKind::Square}) {
    const auto reg = make_kind(kind, 8);
    for (int trial = 0; trial < 100; ++trial) {
      const Vector w = rng.uniform_vector(8, 0.0, 2.0);
      const Vector b = rng.normal_vector(8);
      const Vector base = reg.prox(w, 1.0, 1.0, b);
      const Index i = rng.integer(0, 7);
      Vector b2 = b, w2 = w;
      b2[i] += rng.normal();
      w2[i] = rng.uniform(0.0, 2.0);
      const Vector moved = reg.prox(w2, 1.0, 1.0, b2);
      for (Index j = 0; j < 8; ++j) {
        if (j == i) continue;
        EXPECT_EQ(moved[j], base[j]);
      }
    }
  }
}

TEST(Regularizer, SubproblemConvexity) {
  TestRng rng(25);
  for (auto kind : kAllKinds) {
    const auto reg = make_kind(kind, 6);
    for (int trial = 0; trial < 300; ++trial) {
      const Vector w = rng.uniform_vector(reg.output_dim(), 0.0, 2.0);
      const Vector b = rng.normal_vector(6);
      const Vector x = rng.normal_vector(6), y = rng.normal_vector(6);
      auto obj = [&](const Vector& v) { return pire::testing::prox_objective(reg, w, 0.9, 1.1, b, v); };
      EXPECT_LE(obj(0.5 * (x + y)), 0.5 * (obj(x) + obj(y)) + 1e-10);
    }
  }
}

TEST(Regularizer, ProxIndicesMatchesFullProx) {
  TestRng rng(26);
  const BlockStructure blocks = BlockStructure::contiguous(12, 2);
  for (auto kind : kAllKinds) {
    const auto reg = make_kind(kind, 12);
    ASSERT_TRUE(reg.respects(blocks));
    const Vector w = rng.uniform_vector(reg.output_dim(), 0.0, 1.0);
    const Vector b = rng.normal_vector(12);
    const Vector full = reg.prox(w, 0.7, 1.3, b);
    Vector out = Vector::Constant(12, 99.0);
    for (Index s = 0; s < blocks.count(); ++s) reg.prox_indices(w, 0.7, 1.3, b, out, blocks.block(s));
    EXPECT_EQ(out, full);
  }
}

TEST(Regularizer, RespectsBlocks) {
  const auto group = Regularizer::group_l2(GroupPartition(4, {{0, 1}, {2, 3}}));
  EXPECT_TRUE(group.respects(BlockStructure::contiguous(4, 2)));
  EXPECT_FALSE(group.respects(BlockStructure::ranges(4, {{0, 1}, {1, 4}})));
  // Row soft-thresholding is elementwise once the weights are fixed.
  EXPECT_TRUE(Regularizer::row_l1(3, 2).respects(BlockStructure::matrix_columns(3, 2)));
  EXPECT_FALSE(Regularizer::absolute(5).respects(BlockStructure::single(6)));
  EXPECT_TRUE(Regularizer::row_l1(3, 2).respects(BlockStructure::single(6)));
}

TEST(Regularizer, Errors) {
  EXPECT_THROW(GroupPartition(3, {{0, 1}}), ParameterError);
  EXPECT_THROW(GroupPartition(3, {{0, 1}, {1, 2}}), ParameterError);
  EXPECT_THROW(GroupPartition(2, {{0, 1}, {}}), ParameterError);
  EXPECT_THROW(GroupPartition(2, {{0, 2}}), ParameterError);
  const auto reg = Regularizer::absolute(2);
  EXPECT_THROW(reg.prox(vec({-1, 1}), 1.0, 1.0, vec({1, 1})), DomainError);
  EXPECT_THROW(reg.prox(vec({1, 1}), 0.0, 1.0, vec({1, 1})), ParameterError);
  EXPECT_THROW(reg.prox(vec({1, 1}), 1.0, -1.0, vec({1, 1})), ParameterError);
  EXPECT_THROW(reg.prox(vec({1}), 1.0, 1.0, vec({1, 1})), DimensionError);
  EXPECT_THROW(reg.value(vec({1, 2, 3})), DimensionError);
  EXPECT_THROW(Regularizer::row_l1(0, 2), ParameterError);
}
