#include <gtest/gtest.h>

#include <cmath>

#include "pire/errors.hpp"
#include "pire/penalty.hpp"
#include "support.hpp"

using namespace pire;
using pire::testing::TestRng;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<ConcavePenalty> catalog() {
  return {ConcavePenalty::lp(0.5, 0.01), ConcavePenalty::lp(0.1, 0.1), ConcavePenalty::lp(1.0, 0.01),
          ConcavePenalty::log(0.01),     ConcavePenalty::log(1.0),     ConcavePenalty::capped_l1(2.0),
          ConcavePenalty::identity()};
}

}  // namespace

TEST(Penalty, ValueExamples) {
  EXPECT_NEAR(ConcavePenalty::lp(0.5, 0.01).value(vec({0.0})), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(ConcavePenalty::identity().value(vec({1, 2, 3})), 6.0);
  EXPECT_DOUBLE_EQ(ConcavePenalty::capped_l1(2.0).value(vec({1, 3})), 3.0);
  // log offset makes f(0) = 0
  EXPECT_DOUBLE_EQ(ConcavePenalty::log(0.5).value(vec({0.0, 0.0})), 0.0);
  EXPECT_NEAR(ConcavePenalty::log(0.5).value(vec({1.0})), std::log(1.5 / 0.5), 1e-15);
}

TEST(Penalty, WeightExamples) {
  EXPECT_NEAR(ConcavePenalty::lp(0.5, 0.01).weight(vec({0.0}))[0], 5.0, 1e-12);
  const Vector w = ConcavePenalty::lp(1.0, 0.3).weight(vec({0.0, 2.0, 17.0}));
  EXPECT_EQ(w, Vector::Ones(3));
  EXPECT_EQ(ConcavePenalty::capped_l1(2.0).weight(vec({1, 2, 3})), vec({1, 0, 0}));
  EXPECT_NEAR(ConcavePenalty::log(0.01).weight(vec({0.99}))[0], 1.0, 1e-15);
}

TEST(Penalty, Errors) {
  EXPECT_THROW(ConcavePenalty::lp(0.5, 0.01).value(vec({-1e-3})), DomainError);
  EXPECT_THROW(ConcavePenalty::identity().weight(vec({1.0, -2.0})), DomainError);
  EXPECT_THROW(ConcavePenalty::lp(0.5, 0.0), ParameterError);
  EXPECT_THROW(ConcavePenalty::lp(0.5, -1.0), ParameterError);
  EXPECT_THROW(ConcavePenalty::lp(0.0, 0.1), ParameterError);
  EXPECT_THROW(ConcavePenalty::lp(1.5, 0.1), ParameterError);
  EXPECT_THROW(ConcavePenalty::log(0.0), ParameterError);
  EXPECT_THROW(ConcavePenalty::capped_l1(0.0), ParameterError);
  EXPECT_THROW(ConcavePenalty::lp(0.5, 0.01).with_epsilon(0.0), ParameterError);
}

TEST(Penalty, EpsilonStep) {
  const EpsilonSchedule sched{0.01, 1.1};
  const auto next = epsilon_step(ConcavePenalty::lp(0.5, 0.01), sched);
  EXPECT_NEAR(next.epsilon(), 0.01 / 1.1, 1e-18);
  EXPECT_NEAR(next.epsilon(), 0.0090909, 1e-7);

  const auto capped = epsilon_step(ConcavePenalty::capped_l1(2.0), sched);
  EXPECT_EQ(capped.kind(), PenaltyKind::CappedL1);
  EXPECT_EQ(capped.theta(), 2.0);

  const EpsilonSchedule halve{1.0, 2.0};
  const auto twice = epsilon_step(epsilon_step(ConcavePenalty::lp(0.5, 1.0), halve), halve);
  EXPECT_DOUBLE_EQ(twice.epsilon(), 0.25);
  EXPECT_DOUBLE_EQ(halve.at(2), 0.25);

  EXPECT_THROW((EpsilonSchedule{0.0, 1.1}.validate()), ParameterError);
  EXPECT_THROW((EpsilonSchedule{0.1, 1.0}.validate()), ParameterError);
}

TEST(Penalty, Concavity) {
  TestRng rng(11);
  for (const auto& pen : catalog()) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vector y1 = rng.uniform_vector(4, 0.0, 5.0);
      const Vector y2 = rng.uniform_vector(4, 0.0, 5.0);
      const double t = rng.uniform(0.0, 1.0);
      const Vector mid = t * y1 + (1.0 - t) * y2;
      EXPECT_GE(pen.value(mid), t * pen.value(y1) + (1.0 - t) * pen.value(y2) - 1e-10) << pen.describe();
    }
  }
}

TEST(Penalty, Monotonicity) {
  TestRng rng(12);
  for (const auto& pen : catalog()) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vector y1 = rng.uniform_vector(4, 0.0, 5.0);
      const Vector y2 = y1 + rng.uniform_vector(4, 0.0, 1.0);
      EXPECT_LE(pen.value(y1), pen.value(y2) + 1e-12) << pen.describe();
    }
  }
}

TEST(Penalty, WeightsNonnegative) {
  TestRng rng(13);
  for (const auto& pen : catalog()) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector w = pen.weight(rng.uniform_vector(6, 0.0, 4.0));
      EXPECT_GE(w.minCoeff(), 0.0) << pen.describe();
    }
  }
}

TEST(Penalty, Majorization) {
  TestRng rng(14);
  for (const auto& pen : catalog()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector y = rng.uniform_vector(5, 0.0, 4.0);
      const Vector yk = rng.uniform_vector(5, 0.0, 4.0);
      const double bound = pen.value(yk) + pen.weight(yk).dot(y - yk);
      EXPECT_LE(pen.value(y), bound + 1e-10) << pen.describe();
    }
  }
}

TEST(Penalty, WeightMatchesFiniteDifferences) {
  TestRng rng(15);
  for (const auto& pen : catalog()) {
    for (int trial = 0; trial < 50; ++trial) {
      Vector y = rng.uniform_vector(10, 0.05, 4.0);
      if (pen.kind() == PenaltyKind::CappedL1) {
        for (Index i = 0; i < y.size(); ++i)
          if (std::abs(y[i] - pen.theta()) < 1e-3) y[i] += 0.01;
      }
      const Vector fd = pire::testing::numeric_gradient([&](const Vector& v) { return pen.value(v); }, y);
      EXPECT_LT((pen.weight(y) - fd).norm() / std::max(1e-12, fd.norm()), 1e-5) << pen.describe();
    }
  }
}

TEST(Penalty, WithEpsilonLeavesOtherFieldsAlone) {
  const auto pen = ConcavePenalty::lp(0.3, 0.1).with_epsilon(0.02);
  EXPECT_EQ(pen.kind(), PenaltyKind::LpPower);
  EXPECT_EQ(pen.p(), 0.3);
  EXPECT_EQ(pen.epsilon(), 0.02);
  EXPECT_TRUE(pen.uses_epsilon());
  EXPECT_FALSE(ConcavePenalty::identity().uses_epsilon());
}
