#include "icdmd/linalg.h"

#include <gtest/gtest.h>

#include "icdmd/errors.h"
#include "test_util.h"

namespace icdmd {
namespace {

using test::RandomMatrix;
using test::RandomRankMatrix;

GTEST_TEST(PseudoInverseTest, DiagonalWithZero) {
  const Eigen::Matrix2d m = Eigen::Vector2d(2.0, 0.0).asDiagonal();
  const MatrixXd pinv = PseudoInverse(m);
  EXPECT_DOUBLE_EQ(pinv(0, 0), 0.5);
  EXPECT_EQ(pinv(1, 1), 0.0);
  EXPECT_EQ(pinv(0, 1), 0.0);
  EXPECT_EQ(pinv(1, 0), 0.0);
}

GTEST_TEST(PseudoInverseTest, Identity) {
  const MatrixXd i3 = MatrixXd::Identity(3, 3);
  EXPECT_LE((PseudoInverse(i3) - i3).norm(), 1e-15);
}

GTEST_TEST(PseudoInverseTest, PenroseIdentitiesAcrossRanks) {
  std::mt19937_64 rng(7);
  for (int rows : {1, 4, 7}) {
    for (int cols : {1, 3, 6}) {
      for (int rank = 0; rank <= std::min(rows, cols); ++rank) {
        const MatrixXd m = RandomRankMatrix(rows, cols, rank, rng);
        const MatrixXd p = PseudoInverse(m);
        ASSERT_EQ(p.rows(), cols);
        ASSERT_EQ(p.cols(), rows);
        EXPECT_LE((m * p * m - m).norm(), 1e-10 * std::max(m.norm(), 1.0));
        EXPECT_LE((p * m * p - p).norm(), 1e-10 * std::max(p.norm(), 1.0));
        EXPECT_LE((m * p - (m * p).transpose()).norm(), 1e-10);
        EXPECT_LE((p * m - (p * m).transpose()).norm(), 1e-10);
        EXPECT_EQ(NumericalRank(m), rank);
      }
    }
  }
}

GTEST_TEST(PseudoInverseTest, RejectsNonFinite) {
  MatrixXd m = MatrixXd::Ones(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(PseudoInverse(m), ArgumentError);
}

GTEST_TEST(RankToleranceTest, Modes) {
  const MatrixXd m = Eigen::Vector3d(1.0, 1e-6, 1e-17).asDiagonal();
  EXPECT_EQ(NumericalRank(m), 2);
  EXPECT_EQ(NumericalRank(m, RankTolerance::Relative(1e-5)), 1);
  EXPECT_EQ(NumericalRank(m, RankTolerance::Absolute(1e-18)), 3);
  EXPECT_THROW(RankTolerance::Relative(-1.0), ArgumentError);
}

GTEST_TEST(ComplementBasisTest, CoordinateAxis) {
  const MatrixXd e1 = Eigen::Vector2d(1.0, 0.0);
  const MatrixXd q = OrthonormalComplementBasis(e1);
  ASSERT_EQ(q.rows(), 2);
  ASSERT_EQ(q.cols(), 1);
  EXPECT_NEAR(q(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q(1, 0)), 1.0, 1e-15);
}

GTEST_TEST(ComplementBasisTest, EmptyAndZeroGiveWholeSpace) {
  for (const MatrixXd& m : {MatrixXd(4, 0), MatrixXd(MatrixXd::Zero(4, 2))}) {
    const MatrixXd q = OrthonormalComplementBasis(m);
    ASSERT_EQ(q.rows(), 4);
    ASSERT_EQ(q.cols(), 4);
    EXPECT_LE((q.transpose() * q - MatrixXd::Identity(4, 4)).norm(), 1e-14);
  }
}

GTEST_TEST(ComplementBasisTest, RandomFullRank) {
  std::mt19937_64 rng(11);
  const MatrixXd m = RandomMatrix(6, 2, rng);
  const MatrixXd q = OrthonormalComplementBasis(m);
  ASSERT_EQ(q.cols(), 4);
  EXPECT_LE((m.transpose() * q).norm(), 1e-12);
  EXPECT_LE((q.transpose() * q - MatrixXd::Identity(4, 4)).norm(), 1e-12);
}

// M M† + Q Qᵀ = I with exactly m − rank(M) columns in Q.
GTEST_TEST(ComplementBasisTest, CompletenessIdentity) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = test::RandomInt(1, 9, rng);
    const int cols = test::RandomInt(0, 9, rng);
    const int rank = test::RandomInt(0, std::min(rows, cols), rng);
    const MatrixXd m = RandomRankMatrix(rows, cols, rank, rng);
    const MatrixXd q = OrthonormalComplementBasis(m);
    ASSERT_EQ(q.cols(), rows - rank);
    const MatrixXd sum = m * PseudoInverse(m) + q * q.transpose();
    EXPECT_LE((sum - MatrixXd::Identity(rows, rows)).norm(), 1e-10);
  }
}

GTEST_TEST(RangeBasisTest, SpansColumns) {
  std::mt19937_64 rng(17);
  const MatrixXd m = RandomRankMatrix(7, 5, 3, rng);
  const MatrixXd u = OrthonormalRangeBasis(m);
  ASSERT_EQ(u.cols(), 3);
  EXPECT_LE((u * u.transpose() * m - m).norm(), 1e-10 * m.norm());
}

GTEST_TEST(MinNormLstsqTest, IdentityCoefficient) {
  std::mt19937_64 rng(19);
  const MatrixXd b = RandomMatrix(3, 4, rng);
  EXPECT_LE((MinNormRightLstsq(MatrixXd::Identity(4, 4), b) - b).norm(), 1e-14);
}

GTEST_TEST(MinNormLstsqTest, DeficientDirectionZeroed) {
  const MatrixXd c = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  const MatrixXd b = Eigen::RowVector2d(1.0, 1.0);
  const MatrixXd x = MinNormRightLstsq(c, b);
  EXPECT_NEAR(x(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(x(0, 1), 0.0, 1e-15);
}

GTEST_TEST(MinNormLstsqTest, MatchesNormalEquations) {
  std::mt19937_64 rng(23);
  const MatrixXd c = RandomMatrix(4, 20, rng);
  const MatrixXd b = RandomMatrix(3, 20, rng);
  const MatrixXd normal =
      (c * c.transpose()).ldlt().solve(c * b.transpose()).transpose();
  EXPECT_LE((MinNormRightLstsq(c, b) - normal).norm(), 1e-10);
}

GTEST_TEST(MinNormLstsqTest, ShapeMismatch) {
  EXPECT_THROW(MinNormRightLstsq(MatrixXd::Ones(2, 3), MatrixXd::Ones(2, 4)),
               ArgumentError);
}

}  // namespace
}  // namespace icdmd
