#include "icdmd/solver.h"

#include <gtest/gtest.h>

#include "icdmd/errors.h"
#include "test_util.h"

namespace icdmd {
namespace {

using test::RandomCompatibleInstance;
using test::RandomInt;
using test::RandomMatrix;

double Objective(const MatrixXd& a, const MatrixXd& x, const MatrixXd& y) {
  return (a * x - y).squaredNorm();
}

void ExpectFeasible(const IcdmdModel& model, const ConstraintSet& cs) {
  EXPECT_LE((model.a * cs.d - cs.g_plus).norm(),
            1e-9 * (1.0 + cs.g_plus.norm()));
  EXPECT_LE((cs.e.transpose() * model.a - cs.f_plus.transpose()).norm(),
            1e-9 * (1.0 + cs.f_plus.norm()));
}

// The 2 x 2 hand instance: row 1 forced to e₁ᵀ, column 1 forced to e₁, the
// free entry fits Y(1,1) = 4.
struct HandInstance {
  MatrixXd x = MatrixXd::Identity(2, 2);
  MatrixXd y = (MatrixXd(2, 2) << 1, 2, 3, 4).finished();
  ConstraintSet cs;
  MatrixXd expected = (MatrixXd(2, 2) << 1, 0, 0, 4).finished();

  HandInstance() {
    cs = ConstraintSet::Empty(2);
    cs.d = cs.g_plus = cs.e = cs.f_plus = VectorXd::Unit(2, 0);
  }
};

GTEST_TEST(EdmdTest, IdentityData) {
  std::mt19937_64 rng(1);
  const MatrixXd y = RandomMatrix(4, 4, rng);
  EXPECT_LE((SolveEdmd(MatrixXd::Identity(4, 4), y) - y).norm(), 1e-13);
}

GTEST_TEST(EdmdTest, RecoversPlantedMatrix) {
  std::mt19937_64 rng(2);
  const MatrixXd m = RandomMatrix(5, 5, rng);
  const MatrixXd x = RandomMatrix(5, 40, rng);
  EXPECT_LE((SolveEdmd(x, m * x) - m).norm(), 1e-10 * m.norm());
}

GTEST_TEST(EdmdTest, RepeatedColumnConflict) {
  // The same snapshot mapped to two different images.
  MatrixXd x(2, 2), y(2, 2);
  x << 1, 1, 0, 0;
  y << 1, 0, 0, 1;
  const MatrixXd a = SolveEdmd(x, y);
  EXPECT_GT(FitResidual(a, x, y), 0.5);
  EXPECT_NEAR(a(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(a(1, 0), 0.5, 1e-14);
  EXPECT_THROW(SolveEdmd(x, MatrixXd::Ones(2, 3)), ArgumentError);
}

GTEST_TEST(ComputeC0Test, HandCases) {
  EXPECT_EQ(ComputeC0(ConstraintSet::Empty(3)), MatrixXd::Zero(3, 3));

  ConstraintSet fp = ConstraintSet::Empty(2);
  fp.d = fp.g_plus = VectorXd::Unit(2, 0);
  const MatrixXd e1e1 = VectorXd::Unit(2, 0) * VectorXd::Unit(2, 0).transpose();
  EXPECT_LE((ComputeC0(fp) - e1e1).norm(), 1e-15);

  ConstraintSet affine = ConstraintSet::Empty(2);
  affine.e = affine.f_plus = VectorXd::Unit(2, 0);
  EXPECT_LE((ComputeC0(affine) - e1e1).norm(), 1e-15);

  ConstraintSet bad = fp;
  bad.e = VectorXd::Unit(2, 0);
  bad.f_plus = 2.0 * VectorXd::Unit(2, 0);
  EXPECT_THROW(ComputeC0(bad), ConstraintError);
}

GTEST_TEST(IcdmdTest, HandInstance) {
  const HandInstance h;
  const IcdmdModel model = SolveIcdmd(h.x, h.y, h.cs);
  EXPECT_LE((model.a - h.expected).norm(), 1e-14);
  EXPECT_LE((KktOracle(h.x, h.y, h.cs) - h.expected).norm(), 1e-10);
}

GTEST_TEST(IcdmdTest, EmptyConstraintsDegenerateToEdmd) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = RandomInt(1, 8, rng);
    const int n = RandomInt(1, 20, rng);
    const MatrixXd x = RandomMatrix(m, n, rng);
    const MatrixXd y = RandomMatrix(m, n, rng);
    const MatrixXd edmd = SolveEdmd(x, y);
    const IcdmdModel model = SolveIcdmd(x, y, ConstraintSet::Empty(m));
    EXPECT_LE((model.a - edmd).norm(), 1e-10 * std::max(edmd.norm(), 1e-300));
    EXPECT_NEAR(Objective(KktOracle(x, y, ConstraintSet::Empty(m)), x, y),
                Objective(edmd, x, y), 1e-8 * (1.0 + Objective(edmd, x, y)));
  }
}

GTEST_TEST(IcdmdTest, PlantedFeasibleSolution) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = RandomCompatibleInstance(8, 2, 2, 30, 0.0, rng);
    const IcdmdModel model = SolveIcdmd(inst.x, inst.y, inst.cs);
    EXPECT_LE(model.residual, 1e-8 * inst.y.norm());
    ExpectFeasible(model, inst.cs);
  }
}

GTEST_TEST(IcdmdTest, FactorsReconstruct) {
  std::mt19937_64 rng(5);
  const auto inst = RandomCompatibleInstance(7, 3, 2, 20, 0.3, rng);
  const IcdmdModel model = SolveIcdmd(inst.x, inst.y, inst.cs);
  const MatrixXd rebuilt =
      model.c0 + model.e_perp * model.a_lsq * model.d_perp.transpose();
  EXPECT_LE((rebuilt - model.a).norm(), 1e-12 * model.a.norm());
  EXPECT_EQ(model.d_perp.cols(), 4);
  EXPECT_EQ(model.e_perp.cols(), 5);
  EXPECT_NEAR(model.residual, FitResidual(model.a, inst.x, inst.y), 1e-12);
}

// Perturbing the free block never lowers the objective.
GTEST_TEST(IcdmdTest, OptimalWithinFeasibleSet) {
  std::mt19937_64 rng(6);
  const auto inst = RandomCompatibleInstance(6, 2, 1, 15, 0.5, rng);
  const IcdmdModel model = SolveIcdmd(inst.x, inst.y, inst.cs);
  for (int k = 0; k < 100; ++k) {
    const MatrixXd tilde =
        RandomMatrix(model.a_lsq.rows(), model.a_lsq.cols(), rng);
    const MatrixXd other =
        model.c0 + model.e_perp * (model.a_lsq + tilde) * model.d_perp.transpose();
    EXPECT_GE(FitResidual(other, inst.x, inst.y), model.residual - 1e-9);
  }
}

// Any feasible A is reproduced by its own free block (E⊥)ᵀ A D⊥.
GTEST_TEST(IcdmdTest, ParametrizationRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = RandomCompatibleInstance(6, RandomInt(0, 3, rng),
                                               RandomInt(0, 3, rng), 12, 0.1, rng);
    const IcdmdModel model = SolveIcdmd(inst.x, inst.y, inst.cs);
    const MatrixXd tilde = (model.e_perp.transpose() * inst.a0 * model.d_perp);
    const MatrixXd rebuilt =
        model.c0 + model.e_perp * tilde * model.d_perp.transpose();
    EXPECT_LE((rebuilt - inst.a0).norm(), 1e-10 * inst.a0.norm());
  }
}

GTEST_TEST(IcdmdTest, AgreesWithKktOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = RandomInt(2, 6, rng);
    const auto inst = RandomCompatibleInstance(m, RandomInt(0, 2, rng),
                                               RandomInt(0, 2, rng),
                                               RandomInt(2, 12, rng), 0.4, rng);
    const double ours = Objective(SolveIcdmd(inst.x, inst.y, inst.cs).a,
                                  inst.x, inst.y);
    const double oracle =
        Objective(KktOracle(inst.x, inst.y, inst.cs), inst.x, inst.y);
    EXPECT_NEAR(ours, oracle, 1e-7 * std::max(1.0, oracle));
  }
}

GTEST_TEST(IcdmdTest, RejectsIncompatibleConstraints) {
  HandInstance h;
  h.cs.f_plus *= 2.0;
  try {
    SolveIcdmd(h.x, h.y, h.cs);
    FAIL();
  } catch (const ConstraintError& e) {
    EXPECT_NE(std::string(e.what()).find("compatibility residual"),
              std::string::npos);
  }
  EXPECT_THROW(SolveIcdmd(h.x, MatrixXd::Ones(3, 2), HandInstance().cs),
               ArgumentError);
}

GTEST_TEST(IcdmdTest, GeneralizedRedundancyAccepted) {
  std::mt19937_64 rng(9);
  auto inst = RandomCompatibleInstance(5, 2, 0, 20, 0.2, rng);
  // Duplicate a geometric column and its image.
  MatrixXd d(5, 3), g(5, 3);
  d << inst.cs.d, inst.cs.d.col(0);
  g << inst.cs.g_plus, inst.cs.g_plus.col(0);
  inst.cs.d = d;
  inst.cs.g_plus = g;
  EXPECT_THROW(SolveIcdmd(inst.x, inst.y, inst.cs, RankTolerance::Default(),
                          Strictness::kStrict),
               ConstraintError);
  const IcdmdModel model = SolveIcdmd(inst.x, inst.y, inst.cs);
  ExpectFeasible(model, inst.cs);
}

// Data whose first observable is the constant 1.
struct AffineData {
  MatrixXd x;
  MatrixXd y;
};

AffineData MakeAffineData(int m, int n, bool consistent, std::mt19937_64& rng) {
  AffineData d;
  const MatrixXd x2 = RandomMatrix(m - 1, n, rng);
  MatrixXd y2;
  if (consistent) {
    const MatrixXd mbar = RandomMatrix(m - 1, m - 1, rng);
    const VectorXd c = RandomMatrix(m - 1, 1, rng);
    y2 = (mbar * x2).colwise() + c;
  } else {
    y2 = RandomMatrix(m - 1, n, rng);
  }
  d.x.resize(m, n);
  d.y.resize(m, n);
  d.x << MatrixXd::Ones(1, n), x2;
  d.y << MatrixXd::Ones(1, n), y2;
  return d;
}

GTEST_TEST(AffineTest, FirstRowAndOffsetIdentity) {
  std::mt19937_64 rng(10);
  ConstraintSet cs = ConstraintSet::Empty(4);
  cs.e = cs.f_plus = VectorXd::Unit(4, 0);
  for (bool consistent : {true, false}) {
    const AffineData data = MakeAffineData(4, consistent ? 30 : 6, consistent, rng);
    const MatrixXd a = SolveIcdmd(data.x, data.y, cs).a;
    EXPECT_LE((a.row(0) - VectorXd::Unit(4, 0).transpose()).norm(), 1e-10);
    const VectorXd mu_x = data.x.bottomRows(3).rowwise().mean();
    const VectorXd mu_y = data.y.bottomRows(3).rowwise().mean();
    const VectorXd offset = a.block(1, 0, 3, 1);
    const MatrixXd a22 = a.bottomRightCorner(3, 3);
    EXPECT_LE((offset - (mu_y - a22 * mu_x)).norm(), 1e-8);

    const AffineModel affine =
        SolveAffine(data.x.bottomRows(3), data.y.bottomRows(3));
    EXPECT_LE((affine.b_bar - (mu_y - affine.a_bar * mu_x)).norm(), 1e-10);
    EXPECT_NEAR(Objective(affine.Embedded(), data.x, data.y),
                Objective(a, data.x, data.y), 1e-8);
  }
}

GTEST_TEST(AffineTest, CaseDetection) {
  std::mt19937_64 rng(11);
  const AffineData exact = MakeAffineData(3, 25, true, rng);
  const AffineModel fit = SolveAffine(exact.x.bottomRows(2), exact.y.bottomRows(2));
  EXPECT_EQ(fit.fit_case, AffineModel::Case::kExactFit);
  EXPECT_LE(fit.residual, 1e-10);

  const AffineData noisy = MakeAffineData(3, 25, false, rng);
  EXPECT_EQ(SolveAffine(noisy.x.bottomRows(2), noisy.y.bottomRows(2)).fit_case,
            AffineModel::Case::kLeastSquares);
}

GTEST_TEST(AffineTest, IdentityDynamics) {
  std::mt19937_64 rng(12);
  const MatrixXd x2 = RandomMatrix(3, 10, rng);
  const AffineModel fit = SolveAffine(x2, x2);
  EXPECT_LE((fit.a_bar - MatrixXd::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LE(fit.b_bar.norm(), 1e-10);
  const MatrixXd emb = fit.Embedded();
  EXPECT_EQ(emb.rows(), 4);
  EXPECT_EQ(emb(0, 0), 1.0);
  EXPECT_EQ(emb.block(0, 1, 1, 3), MatrixXd::Zero(1, 3));
}

GTEST_TEST(HoDmdTest, BlockCompanionRows) {
  std::mt19937_64 rng(13);
  const MatrixXd m = 0.9 * MatrixXd(RandomMatrix(2, 2, rng).householderQr().householderQ());
  // Several trajectories of x_{t+1} = M x_t embedded with two delays.
  const int traj = 5, len = 8;
  MatrixXd x(6, traj * len), y(6, traj * len);
  for (int r = 0; r < traj; ++r) {
    std::vector<VectorXd> s{RandomMatrix(2, 1, rng)};
    for (int t = 0; t < len + 3; ++t) s.push_back(m * s.back());
    for (int t = 0; t < len; ++t) {
      x.col(r * len + t) << s[t], s[t + 1], s[t + 2];
      y.col(r * len + t) << s[t + 1], s[t + 2], s[t + 3];
    }
  }
  y += 1e-3 * RandomMatrix(6, traj * len, rng);
  const MatrixXd a = SolveIcdmd(x, y, HoDmdConstraints(2, 2)).a;
  MatrixXd pattern = MatrixXd::Zero(4, 6);
  pattern.rightCols(4) = MatrixXd::Identity(4, 4);
  EXPECT_LE((a.topRows(4) - pattern).norm(), 1e-10);
}

GTEST_TEST(KktOracleTest, SizeGuard) {
  EXPECT_THROW(KktOracle(MatrixXd::Ones(31, 2), MatrixXd::Ones(31, 2),
                         ConstraintSet::Empty(31)),
               ArgumentError);
}

}  // namespace
}  // namespace icdmd
