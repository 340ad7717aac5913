#include "icdmd/experiments.h"

#include <gtest/gtest.h>

#include "icdmd/errors.h"

namespace icdmd {
namespace {

const std::vector<std::string> kTwoRegions{"left", "right"};

GTEST_TEST(InvarianceScoreTest, ConstantFunction) {
  const MatrixXd values = MatrixXd::Constant(1, 6, 0.4);
  const auto diag =
      InvarianceScore(values, {0, 0, 0, 1, 1, 1}, {"f"}, kTwoRegions);
  EXPECT_EQ(diag.normalized_stddev, MatrixXd::Zero(1, 2));
  EXPECT_EQ(diag.global_range(0), 0.0);
}

GTEST_TEST(InvarianceScoreTest, AlignedStep) {
  MatrixXd values(1, 6);
  values << 0, 0, 0, 1, 1, 1;
  const auto diag =
      InvarianceScore(values, {0, 0, 0, 1, 1, 1}, {"f"}, kTwoRegions);
  EXPECT_EQ(diag.normalized_stddev, MatrixXd::Zero(1, 2));
  EXPECT_EQ(diag.mean(0, 1), 1.0);
  EXPECT_EQ(diag.counts, Eigen::Vector2i(3, 3));
}

GTEST_TEST(InvarianceScoreTest, MisalignedStepAndSkippedPoints) {
  MatrixXd values(1, 5);
  values << 0, 1, 0, 1, 7;
  const auto diag = InvarianceScore(values, {0, 0, 0, 0, -1}, {"f"}, kTwoRegions);
  EXPECT_DOUBLE_EQ(diag.stddev(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(diag.normalized_stddev(0, 0), 0.5 / 7.0);
  ASSERT_EQ(diag.empty_regions.size(), 1u);
  EXPECT_EQ(diag.empty_regions[0], "right");
  EXPECT_DOUBLE_EQ(diag.MeanNormalizedStddev(), 0.5 / 7.0);
}

GTEST_TEST(InvarianceScoreTest, ShapeErrors) {
  EXPECT_THROW(InvarianceScore(MatrixXd::Zero(1, 3), {0, 1}, {"f"}, kTwoRegions),
               ArgumentError);
  EXPECT_THROW(InvarianceScore(MatrixXd::Zero(1, 2), {0, 2}, {"f"}, kTwoRegions),
               ArgumentError);
}

GTEST_TEST(ModelKindTest, Names) {
  for (ModelKind k : {ModelKind::kEdmd, ModelKind::kIcdmdConstantOnly,
                      ModelKind::kIcdmdFull}) {
    EXPECT_EQ(ModelKindFromString(ToString(k)), k);
  }
  EXPECT_THROW(ModelKindFromString("dmd"), ArgumentError);
}

GTEST_TEST(BuildConstraintsTest, PolarPresetInvariants) {
  const ExperimentConfig cfg = PresetConfig("polar_limit_cycles", Scale::kDesk);
  const OdeSystem sys = Builtin(cfg.system);
  const Dictionary dict = cfg.dictionary.Build();
  const ConstraintSet cs =
      BuildConstraints(sys, dict, cfg.plan.k, cfg.constraints, cfg.seed);
  EXPECT_EQ(cs.tags.size(), 9u);
  // One fixed point plus four phases on each of two period-6 cycles.
  EXPECT_EQ(cs.num_geometric(), 1 + 8 * 6);
  EXPECT_EQ(cs.num_functional(), 1);
  EXPECT_EQ(BuildEqualizer(cs).size(), 9);
}

GTEST_TEST(BuildConstraintsTest, SeededPhasesAreReproducible) {
  const OdeSystem sys = Builtin("polar_limit_cycles");
  const Dictionary dict = Dictionary::Indicator({21, 21}, {{-1, 1}, {-1, 1}});
  ConstraintRecipe r;
  r.kind = ConstraintRecipe::Kind::kLimitCycles;
  r.count = 2;
  r.randomize = true;
  const ConstraintSet a = BuildConstraints(sys, dict, 1.0 / 6.0, {r}, 42);
  const ConstraintSet b = BuildConstraints(sys, dict, 1.0 / 6.0, {r}, 42);
  EXPECT_EQ(a.tags, b.tags);
  EXPECT_THROW(
      BuildConstraints(Builtin("duffing"), dict, 1.6, {r}, 0), UnsupportedError);
}

GTEST_TEST(RunExperimentTest, CubicDeskPipeline) {
  const ExperimentConfig cfg = PresetConfig("cubic_multistable", Scale::kDesk);
  const ExperimentResult res = RunExperiment(cfg);
  EXPECT_EQ(res.models.size(), 3u);
  EXPECT_EQ(res.samples, 1201);
  const ModelResult& full = res.model(ModelKind::kIcdmdFull);
  EXPECT_TRUE(full.induced);
  EXPECT_EQ(full.eigenfunctions.w.cols(), 3);
  EXPECT_LE(full.eigenfunctions.duality_residual, 1e-8);
  EXPECT_LE(full.diagnostics.MaxNormalizedStddev(), 0.05);
  EXPECT_LE((full.duality - MatrixXd::Identity(3, 3)).norm(), 1e-8);
  EXPECT_EQ(full.level_set_measure.size(), 3);
  // The stable points own level sets of positive measure; the unstable one
  // does not.
  EXPECT_GT(full.level_set_measure(0), 0.1);
  EXPECT_GT(full.level_set_measure(2), 0.1);
  EXPECT_LT(full.level_set_measure(1), full.level_set_measure(0));
}

GTEST_TEST(RunExperimentTest, Deterministic) {
  ExperimentConfig cfg = PresetConfig("cubic_halfstable", Scale::kDesk);
  cfg.models = {ModelKind::kIcdmdFull};
  const ExperimentResult a = RunExperiment(cfg);
  const ExperimentResult b = RunExperiment(cfg);
  EXPECT_EQ(a.models[0].a, b.models[0].a);
  EXPECT_EQ(a.models[0].values, b.models[0].values);
}

GTEST_TEST(RunExperimentTest, StageLabelledErrors) {
  ExperimentConfig cfg = PresetConfig("cubic_multistable", Scale::kDesk);
  cfg.system = "unknown";
  try {
    RunExperiment(cfg);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("system:", 0), 0u);
  }
  cfg = PresetConfig("cubic_multistable", Scale::kDesk);
  cfg.constraints.clear();
  try {
    RunExperiment(cfg);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("equalizer:", 0), 0u);
  }
}

GTEST_TEST(PresetTest, NamesAndScales) {
  for (const std::string& name : PresetNames()) {
    EXPECT_NO_THROW(PresetConfig(name, Scale::kDesk));
    EXPECT_NO_THROW(PresetConfig(name, Scale::kPaper));
  }
  EXPECT_EQ(PresetConfig("duffing", Scale::kDesk).dictionary.Build().size(), 441);
  EXPECT_EQ(PresetConfig("duffing", Scale::kPaper).dictionary.Build().size(), 1225);
  EXPECT_EQ(PresetConfig("duffing", Scale::kDesk).plan.k, 1.6);
  EXPECT_THROW(PresetConfig("lorenz", Scale::kDesk), ArgumentError);
}

}  // namespace
}  // namespace icdmd
