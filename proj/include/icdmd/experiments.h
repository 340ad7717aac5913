#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icdmd/constraints.h"
#include "icdmd/dictionary.h"
#include "icdmd/dynamics.h"
#include "icdmd/linalg.h"
#include "icdmd/solver.h"
#include "icdmd/spectral.h"

namespace icdmd {

/// One ingredient of the constraint set encoded by the fully informed model.
struct ConstraintRecipe {
  enum class Kind { kFixedPoints, kLimitCycles, kConstantFunction };

  Kind kind{Kind::kFixedPoints};
  /// Orbits sampled per known cycle (limit cycles only).
  int count{1};
  /// Explicit starting angles; when empty, `count` phases are spread evenly
  /// over one step's rotation starting at `base_phase`, or drawn uniformly
  /// from the experiment seed when `randomize` is set.
  std::vector<double> phases;
  double base_phase{0.0};
  bool randomize{false};
};

enum class ModelKind { kEdmd, kIcdmdConstantOnly, kIcdmdFull };

std::string ToString(ModelKind kind);
ModelKind ModelKindFromString(const std::string& name);

struct ExperimentConfig {
  std::string name;
  std::string system;
  SamplingPlan plan;
  EscapePolicy escape{EscapePolicy::kDropColumn};
  DictionarySpec dictionary;
  std::vector<ConstraintRecipe> constraints;
  std::vector<ModelKind> models;
  /// Evaluation grid; its time step is unused.
  SamplingPlan output_grid;
  std::uint64_t seed{0};
  RankTolerance tol;
  EigenSolveMode eigen_mode{EigenSolveMode::kSequential};
};

/// Normalized spreads below this are rounding noise and reported as 0.
inline constexpr double kScoreResolution = 1e-10;

/// Level-set invariance scores of evaluated functions over known regions.
struct InvarianceDiagnostics {
  std::vector<std::string> functions;
  std::vector<std::string> regions;
  /// functions x regions
  Eigen::MatrixXd mean;
  Eigen::MatrixXd stddev;
  /// stddev divided by the function's range over the whole grid; 0 when the
  /// range is below 1e-12 or the ratio is below kScoreResolution.
  Eigen::MatrixXd normalized_stddev;
  Eigen::VectorXd global_range;
  /// Grid points scored per region.
  Eigen::VectorXi counts;
  /// Names of regions that received no grid point.
  std::vector<std::string> empty_regions;

  /// Mean of normalized_stddev over all functions and non-empty regions.
  double MeanNormalizedStddev() const;
  /// Largest normalized_stddev over non-empty regions.
  double MaxNormalizedStddev() const;
};

/// Scores `values` (functions x points). `labels[j]` is the region of point
/// j or -1 when the point is not scored.
InvarianceDiagnostics InvarianceScore(const Eigen::MatrixXd& values,
                                      const std::vector<int>& labels,
                                      const std::vector<std::string>& functions,
                                      const std::vector<std::string>& regions);

struct ModelResult {
  ModelKind kind{ModelKind::kEdmd};
  Eigen::MatrixXd a;
  /// ‖A X − Y‖_F on the training data.
  double residual{0.0};
  /// Present for constrained models.
  std::optional<IcdmdModel> icdmd;
  EigenfunctionSet eigenfunctions;
  /// True when the functions come from the induced (constrained) solve;
  /// false for the nearest-eigenvalue baseline.
  bool induced{false};
  /// functions x output grid points
  Eigen::MatrixXd values;
  /// Wᵀ D0: row i holds the functions at invariant i (cycles averaged).
  Eigen::MatrixXd duality;
  InvarianceDiagnostics diagnostics;
  /// Diagnostics after summing functions that share a provenance label.
  std::vector<std::string> group_labels;
  Eigen::MatrixXd group_values;
  InvarianceDiagnostics group_diagnostics;
  /// Grid measure of {|φ − 1| ≤ 0.1} per function.
  Eigen::VectorXd level_set_measure;
};

struct ExperimentResult {
  ExperimentConfig config;
  ConstraintSet constraints;
  Equalizer equalizer;
  Eigen::Index samples{0};
  Eigen::Index dropped{0};
  StateMatrix grid;
  std::vector<int> grid_regions;
  std::vector<ModelResult> models;

  const ModelResult& model(ModelKind kind) const;
};

/// Builds the full constraint set for a system from the recipe list.
ConstraintSet BuildConstraints(const OdeSystem& sys, const Dictionary& dict,
                               double k,
                               const std::vector<ConstraintRecipe>& recipes,
                               std::uint64_t seed);

/// Samples the system, fits every requested model on the same data, extracts
/// eigenfunctions at λ = 1, evaluates them on the output grid, and scores
/// invariance. Errors are rethrown with the failing stage in the message.
ExperimentResult RunExperiment(const ExperimentConfig& cfg);

enum class Scale { kDesk, kPaper };

/// Names accepted by PresetConfig.
std::vector<std::string> PresetNames();

/// Built-in configurations reproducing the benchmark studies.
ExperimentConfig PresetConfig(const std::string& name, Scale scale);

}  // namespace icdmd
