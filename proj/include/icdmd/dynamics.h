#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icdmd/common.h"
#include "icdmd/dictionary.h"

namespace icdmd {

/// Right-hand side f(x) written into `dx`; both spans have the state size.
using VectorField =
    std::function<void(std::span<const double> x, std::span<double> dx)>;

/// A circular periodic orbit of a planar system rotating at a constant rate.
struct KnownCycle {
  double radius{0.0};
  /// Angular velocity in radians per unit time.
  double angular_rate{0.0};
  std::string label;
};

/// Known invariant regions used to score level-set invariance.
///
/// Intervals: one-dimensional regions separated by the sorted `breakpoints`.
/// Annuli: planar regions between consecutive radii in `breakpoints`, the
/// first of which is 0 (the origin belongs to no region). Basins: region i is
/// the basin of attraction of fixed point `attractors[i]`, found by
/// integrating for `horizon` time units.
struct InvariantPartition {
  enum class Kind { kNone, kIntervals, kAnnuli, kBasins };

  Kind kind{Kind::kNone};
  std::vector<double> breakpoints;
  std::vector<Eigen::Index> attractors;
  double horizon{0.0};
  std::vector<std::string> region_names;
  /// Scoring is restricted to states inside this box when it is non-empty.
  Box window;
};

/// An autonomous ODE ẋ = f(x) with its known invariants.
struct OdeSystem {
  std::string name;
  int dim{1};
  VectorField field;
  /// p x (number of fixed points).
  StateMatrix fixed_points;
  std::vector<std::string> fixed_point_labels;
  std::vector<KnownCycle> cycles;
  InvariantPartition partition;

  Eigen::VectorXd Evaluate(const Eigen::VectorXd& state) const;

  /// Region index of `state`, or nullopt on a region boundary, outside the
  /// scoring window, or when the partition is empty.
  std::optional<int> Region(const Eigen::VectorXd& state) const;

  /// Region index shared by every point of `cell`, or nullopt when the cell
  /// straddles a boundary. Basin partitions test a 5-point-per-dimension
  /// stencil including the corners.
  std::optional<int> CellRegion(const Box& cell) const;
};

/// Equi-spaced sampling of a box and the flow-map time step.
struct SamplingPlan {
  Box bounds{{-1.0, 1.0}};
  std::vector<int> counts{101};
  double k{0.1};
  int substeps{50};

  void Check() const;
  Eigen::Index size() const;
};

enum class EscapePolicy { kClamp, kDropColumn, kError };

/// Training snapshots and bookkeeping.
struct DataMatrices {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  StateMatrix states;
  StateMatrix images;
  /// Samples removed because their image left the dictionary domain.
  Eigen::Index dropped{0};
};

/// Largest grid accepted by SampleGrid.
inline constexpr Eigen::Index kMaxGridPoints = 20'000'000;

/// Classical fourth-order Runge–Kutta over time k with `substeps` equal
/// steps. Throws IntegrationError when the state becomes non-finite.
Eigen::VectorXd Flow(const OdeSystem& sys, const Eigen::VectorXd& state,
                     double k, int substeps);

/// Known systems: "cubic_multistable", "cubic_halfstable", "duffing",
/// "polar_limit_cycles".
OdeSystem Builtin(const std::string& name);

std::vector<std::string> BuiltinNames();

/// States of known cycle `cycle_index` sampled every k time units starting
/// at angle `phase`; point j flows onto point j+1 (mod q). Requires the
/// rotation per step to divide a whole turn for some q <= 10000.
StateMatrix PeriodicOrbit(const OdeSystem& sys, size_t cycle_index, double k,
                          double phase);

/// Cell-centred tensor grid with the first dimension varying fastest.
StateMatrix SampleGrid(const SamplingPlan& plan);

/// X column j is ψ(υⱼ) and Y column j is ψ(Flow(υⱼ)) over the grid of
/// `plan`. Images outside the dictionary domain are clamped, dropped, or
/// reported as errors according to `policy`.
DataMatrices BuildDataMatrices(const Dictionary& dict, const OdeSystem& sys,
                               const SamplingPlan& plan,
                               EscapePolicy policy = EscapePolicy::kDropColumn);

}  // namespace icdmd
