#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace icdmd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Threshold below which singular values count as zero.
///
/// In relative mode the threshold is `value * sigma_max`; in absolute mode it
/// is `value` itself. A missing value selects `max(rows, cols) * epsilon`
/// relative to the largest singular value.
struct RankTolerance {
  enum class Mode { kRelative, kAbsolute };

  Mode mode{Mode::kRelative};
  std::optional<double> value;

  static RankTolerance Default() { return {}; }
  static RankTolerance Relative(double v);
  static RankTolerance Absolute(double v);

  /// Resolves the cutoff for a matrix of the given shape.
  double Threshold(double sigma_max, Eigen::Index rows,
                   Eigen::Index cols) const;
};

/// Throws ArgumentError unless every entry of `m` is finite.
void RequireFinite(const MatrixXd& m, std::string_view what);

/// Singular values of `m`, sorted descending.
VectorXd SingularValues(const MatrixXd& m);

/// Number of singular values above the tolerance threshold.
Eigen::Index NumericalRank(const MatrixXd& m,
                           const RankTolerance& tol = RankTolerance::Default());

/// Moore-Penrose pseudo-inverse via SVD with small singular values dropped.
MatrixXd PseudoInverse(const MatrixXd& m,
                       const RankTolerance& tol = RankTolerance::Default());

/// Orthonormal basis Q (m x (m - rank)) of the null space of `mᵀ`, i.e. the
/// orthogonal complement of the column space of `m`. QᵀQ = I and mᵀQ = 0.
MatrixXd OrthonormalComplementBasis(
    const MatrixXd& m, const RankTolerance& tol = RankTolerance::Default());

/// Orthonormal basis (m x rank) of the column space of `m`.
MatrixXd OrthonormalRangeBasis(
    const MatrixXd& m, const RankTolerance& tol = RankTolerance::Default());

/// Minimum-Frobenius-norm X minimizing ‖X C − B‖_F, i.e. X = B C†.
MatrixXd MinNormRightLstsq(const MatrixXd& c, const MatrixXd& b,
                           const RankTolerance& tol = RankTolerance::Default());

}  // namespace icdmd
