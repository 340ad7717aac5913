#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icdmd/common.h"
#include "icdmd/dictionary.h"
#include "icdmd/linalg.h"

namespace icdmd {

/// Bookkeeping for one geometric invariant encoded in the columns of D.
struct InvariantTag {
  enum class Kind { kFixedPoint, kLimitCycle };

  Kind kind{Kind::kFixedPoint};
  Eigen::Index column_begin{0};
  /// 1 for a fixed point, the period q for a cycle.
  Eigen::Index column_count{1};
  /// p x q states, in orbit order for cycles.
  StateMatrix state_points;
  /// Free-form provenance label; functions sharing a label form one group.
  std::string label;

  bool operator==(const InvariantTag&) const = default;
};

/// The matrices defining the feasible set
///   {A : A D = G⁺, Eᵀ A = (F⁺)ᵀ}.
/// D and G⁺ are m x g (dictionary at invariant states and at their images);
/// E and F⁺ are m x f (coefficients of encoded functions and of their images).
struct ConstraintSet {
  Eigen::Index m{0};
  MatrixXd d;
  MatrixXd g_plus;
  MatrixXd e;
  MatrixXd f_plus;
  std::vector<InvariantTag> tags;

  static ConstraintSet Empty(Eigen::Index m);

  Eigen::Index num_geometric() const { return d.cols(); }
  Eigen::Index num_functional() const { return e.cols(); }
  bool empty() const { return d.cols() == 0 && e.cols() == 0; }

  /// Throws ArgumentError on inconsistent shapes, non-finite entries, or
  /// tags that overlap or leave the geometric block.
  void CheckWellFormed() const;
};

enum class Strictness { kStrict, kGeneralized };

/// Diagnostic summary of the compatibility and redundancy assumptions.
struct ValidationReport {
  Strictness strictness{Strictness::kGeneralized};
  double tol{0.0};
  /// ‖Eᵀ G⁺ − (F⁺)ᵀ D‖_F
  double compatibility_residual{0.0};
  Eigen::Index d_cols{0};
  Eigen::Index d_rank{0};
  Eigen::Index e_cols{0};
  Eigen::Index e_rank{0};
  /// ‖G⁺ D† D − G⁺‖_F and ‖F⁺ E† E − F⁺‖_F
  double generalized_d_residual{0.0};
  double generalized_e_residual{0.0};

  bool compatible{true};
  bool full_column_rank{true};
  bool generalized_ok{true};
  bool passed{true};

  std::string ToString() const;
};

/// Checks compatibility and either full column rank of D and E (strict) or
/// the weaker range conditions (generalized). Residuals are compared against
/// the absolute threshold `tol`. Never throws on failing constraints.
ValidationReport Validate(const ConstraintSet& cs, double tol,
                          Strictness strictness,
                          const RankTolerance& rank_tol = RankTolerance::Default());

/// Every point is its own image: D = G⁺ = ψ(points). One tag per point,
/// labelled "<label_prefix>[i]".
ConstraintSet FromFixedPoints(const Dictionary& dict, const StateMatrix& points,
                              const std::string& label_prefix = "fixed_point");

/// Column j of D is ψ(orbit[j]); column j of G⁺ is ψ(orbit[(j+1) mod q]).
ConstraintSet FromLimitCycle(const Dictionary& dict, const StateMatrix& orbit,
                             const std::string& label = "cycle");

/// Encodes eᵀψ as an eigenfunction with real eigenvalue λ: E = e, F⁺ = λe.
ConstraintSet FromEigenfunction(const VectorXd& coeffs, double eigenvalue);

/// The constant function (eigenvalue 1) via the dictionary's representer.
ConstraintSet ConstantFunction(const Dictionary& dict);

/// Delay-embedding structure for ψ = [ψ̆; U∘ψ̆; ...; Uᵈ∘ψ̆] with
/// |ψ̆| = sub_size: E = [I; 0], F⁺ = [0; I], both (sub_size·(d+1)) x
/// (sub_size·d).
ConstraintSet HoDmdConstraints(Eigen::Index sub_size, Eigen::Index delays);

/// Column-wise concatenation; tags of `b` shift past the columns of `a`.
ConstraintSet Merge(const ConstraintSet& a, const ConstraintSet& b);

/// Removes functional columns (E, F⁺ pairs) that exactly repeat an earlier
/// pair, and geometric tags whose whole (D, G⁺) block exactly repeats an
/// earlier tag's block.
ConstraintSet DropDuplicateColumns(const ConstraintSet& cs);

}  // namespace icdmd
