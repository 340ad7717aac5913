#pragma once

#include <Eigen/Dense>

#include "icdmd/constraints.h"
#include "icdmd/linalg.h"

namespace icdmd {

/// Relative tolerance on ‖A D − G⁺‖_F and ‖Eᵀ A − (F⁺)ᵀ‖_F for fitted
/// models, scaled by (1 + ‖G⁺‖_F) and (1 + ‖F⁺‖_F) respectively.
inline constexpr double kFeasibilityTol = 1e-9;

/// A constrained linear surrogate together with its constructive factors.
///
/// The model matrix satisfies A = C0 + E⊥ · Alsq · D⊥ᵀ, where the columns of
/// D⊥ and E⊥ are orthonormal bases of the complements of range(D) and
/// range(E), C0 is a particular member of the feasible set, and Alsq is the
/// minimum-norm least-squares fit of the free block.
struct IcdmdModel {
  MatrixXd a;
  MatrixXd c0;
  MatrixXd d_perp;
  MatrixXd e_perp;
  MatrixXd a_lsq;
  /// ‖A X − Y‖_F on the training data.
  double residual{0.0};
  /// ‖A D − G⁺‖_F and ‖Eᵀ A − (F⁺)ᵀ‖_F.
  double geometric_residual{0.0};
  double functional_residual{0.0};
  ConstraintSet constraints;
};

/// Affine DMD parameters for the non-constant observables.
struct AffineModel {
  enum class Case { kExactFit, kLeastSquares };

  MatrixXd a_bar;
  VectorXd b_bar;
  Case fit_case{Case::kLeastSquares};
  /// ‖Ā X₂ + b̄ 1ᵀ − Y₂‖_F
  double residual{0.0};

  /// Full-dictionary matrix [[1, 0], [b̄, Ā]] for ψ = (1, ψ₂).
  MatrixXd Embedded() const;
};

/// ‖A X − Y‖_F.
double FitResidual(const MatrixXd& a, const MatrixXd& x, const MatrixXd& y);

/// Plain EDMD: the minimum-norm minimizer Y X† of ‖A X − Y‖_F.
MatrixXd SolveEdmd(const MatrixXd& x, const MatrixXd& y,
                   const RankTolerance& tol = RankTolerance::Default());

/// Particular feasible point C0 = G⁺ D† + (E†)ᵀ (F⁺)ᵀ D⊥ D⊥ᵀ. Validates the
/// constraints (generalized) first and throws ConstraintError on failure.
MatrixXd ComputeC0(const ConstraintSet& cs,
                   const RankTolerance& tol = RankTolerance::Default());

/// Closed-form constrained fit: the minimizer of ‖A X − Y‖_F over the
/// feasible set, with the minimum-norm choice of the free block.
///
/// Throws ConstraintError (message carries the validation report) when the
/// constraints fail validation under `strictness`, ArgumentError on shape
/// mismatch, and ComputationError if the result misses the feasibility
/// tolerance.
IcdmdModel SolveIcdmd(const MatrixXd& x, const MatrixXd& y,
                      const ConstraintSet& cs,
                      const RankTolerance& tol = RankTolerance::Default(),
                      Strictness strictness = Strictness::kGeneralized);

/// Affine DMD on the non-constant observables X₂, Y₂. Detects whether the
/// rows of Y₂ lie in the row space of [1ᵀ; X₂] (exact-fit case) and returns
/// the minimum-‖Ā‖_F solution in either case; b̄ = μ_Y − Ā μ_X.
AffineModel SolveAffine(const MatrixXd& x2, const MatrixXd& y2,
                        const RankTolerance& tol = RankTolerance::Default());

/// Reference solution of the constrained fit through the KKT system on
/// vec(A). Cost grows like m⁶; intended for verification with m ≤ 30.
MatrixXd KktOracle(const MatrixXd& x, const MatrixXd& y,
                   const ConstraintSet& cs,
                   const RankTolerance& tol = RankTolerance::Default());

}  // namespace icdmd
