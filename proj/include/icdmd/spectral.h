#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icdmd/constraints.h"
#include "icdmd/dictionary.h"
#include "icdmd/linalg.h"
#include "icdmd/solver.h"

namespace icdmd {

/// Certificate G⁺ V̂ = λ D V̂ that the encoded geometric invariants yield
/// right eigenvectors D0 = D V̂ of every feasible model.
struct Equalizer {
  MatrixXd v_hat;
  double lambda{1.0};
  MatrixXd d0;
  /// Provenance label per column of V̂ (one per invariant tag).
  std::vector<std::string> labels;

  Eigen::Index size() const { return v_hat.cols(); }
};

/// Coefficient vectors of approximate eigenfunctions at one eigenvalue.
struct EigenfunctionSet {
  MatrixXd w;
  double lambda{1.0};
  /// ‖Wᵀ A − λ Wᵀ‖_F
  double eig_residual{0.0};
  /// ‖Wᵀ D0 − I‖_F
  double duality_residual{0.0};
  /// Dimension of the eigenspace (or selected span) W was drawn from.
  Eigen::Index span_dim{0};
  std::vector<std::string> labels;
};

enum class EigenSolveMode {
  /// Null space of Aᵀ − λI first, then the duality fit inside it.
  kSequential,
  /// One stacked least-squares problem over both equations.
  kSimultaneous,
};

/// Equalizer over the given tags: a unit column per fixed point and a column
/// averaging each cycle's q columns (entries 1/q). Throws ArgumentError for
/// an empty tag list and ConstraintError when G⁺ V̂ ≠ D V̂ (mis-ordered
/// orbit) or D V̂ is rank deficient.
Equalizer BuildEqualizer(const std::vector<InvariantTag>& tags,
                         const ConstraintSet& cs);

/// Equalizer over every tag of `cs`.
Equalizer BuildEqualizer(const ConstraintSet& cs);

/// Induced eigenfunctions: W with Wᵀ A = λ Wᵀ and Wᵀ D0 = I, choosing the
/// minimum-norm W when the eigenspace is larger than the equalizer.
///
/// In sequential mode throws SpectralError when the left eigenspace is
/// smaller than the equalizer, the duality system is rank deficient, or the
/// residuals exceed 1e-8·‖A‖_F and 1e-8. Simultaneous mode only reports its
/// residuals.
EigenfunctionSet InducedEigenfunctions(
    const MatrixXd& a, const Equalizer& eq,
    const RankTolerance& tol = RankTolerance::Default(),
    EigenSolveMode mode = EigenSolveMode::kSequential);

EigenfunctionSet InducedEigenfunctions(
    const IcdmdModel& model, const Equalizer& eq,
    const RankTolerance& tol = RankTolerance::Default(),
    EigenSolveMode mode = EigenSolveMode::kSequential);

/// Baseline for unconstrained models: eigendecompose Aᵀ, keep the
/// `span_size` eigenvectors whose eigenvalues lie closest to λ (completing
/// complex-conjugate pairs so W stays real), and least-squares fit
/// Wᵀ D0 ≈ I inside their span. Residuals are reported, not enforced.
EigenfunctionSet EdmdNearestSpanFit(const MatrixXd& a, const MatrixXd& d0,
                                    double lambda, Eigen::Index span_size);

/// Rows are functions, columns are points: Wᵀ ψ(points).
MatrixXd EvaluateEigenfunctions(const EigenfunctionSet& ef,
                                const Dictionary& dict,
                                const StateMatrix& points);

}  // namespace icdmd
