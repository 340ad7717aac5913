#include "icdmd/solver.h"

#include <algorithm>
#include <sstream>
#include <string>

#include "icdmd/errors.h"

namespace icdmd {

using Eigen::Index;

namespace {

void CheckData(const MatrixXd& x, const MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    std::ostringstream os;
    os << "data matrices differ in shape: X is " << x.rows() << "x" << x.cols()
       << ", Y is " << y.rows() << "x" << y.cols();
    throw ArgumentError(os.str());
  }
  RequireFinite(x, "X");
  RequireFinite(y, "Y");
}

// Absolute threshold for the validation residuals, scaled to the constraint
// magnitudes.
double ValidationTolerance(const ConstraintSet& cs) {
  const double scale =
      std::max({cs.e.norm() * cs.g_plus.norm(), cs.f_plus.norm() * cs.d.norm(),
                cs.g_plus.norm(), cs.f_plus.norm()});
  return kFeasibilityTol * (1.0 + scale);
}

void RequireValid(const ConstraintSet& cs, Strictness strictness,
                  const RankTolerance& tol) {
  const ValidationReport report =
      Validate(cs, ValidationTolerance(cs), strictness, tol);
  if (!report.passed) throw ConstraintError(report.ToString());
}

MatrixXd C0From(const ConstraintSet& cs, const MatrixXd& d_perp,
                const RankTolerance& tol) {
  MatrixXd c0 = MatrixXd::Zero(cs.m, cs.m);
  if (cs.d.cols() > 0) c0 += cs.g_plus * PseudoInverse(cs.d, tol);
  if (cs.e.cols() > 0) {
    c0 += PseudoInverse(cs.e, tol).transpose() *
          (cs.f_plus.transpose() * d_perp) * d_perp.transpose();
  }
  return c0;
}

}  // namespace

MatrixXd AffineModel::Embedded() const {
  const Index m = a_bar.rows() + 1;
  MatrixXd a = MatrixXd::Zero(m, m);
  a(0, 0) = 1.0;
  a.block(1, 0, m - 1, 1) = b_bar;
  a.bottomRightCorner(m - 1, m - 1) = a_bar;
  return a;
}

double FitResidual(const MatrixXd& a, const MatrixXd& x, const MatrixXd& y) {
  return (a * x - y).norm();
}

MatrixXd SolveEdmd(const MatrixXd& x, const MatrixXd& y,
                   const RankTolerance& tol) {
  CheckData(x, y);
  return MinNormRightLstsq(x, y, tol);
}

MatrixXd ComputeC0(const ConstraintSet& cs, const RankTolerance& tol) {
  RequireValid(cs, Strictness::kGeneralized, tol);
  return C0From(cs, OrthonormalComplementBasis(cs.d, tol), tol);
}

IcdmdModel SolveIcdmd(const MatrixXd& x, const MatrixXd& y,
                      const ConstraintSet& cs, const RankTolerance& tol,
                      Strictness strictness) {
  CheckData(x, y);
  if (x.rows() != cs.m) {
    throw ArgumentError("data has " + std::to_string(x.rows()) +
                        " observables but constraints are over " +
                        std::to_string(cs.m));
  }
  RequireValid(cs, strictness, tol);

  IcdmdModel model;
  model.constraints = cs;
  model.d_perp = OrthonormalComplementBasis(cs.d, tol);
  model.e_perp = OrthonormalComplementBasis(cs.e, tol);
  model.c0 = C0From(cs, model.d_perp, tol);

  const MatrixXd target = model.e_perp.transpose() * (y - model.c0 * x);
  const MatrixXd reduced = model.d_perp.transpose() * x;
  model.a_lsq = MinNormRightLstsq(reduced, target, tol);
  model.a = model.c0 +
            model.e_perp * model.a_lsq * model.d_perp.transpose();

  if (!model.a.allFinite()) {
    throw ComputationError("constrained fit produced non-finite entries");
  }
  model.residual = FitResidual(model.a, x, y);
  model.geometric_residual = (model.a * cs.d - cs.g_plus).norm();
  model.functional_residual =
      (cs.e.transpose() * model.a - cs.f_plus.transpose()).norm();
  if (model.geometric_residual > kFeasibilityTol * (1.0 + cs.g_plus.norm()) ||
      model.functional_residual > kFeasibilityTol * (1.0 + cs.f_plus.norm())) {
    std::ostringstream os;
    os << "fitted model misses the feasible set: ||A D - G+||_F = "
       << model.geometric_residual << ", ||E^T A - F+^T||_F = "
       << model.functional_residual;
    throw ComputationError(os.str());
  }
  return model;
}

AffineModel SolveAffine(const MatrixXd& x2, const MatrixXd& y2,
                        const RankTolerance& tol) {
  CheckData(x2, y2);
  const Index n = x2.cols();
  if (n < 1) throw ArgumentError("affine fit needs at least one sample");

  MatrixXd x_full(x2.rows() + 1, n);
  x_full << Eigen::RowVectorXd::Ones(n), x2;
  MatrixXd stacked(x_full.rows() + y2.rows(), n);
  stacked << x_full, y2;

  AffineModel model;
  model.fit_case = NumericalRank(stacked, tol) == NumericalRank(x_full, tol)
                       ? AffineModel::Case::kExactFit
                       : AffineModel::Case::kLeastSquares;

  // Both cases reduce to the centred problem Ā (X₂ − μ_X 1ᵀ) ≈ Y₂ − μ_Y 1ᵀ:
  // b̄ absorbs the mean direction exactly, and the minimum-norm Ā is taken.
  const VectorXd mu_x = x2.rowwise().mean();
  const VectorXd mu_y = y2.rowwise().mean();
  const MatrixXd xc = x2.colwise() - mu_x;
  const MatrixXd yc = y2.colwise() - mu_y;
  model.a_bar = MinNormRightLstsq(xc, yc, tol);
  model.b_bar = mu_y - model.a_bar * mu_x;
  model.residual =
      ((model.a_bar * x2).colwise() + model.b_bar - y2).norm();
  return model;
}

MatrixXd KktOracle(const MatrixXd& x, const MatrixXd& y,
                   const ConstraintSet& cs, const RankTolerance& tol) {
  CheckData(x, y);
  cs.CheckWellFormed();
  const Index m = cs.m;
  if (x.rows() != m) throw ArgumentError("data and constraints disagree on m");
  if (m > 30) throw ArgumentError("KKT oracle is limited to m <= 30");
  const Index g = cs.d.cols();
  const Index f = cs.e.cols();
  const MatrixXd eye = MatrixXd::Identity(m, m);

  // vec(A X) = (Xᵀ ⊗ I) vec(A), vec(A D) = (Dᵀ ⊗ I) vec(A),
  // vec(Eᵀ A) = (I ⊗ Eᵀ) vec(A).
  auto kron = [](const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  const MatrixXd k_obj = kron(x.transpose(), eye);
  const VectorXd y_vec = y.reshaped();

  const Index nc = m * g + f * m;
  MatrixXd c(nc, m * m);
  VectorXd rhs(nc);
  if (g > 0) {
    c.topRows(m * g) = kron(cs.d.transpose(), eye);
    rhs.head(m * g) = cs.g_plus.reshaped();
  }
  if (f > 0) {
    c.bottomRows(f * m) = kron(eye, cs.e.transpose());
    rhs.tail(f * m) = MatrixXd(cs.f_plus.transpose()).reshaped();
  }

  const Index nv = m * m;
  MatrixXd kkt = MatrixXd::Zero(nv + nc, nv + nc);
  kkt.topLeftCorner(nv, nv) = k_obj.transpose() * k_obj;
  kkt.topRightCorner(nv, nc) = c.transpose();
  kkt.bottomLeftCorner(nc, nv) = c;
  VectorXd b(nv + nc);
  b << k_obj.transpose() * y_vec, rhs;

  // The KKT matrix mixes data and constraint scales, so the default cutoff is
  // looser than the dimension-based one used elsewhere.
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(kkt);
  cod.setThreshold(tol.mode == RankTolerance::Mode::kRelative && tol.value
                       ? *tol.value
                       : 1e-10);
  const VectorXd sol = cod.solve(b);
  if ((kkt * sol - b).norm() > 1e-6 * (1.0 + b.norm())) {
    throw ComputationError("KKT system is inconsistent; constraints are likely "
                           "incompatible");
  }
  return sol.head(nv).reshaped(m, m);
}

}  // namespace icdmd
