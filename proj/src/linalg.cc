#include "icdmd/linalg.h"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include "icdmd/errors.h"

namespace icdmd {
namespace {

std::string Shape(const MatrixXd& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

template <typename Svd>
void CheckConverged(const Svd& svd, const MatrixXd& m) {
  if (svd.info() != Eigen::Success) {
    // NaN or Inf input is the caller's fault, not a convergence failure.
    if (!m.allFinite()) {
      throw ArgumentError(Shape(m) + " matrix contains non-finite entries");
    }
    throw ComputationError("SVD failed to converge for " + Shape(m) +
                           " matrix");
  }
}

// Returns the number of singular values above the cutoff.
Eigen::Index CountAbove(const VectorXd& sigma, const RankTolerance& tol,
                        Eigen::Index rows, Eigen::Index cols) {
  if (sigma.size() == 0) return 0;
  const double cutoff = tol.Threshold(sigma(0), rows, cols);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  return r;
}

}  // namespace

RankTolerance RankTolerance::Relative(double v) {
  if (!(v >= 0.0)) throw ArgumentError("rank tolerance must be nonnegative");
  return {Mode::kRelative, v};
}

RankTolerance RankTolerance::Absolute(double v) {
  if (!(v >= 0.0)) throw ArgumentError("rank tolerance must be nonnegative");
  return {Mode::kAbsolute, v};
}

double RankTolerance::Threshold(double sigma_max, Eigen::Index rows,
                                Eigen::Index cols) const {
  if (mode == Mode::kAbsolute) return value.value_or(0.0);
  const double rel =
      value.value_or(static_cast<double>(std::max(rows, cols)) *
                     std::numeric_limits<double>::epsilon());
  return rel * sigma_max;
}

void RequireFinite(const MatrixXd& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ArgumentError(std::string(what) + " contains non-finite entries");
  }
}

VectorXd SingularValues(const MatrixXd& m) {
  if (m.size() == 0) return VectorXd(0);
  Eigen::BDCSVD<MatrixXd> svd(m);
  CheckConverged(svd, m);
  return svd.singularValues();
}

Eigen::Index NumericalRank(const MatrixXd& m, const RankTolerance& tol) {
  return CountAbove(SingularValues(m), tol, m.rows(), m.cols());
}

MatrixXd PseudoInverse(const MatrixXd& m, const RankTolerance& tol) {
  if (m.size() == 0) return MatrixXd::Zero(m.cols(), m.rows());
  Eigen::BDCSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CheckConverged(svd, m);
  const VectorXd& sigma = svd.singularValues();
  const Eigen::Index r = CountAbove(sigma, tol, m.rows(), m.cols());
  const VectorXd inv = sigma.head(r).cwiseInverse();
  return svd.matrixV().leftCols(r) * inv.asDiagonal() *
         svd.matrixU().leftCols(r).transpose();
}

MatrixXd OrthonormalComplementBasis(const MatrixXd& m,
                                    const RankTolerance& tol) {
  const Eigen::Index rows = m.rows();
  if (m.cols() == 0 || m.isZero(0.0)) {
    return MatrixXd::Identity(rows, rows);
  }
  Eigen::BDCSVD<MatrixXd> svd(m, Eigen::ComputeFullU);
  CheckConverged(svd, m);
  const Eigen::Index r =
      CountAbove(svd.singularValues(), tol, m.rows(), m.cols());
  return svd.matrixU().rightCols(rows - r);
}

MatrixXd OrthonormalRangeBasis(const MatrixXd& m, const RankTolerance& tol) {
  if (m.size() == 0) return MatrixXd(m.rows(), 0);
  Eigen::BDCSVD<MatrixXd> svd(m, Eigen::ComputeThinU);
  CheckConverged(svd, m);
  const Eigen::Index r =
      CountAbove(svd.singularValues(), tol, m.rows(), m.cols());
  return svd.matrixU().leftCols(r);
}

MatrixXd MinNormRightLstsq(const MatrixXd& c, const MatrixXd& b,
                           const RankTolerance& tol) {
  if (c.cols() != b.cols()) {
    throw ArgumentError("MinNormRightLstsq: C has " + Shape(c) + " but B has " +
                        Shape(b) + "; column counts must agree");
  }
  if (c.size() == 0 || b.rows() == 0) return MatrixXd::Zero(b.rows(), c.rows());
  // B C† = (B V) Σ⁻¹ Uᵀ, avoiding the explicit n x r pseudo-inverse.
  Eigen::BDCSVD<MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CheckConverged(svd, c);
  const VectorXd& sigma = svd.singularValues();
  const Eigen::Index r = CountAbove(sigma, tol, c.rows(), c.cols());
  const MatrixXd bv = b * svd.matrixV().leftCols(r);
  return bv * sigma.head(r).cwiseInverse().asDiagonal() *
         svd.matrixU().leftCols(r).transpose();
}

}  // namespace icdmd
