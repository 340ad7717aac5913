#include "icdmd/spectral.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "icdmd/errors.h"

namespace icdmd {

using Eigen::Index;

namespace {

constexpr double kEqualizerTol = 1e-12;
constexpr double kInducedTol = 1e-8;

void FillResiduals(const MatrixXd& a, const MatrixXd& d0, EigenfunctionSet* ef) {
  const MatrixXd wt = ef->w.transpose();
  ef->eig_residual = (wt * a - ef->lambda * wt).norm();
  ef->duality_residual =
      (wt * d0 - MatrixXd::Identity(d0.cols(), d0.cols())).norm();
}

}  // namespace

Equalizer BuildEqualizer(const std::vector<InvariantTag>& tags,
                         const ConstraintSet& cs) {
  if (tags.empty()) {
    throw ArgumentError("no geometric invariants encoded; equalizer needs at "
                        "least one fixed point or cycle");
  }
  cs.CheckWellFormed();
  Equalizer eq;
  eq.lambda = 1.0;
  eq.v_hat = MatrixXd::Zero(cs.d.cols(), static_cast<Index>(tags.size()));
  for (size_t t = 0; t < tags.size(); ++t) {
    const InvariantTag& tag = tags[t];
    if (tag.column_begin < 0 ||
        tag.column_begin + tag.column_count > cs.d.cols()) {
      throw ArgumentError("tag '" + tag.label + "' lies outside the constraint set");
    }
    // Cycle columns are averaged so Wᵀ D0 = I normalizes orbit means to 1.
    eq.v_hat.col(t).segment(tag.column_begin, tag.column_count).setConstant(
        1.0 / static_cast<double>(tag.column_count));
    eq.labels.push_back(tag.label);
  }
  eq.d0 = cs.d * eq.v_hat;
  const double residual = (cs.g_plus * eq.v_hat - eq.lambda * eq.d0).norm();
  if (residual > kEqualizerTol * eq.d0.norm()) {
    std::ostringstream os;
    os << "equalizer residual ||G+ V - D V||_F = " << residual
       << " is not zero; check the orbit ordering";
    throw ConstraintError(os.str());
  }
  if (NumericalRank(eq.d0) != eq.size()) {
    throw ConstraintError("encoded invariants are linearly dependent under the "
                          "dictionary (D V is rank deficient)");
  }
  return eq;
}

Equalizer BuildEqualizer(const ConstraintSet& cs) {
  return BuildEqualizer(cs.tags, cs);
}

EigenfunctionSet InducedEigenfunctions(const MatrixXd& a, const Equalizer& eq,
                                       const RankTolerance& tol,
                                       EigenSolveMode mode) {
  const Index m = a.rows();
  if (a.cols() != m || eq.d0.rows() != m) {
    throw ArgumentError("model and equalizer dimensions disagree");
  }
  const Index s = eq.size();
  const MatrixXd shifted = a - eq.lambda * MatrixXd::Identity(m, m);
  const MatrixXd eye_s = MatrixXd::Identity(s, s);

  EigenfunctionSet ef;
  ef.lambda = eq.lambda;
  ef.labels = eq.labels;

  if (mode == EigenSolveMode::kSimultaneous) {
    MatrixXd lhs(m, m + s);
    lhs << shifted, eq.d0;
    MatrixXd rhs = MatrixXd::Zero(s, m + s);
    rhs.rightCols(s) = eye_s;
    ef.w = MinNormRightLstsq(lhs, rhs, tol).transpose();
    ef.span_dim = m;
    FillResiduals(a, eq.d0, &ef);
    return ef;
  }

  // Left eigenspace at λ: null space of (A − λI)ᵀ.
  const MatrixXd basis = OrthonormalComplementBasis(shifted, tol);
  ef.span_dim = basis.cols();
  if (basis.cols() < s) {
    std::ostringstream os;
    os << "left eigenspace at lambda=" << eq.lambda << " has dimension "
       << basis.cols() << " but " << s << " eigenfunctions were requested";
    throw SpectralError(os.str());
  }
  const MatrixXd dual = basis.transpose() * eq.d0;
  if (NumericalRank(dual, tol) < s) {
    throw SpectralError("duality system W^T D0 = I is rank deficient on the "
                        "left eigenspace");
  }
  ef.w = basis * MinNormRightLstsq(dual, eye_s, tol).transpose();
  FillResiduals(a, eq.d0, &ef);
  if (ef.eig_residual > kInducedTol * a.norm() ||
      ef.duality_residual > kInducedTol) {
    std::ostringstream os;
    os << "induced eigenfunctions miss tolerance: eig residual "
       << ef.eig_residual << ", duality residual " << ef.duality_residual;
    throw SpectralError(os.str());
  }
  return ef;
}

EigenfunctionSet InducedEigenfunctions(const IcdmdModel& model,
                                       const Equalizer& eq,
                                       const RankTolerance& tol,
                                       EigenSolveMode mode) {
  return InducedEigenfunctions(model.a, eq, tol, mode);
}

EigenfunctionSet EdmdNearestSpanFit(const MatrixXd& a, const MatrixXd& d0,
                                    double lambda, Index span_size) {
  const Index m = a.rows();
  const Index s = d0.cols();
  if (a.cols() != m || d0.rows() != m) {
    throw ArgumentError("model and D0 dimensions disagree");
  }
  if (span_size < s || span_size > m) {
    throw ArgumentError("span size must lie between the number of target "
                        "functions and the model dimension");
  }
  Eigen::EigenSolver<MatrixXd> solver(a.transpose());
  if (solver.info() != Eigen::Success) {
    throw ComputationError("eigendecomposition failed to converge");
  }
  const Eigen::VectorXcd mu = solver.eigenvalues();
  const Eigen::MatrixXcd vecs = solver.eigenvectors();

  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return std::abs(mu(i) - lambda) < std::abs(mu(j) - lambda);
  });

  auto is_real = [&](Index i) {
    return std::abs(mu(i).imag()) <= 1e-12 * (1.0 + std::abs(mu(i)));
  };
  std::vector<Index> chosen(order.begin(), order.begin() + span_size);
  // Complete conjugate pairs so that the real span is closed under conjugation.
  for (size_t k = 0; k < chosen.size(); ++k) {
    const Index i = chosen[k];
    if (is_real(i)) continue;
    Index partner = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
      if (j == i) continue;
      const double dist = std::abs(mu(j) - std::conj(mu(i)));
      if (dist < best) {
        best = dist;
        partner = j;
      }
    }
    if (partner >= 0 &&
        std::find(chosen.begin(), chosen.end(), partner) == chosen.end()) {
      chosen.push_back(partner);
    }
  }

  MatrixXd real_span(m, static_cast<Index>(chosen.size()));
  for (size_t k = 0; k < chosen.size(); ++k) {
    const Index i = chosen[k];
    // A pair contributes Re(v) through one member and Im(v) through the other.
    if (is_real(i) || mu(i).imag() > 0) {
      real_span.col(k) = vecs.col(i).real();
    } else {
      real_span.col(k) = vecs.col(i).imag();
    }
  }
  const MatrixXd basis = OrthonormalRangeBasis(real_span);

  EigenfunctionSet ef;
  ef.lambda = lambda;
  ef.span_dim = basis.cols();
  ef.w = basis *
         MinNormRightLstsq(basis.transpose() * d0, MatrixXd::Identity(s, s))
             .transpose();
  FillResiduals(a, d0, &ef);
  return ef;
}

MatrixXd EvaluateEigenfunctions(const EigenfunctionSet& ef,
                                const Dictionary& dict,
                                const StateMatrix& points) {
  if (ef.w.rows() != dict.size()) {
    throw ArgumentError("eigenfunction coefficients do not match the dictionary");
  }
  return ef.w.transpose() * dict.Evaluate(points);
}

}  // namespace icdmd
