#include "icdmd/constraints.h"

#include <sstream>

#include "icdmd/errors.h"

namespace icdmd {

using Eigen::Index;

namespace {

MatrixXd HCat(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

VectorXd EvaluateAt(const Dictionary& dict, const StateMatrix& points,
                    Index j) {
  try {
    return dict.Evaluate(VectorXd(points.col(j)));
  } catch (const ArgumentError& err) {
    throw ArgumentError("point " + std::to_string(j) + ": " + err.what());
  }
}

}  // namespace

ConstraintSet ConstraintSet::Empty(Index m) {
  if (m < 0) throw ArgumentError("observable count must be nonnegative");
  ConstraintSet cs;
  cs.m = m;
  cs.d = cs.g_plus = cs.e = cs.f_plus = MatrixXd(m, 0);
  return cs;
}

void ConstraintSet::CheckWellFormed() const {
  auto check = [&](const MatrixXd& mat, const char* name) {
    if (mat.rows() != m) {
      throw ArgumentError(std::string("constraint matrix ") + name + " has " +
                          std::to_string(mat.rows()) + " rows, expected " +
                          std::to_string(m));
    }
    RequireFinite(mat, std::string("constraint matrix ") + name);
  };
  check(d, "D");
  check(g_plus, "Gplus");
  check(e, "E");
  check(f_plus, "Fplus");
  if (d.cols() != g_plus.cols()) {
    throw ArgumentError("D and Gplus must have the same number of columns");
  }
  if (e.cols() != f_plus.cols()) {
    throw ArgumentError("E and Fplus must have the same number of columns");
  }
  Index next = 0;
  for (const InvariantTag& tag : tags) {
    if (tag.column_begin < next || tag.column_count < 1 ||
        tag.column_begin + tag.column_count > d.cols()) {
      throw ArgumentError("invariant tags must be ordered, disjoint, and lie "
                          "within the geometric columns");
    }
    if (tag.kind == InvariantTag::Kind::kFixedPoint && tag.column_count != 1) {
      throw ArgumentError("a fixed-point tag spans exactly one column");
    }
    next = tag.column_begin + tag.column_count;
  }
}

std::string ValidationReport::ToString() const {
  std::ostringstream os;
  os << "constraint validation ("
     << (strictness == Strictness::kStrict ? "strict" : "generalized")
     << ", tol=" << tol << "): " << (passed ? "PASS" : "FAIL") << "\n"
     << "  compatibility residual ||E^T G+ - F+^T D||_F = "
     << compatibility_residual << (compatible ? "" : "  <-- incompatible")
     << "\n"
     << "  rank(D) = " << d_rank << " of " << d_cols << " columns, rank(E) = "
     << e_rank << " of " << e_cols << " columns\n"
     << "  generalized residuals: ||G+ D^+ D - G+||_F = "
     << generalized_d_residual << ", ||F+ E^+ E - F+||_F = "
     << generalized_e_residual << "\n";
  return os.str();
}

ValidationReport Validate(const ConstraintSet& cs, double tol,
                          Strictness strictness, const RankTolerance& rank_tol) {
  cs.CheckWellFormed();
  ValidationReport r;
  r.strictness = strictness;
  r.tol = tol;
  r.d_cols = cs.d.cols();
  r.e_cols = cs.e.cols();
  r.d_rank = r.d_cols == 0 ? 0 : NumericalRank(cs.d, rank_tol);
  r.e_rank = r.e_cols == 0 ? 0 : NumericalRank(cs.e, rank_tol);
  if (r.d_cols > 0 && r.e_cols > 0) {
    r.compatibility_residual =
        (cs.e.transpose() * cs.g_plus - cs.f_plus.transpose() * cs.d).norm();
  }
  if (r.d_cols > 0) {
    r.generalized_d_residual =
        (cs.g_plus * PseudoInverse(cs.d, rank_tol) * cs.d - cs.g_plus).norm();
  }
  if (r.e_cols > 0) {
    r.generalized_e_residual =
        (cs.f_plus * PseudoInverse(cs.e, rank_tol) * cs.e - cs.f_plus).norm();
  }
  r.compatible = r.compatibility_residual <= tol;
  r.full_column_rank = r.d_rank == r.d_cols && r.e_rank == r.e_cols;
  r.generalized_ok =
      r.generalized_d_residual <= tol && r.generalized_e_residual <= tol;
  r.passed = r.compatible && (strictness == Strictness::kStrict
                                  ? r.full_column_rank
                                  : r.generalized_ok);
  return r;
}

ConstraintSet FromFixedPoints(const Dictionary& dict, const StateMatrix& points,
                              const std::string& label_prefix) {
  ConstraintSet cs = ConstraintSet::Empty(dict.size());
  if (points.cols() == 0) return cs;
  if (points.rows() != dict.dim()) {
    throw ArgumentError("fixed points have dimension " +
                        std::to_string(points.rows()) + ", dictionary expects " +
                        std::to_string(dict.dim()));
  }
  cs.d.resize(dict.size(), points.cols());
  for (Index j = 0; j < points.cols(); ++j) {
    cs.d.col(j) = EvaluateAt(dict, points, j);
    cs.tags.push_back({InvariantTag::Kind::kFixedPoint, j, 1, points.col(j),
                       label_prefix + "[" + std::to_string(j) + "]"});
  }
  cs.g_plus = cs.d;
  return cs;
}

ConstraintSet FromLimitCycle(const Dictionary& dict, const StateMatrix& orbit,
                             const std::string& label) {
  const Index q = orbit.cols();
  if (q < 1) throw ArgumentError("limit cycle orbit needs at least one point");
  if (orbit.rows() != dict.dim()) {
    throw ArgumentError("orbit states have dimension " +
                        std::to_string(orbit.rows()) + ", dictionary expects " +
                        std::to_string(dict.dim()));
  }
  ConstraintSet cs = ConstraintSet::Empty(dict.size());
  cs.d.resize(dict.size(), q);
  for (Index j = 0; j < q; ++j) cs.d.col(j) = EvaluateAt(dict, orbit, j);
  cs.g_plus.resize(dict.size(), q);
  for (Index j = 0; j < q; ++j) cs.g_plus.col(j) = cs.d.col((j + 1) % q);
  const auto kind = q == 1 ? InvariantTag::Kind::kFixedPoint
                           : InvariantTag::Kind::kLimitCycle;
  cs.tags.push_back({kind, 0, q, orbit, label});
  return cs;
}

ConstraintSet FromEigenfunction(const VectorXd& coeffs, double eigenvalue) {
  if (coeffs.size() == 0 || coeffs.isZero(0.0)) {
    throw ArgumentError("eigenfunction coefficients must be a nonzero vector");
  }
  RequireFinite(coeffs, "eigenfunction coefficients");
  if (!std::isfinite(eigenvalue)) throw ArgumentError("eigenvalue must be finite");
  ConstraintSet cs = ConstraintSet::Empty(coeffs.size());
  cs.e = coeffs;
  cs.f_plus = eigenvalue * coeffs;
  return cs;
}

ConstraintSet ConstantFunction(const Dictionary& dict) {
  if (!dict.constant_representer()) {
    throw UnsupportedError("dictionary " + dict.Describe() +
                           " has no constant-function representer");
  }
  return FromEigenfunction(*dict.constant_representer(), 1.0);
}

ConstraintSet HoDmdConstraints(Index sub_size, Index delays) {
  if (sub_size <= 0 || delays <= 0) {
    throw ArgumentError("HO-DMD constraints need sub_size > 0 and delays > 0");
  }
  const Index m = sub_size * (delays + 1);
  const Index f = sub_size * delays;
  ConstraintSet cs = ConstraintSet::Empty(m);
  cs.e = MatrixXd::Zero(m, f);
  cs.e.topRows(f).setIdentity();
  cs.f_plus = MatrixXd::Zero(m, f);
  cs.f_plus.bottomRows(f).setIdentity();
  return cs;
}

ConstraintSet Merge(const ConstraintSet& a, const ConstraintSet& b) {
  if (a.m != b.m) {
    throw ArgumentError("cannot merge constraint sets over " +
                        std::to_string(a.m) + " and " + std::to_string(b.m) +
                        " observables");
  }
  ConstraintSet out;
  out.m = a.m;
  out.d = HCat(a.d, b.d);
  out.g_plus = HCat(a.g_plus, b.g_plus);
  out.e = HCat(a.e, b.e);
  out.f_plus = HCat(a.f_plus, b.f_plus);
  out.tags = a.tags;
  for (InvariantTag tag : b.tags) {
    tag.column_begin += a.d.cols();
    out.tags.push_back(std::move(tag));
  }
  return out;
}

ConstraintSet DropDuplicateColumns(const ConstraintSet& cs) {
  cs.CheckWellFormed();
  ConstraintSet out = ConstraintSet::Empty(cs.m);

  std::vector<Index> keep_geometric;
  for (size_t t = 0; t < cs.tags.size(); ++t) {
    const InvariantTag& tag = cs.tags[t];
    bool duplicate = false;
    for (size_t s = 0; s < t && !duplicate; ++s) {
      const InvariantTag& prev = cs.tags[s];
      if (prev.column_count != tag.column_count) continue;
      duplicate =
          cs.d.middleCols(prev.column_begin, prev.column_count) ==
              cs.d.middleCols(tag.column_begin, tag.column_count) &&
          cs.g_plus.middleCols(prev.column_begin, prev.column_count) ==
              cs.g_plus.middleCols(tag.column_begin, tag.column_count);
    }
    if (duplicate) continue;
    InvariantTag kept = tag;
    kept.column_begin = static_cast<Index>(keep_geometric.size());
    for (Index c = 0; c < tag.column_count; ++c) {
      keep_geometric.push_back(tag.column_begin + c);
    }
    out.tags.push_back(std::move(kept));
  }
  // Untagged geometric columns are kept as they are.
  std::vector<bool> tagged(cs.d.cols(), false);
  for (const InvariantTag& tag : cs.tags) {
    for (Index c = 0; c < tag.column_count; ++c) tagged[tag.column_begin + c] = true;
  }
  for (Index c = 0; c < cs.d.cols(); ++c) {
    if (!tagged[c]) keep_geometric.push_back(c);
  }
  out.d = cs.d(Eigen::all, keep_geometric);
  out.g_plus = cs.g_plus(Eigen::all, keep_geometric);

  std::vector<Index> keep_functional;
  for (Index c = 0; c < cs.e.cols(); ++c) {
    bool duplicate = false;
    for (Index k : keep_functional) {
      if (cs.e.col(k) == cs.e.col(c) && cs.f_plus.col(k) == cs.f_plus.col(c)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) keep_functional.push_back(c);
  }
  out.e = cs.e(Eigen::all, keep_functional);
  out.f_plus = cs.f_plus(Eigen::all, keep_functional);
  return out;
}

}  // namespace icdmd
