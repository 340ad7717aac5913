#include "icdmd/dictionary.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "icdmd/errors.h"
#include "icdmd/parallel.h"

namespace icdmd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void CheckBounds(const Box& bounds) {
  if (bounds.empty()) throw ArgumentError("dictionary needs at least one dimension");
  for (const Interval& b : bounds) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw ArgumentError("dictionary bounds must be finite with lo < hi");
    }
  }
}

int CellAlong(double x, const Interval& b, int cells) {
  const int i = static_cast<int>(std::floor((x - b.lo) / b.width() * cells));
  return std::clamp(i, 0, cells - 1);
}

}  // namespace

Dictionary Dictionary::Indicator(std::vector<int> cells, Box bounds) {
  CheckBounds(bounds);
  if (cells.size() != bounds.size()) {
    throw ArgumentError("indicator dictionary: cells and bounds differ in length");
  }
  Index m = 1;
  for (int c : cells) {
    if (c < 1) throw ArgumentError("indicator dictionary: cells must be >= 1");
    m *= c;
    if (m > kMaxObservables) {
      throw ArgumentError("indicator dictionary: observable count exceeds cap of " +
                          std::to_string(kMaxObservables));
    }
  }
  Dictionary d;
  d.kind_ = Kind::kIndicator;
  d.size_ = m;
  d.bounds_ = std::move(bounds);
  d.cells_ = std::move(cells);
  d.constant_representer_ = VectorXd::Ones(m);
  return d;
}

Dictionary Dictionary::Trig(int max_freq, Interval bounds) {
  CheckBounds({bounds});
  if (max_freq < 1) throw ArgumentError("trig dictionary: max_freq must be >= 1");
  if (2 * static_cast<Index>(max_freq) + 1 > kMaxObservables) {
    throw ArgumentError("trig dictionary: observable count exceeds cap");
  }
  Dictionary d;
  d.kind_ = Kind::kTrig;
  d.size_ = 2 * max_freq + 1;
  d.bounds_ = {bounds};
  d.max_freq_ = max_freq;
  d.constant_representer_ = VectorXd::Unit(d.size_, 0);
  return d;
}

bool Dictionary::Contains(const VectorXd& state) const {
  if (state.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const double x = state(i);
    if (!std::isfinite(x) || x < bounds_[i].lo || x > bounds_[i].hi) return false;
  }
  return true;
}

void Dictionary::CheckDomain(const VectorXd& state) const {
  if (state.size() != dim()) {
    throw ArgumentError("state has dimension " + std::to_string(state.size()) +
                        ", dictionary expects " + std::to_string(dim()));
  }
  if (!Contains(state)) {
    std::ostringstream os;
    os << "state (" << state.transpose() << ") lies outside the dictionary domain";
    throw ArgumentError(os.str());
  }
}

Index Dictionary::CellIndex(const VectorXd& state) const {
  if (kind_ != Kind::kIndicator) {
    throw UnsupportedError("CellIndex is defined for indicator dictionaries only");
  }
  CheckDomain(state);
  Index flat = 0;
  Index stride = 1;
  for (int i = 0; i < dim(); ++i) {
    flat += stride * CellAlong(state(i), bounds_[i], cells_[i]);
    stride *= cells_[i];
  }
  return flat;
}

VectorXd Dictionary::Evaluate(const VectorXd& state) const {
  if (kind_ == Kind::kIndicator) {
    VectorXd psi = VectorXd::Zero(size_);
    psi(CellIndex(state)) = 1.0;
    return psi;
  }
  CheckDomain(state);
  const Interval& b = bounds_[0];
  const double u = 2.0 * (state(0) - b.lo) / b.width() - 1.0;
  VectorXd psi(size_);
  psi(0) = 1.0;
  for (int j = 1; j <= max_freq_; ++j) {
    const double arg = j * std::numbers::pi * u;
    psi(2 * j - 1) = std::cos(arg);
    psi(2 * j) = std::sin(arg);
  }
  return psi;
}

MatrixXd Dictionary::Evaluate(const StateMatrix& points) const {
  MatrixXd out(size_, points.cols());
  if (kind_ == Kind::kIndicator) out.setZero();
  ParallelFor(points.cols(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j) {
      if (kind_ == Kind::kIndicator) {
        out(CellIndex(points.col(j)), j) = 1.0;
      } else {
        out.col(j) = Evaluate(VectorXd(points.col(j)));
      }
    }
  });
  return out;
}

Box Dictionary::ResolutionCell(const VectorXd& state) const {
  CheckDomain(state);
  Box cell(dim());
  for (int i = 0; i < dim(); ++i) {
    const Interval& b = bounds_[i];
    if (kind_ == Kind::kIndicator) {
      const double h = b.width() / cells_[i];
      const int k = CellAlong(state(i), b, cells_[i]);
      cell[i] = {b.lo + k * h, b.lo + (k + 1) * h};
    } else {
      const double half = 0.5 * b.width() / (2.0 * max_freq_);
      cell[i] = {state(i) - half, state(i) + half};
    }
  }
  return cell;
}

std::string Dictionary::Describe() const {
  std::ostringstream os;
  if (kind_ == Kind::kIndicator) {
    os << "indicator(";
    for (size_t i = 0; i < cells_.size(); ++i) os << (i ? "x" : "") << cells_[i];
    os << " cells, m=" << size_ << ")";
  } else {
    os << "trig(K=" << max_freq_ << ", m=" << size_ << ")";
  }
  return os.str();
}

Dictionary DictionarySpec::Build() const {
  if (kind == Dictionary::Kind::kIndicator) return Dictionary::Indicator(cells, bounds);
  if (bounds.size() != 1) {
    throw UnsupportedError("trig dictionaries are one-dimensional");
  }
  return Dictionary::Trig(max_freq, bounds[0]);
}

DictionarySpec DictionarySpec::Of(const Dictionary& dict) {
  return {dict.kind(), dict.cells(), dict.bounds(), dict.max_freq()};
}

}  // namespace icdmd
