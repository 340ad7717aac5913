#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icdmd/common.h"

namespace icdmd {

/// A finite vector ψ of observables over a box in ℝᵖ.
///
/// Two families are supported. Indicator dictionaries partition the box into
/// a tensor grid of equal cells and carry one indicator per cell; cells are
/// half-open on their upper face except the last cell along each dimension,
/// which is closed, so every point of the closed box lies in exactly one cell.
/// Cell indices run with the first dimension fastest. Trigonometric
/// dictionaries (one-dimensional only) hold
/// {1, cos(πu), sin(πu), ..., cos(Kπu), sin(Kπu)} where u rescales the bounds
/// onto [-1, 1].
class Dictionary {
 public:
  enum class Kind { kIndicator, kTrig };

  /// Largest observable count accepted by the factories.
  static constexpr Eigen::Index kMaxObservables = 50'000;

  static Dictionary Indicator(std::vector<int> cells, Box bounds);
  static Dictionary Trig(int max_freq, Interval bounds);

  Kind kind() const { return kind_; }
  Eigen::Index size() const { return size_; }
  int dim() const { return static_cast<int>(bounds_.size()); }
  const Box& bounds() const { return bounds_; }
  const std::vector<int>& cells() const { return cells_; }
  int max_freq() const { return max_freq_; }

  /// Coefficients c with cᵀψ ≡ 1 on the domain.
  const std::optional<Eigen::VectorXd>& constant_representer() const {
    return constant_representer_;
  }

  bool Contains(const Eigen::VectorXd& state) const;

  /// ψ(state). Throws ArgumentError for states outside the closed box.
  Eigen::VectorXd Evaluate(const Eigen::VectorXd& state) const;

  /// Column j of the result is ψ(points.col(j)).
  Eigen::MatrixXd Evaluate(const StateMatrix& points) const;

  /// Flat index of the indicator cell holding `state` (indicator kind only).
  Eigen::Index CellIndex(const Eigen::VectorXd& state) const;

  /// Box over which the dictionary cannot distinguish states near `state`:
  /// the enclosing cell for indicators, or a window of one half-period of the
  /// highest frequency centred at `state` for trigonometric bases.
  Box ResolutionCell(const Eigen::VectorXd& state) const;

  std::string Describe() const;

 private:
  Dictionary() = default;

  void CheckDomain(const Eigen::VectorXd& state) const;

  Kind kind_{Kind::kIndicator};
  Eigen::Index size_{0};
  Box bounds_;
  std::vector<int> cells_;
  int max_freq_{0};
  std::optional<Eigen::VectorXd> constant_representer_;
};

/// Serializable description from which a Dictionary is rebuilt.
struct DictionarySpec {
  Dictionary::Kind kind{Dictionary::Kind::kIndicator};
  std::vector<int> cells;
  Box bounds;
  int max_freq{0};

  Dictionary Build() const;
  static DictionarySpec Of(const Dictionary& dict);
};

}  // namespace icdmd
