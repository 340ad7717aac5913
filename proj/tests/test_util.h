#pragma once

#include <random>

#include <Eigen/Dense>

#include "icdmd/constraints.h"

namespace icdmd {
namespace test {

inline Eigen::MatrixXd RandomMatrix(Eigen::Index rows, Eigen::Index cols,
                                    std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Product of two Gaussian factors, so the rank is exactly `rank` generically.
inline Eigen::MatrixXd RandomRankMatrix(Eigen::Index rows, Eigen::Index cols,
                                        Eigen::Index rank,
                                        std::mt19937_64& rng) {
  if (rank == 0) return Eigen::MatrixXd::Zero(rows, cols);
  return RandomMatrix(rows, rank, rng) * RandomMatrix(rank, cols, rng);
}

inline int RandomInt(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct Instance {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::MatrixXd a0;
  ConstraintSet cs;
};

// Constraints read off a planted matrix A0 (G⁺ = A0 D, F⁺ = A0ᵀ E), which are
// compatible by construction. Y = A0 X plus noise of size `noise`.
inline Instance RandomCompatibleInstance(Eigen::Index m, Eigen::Index g,
                                         Eigen::Index f, Eigen::Index n,
                                         double noise, std::mt19937_64& rng) {
  Instance inst;
  inst.a0 = RandomMatrix(m, m, rng);
  inst.x = RandomMatrix(m, n, rng);
  inst.y = inst.a0 * inst.x + noise * RandomMatrix(m, n, rng);
  inst.cs = ConstraintSet::Empty(m);
  inst.cs.d = RandomMatrix(m, g, rng);
  inst.cs.g_plus = inst.a0 * inst.cs.d;
  inst.cs.e = RandomMatrix(m, f, rng);
  inst.cs.f_plus = inst.a0.transpose() * inst.cs.e;
  return inst;
}

}  // namespace test
}  // namespace icdmd
