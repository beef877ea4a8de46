#pragma once

// Hand-rolled generators shared by the unit suites. They use std::mt19937_64
// so test inputs never share a generator with the code under test.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fsq/funcspace.hpp"

namespace fsq::test {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index size, double scale = 1.0) {
  return gaussian_matrix(rng, size, 1, scale).col(0);
}

/// Uniformly distributed point of the open ball of radius `radius`.
inline Eigen::VectorXd ball_point(Rng& rng, Eigen::Index size, double radius) {
  Eigen::VectorXd v = gaussian_vector(rng, size);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return v.normalized() * radius * std::pow(unit(rng), 1.0 / static_cast<double>(size));
}

inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index size) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, size, size));
  return qr.householderQ();
}

/// Random walks on [0, 1]: a rough stand-in for functional data.
inline FunctionalSample random_walks(Rng& rng, Eigen::Index grid_size, Eigen::Index n) {
  const auto grid = make_uniform_grid(0.0, 1.0, grid_size);
  Eigen::MatrixXd steps = gaussian_matrix(rng, grid_size, n, std::sqrt(1.0 / grid_size));
  steps.row(0).setZero();
  for (Eigen::Index i = 1; i < grid_size; ++i) steps.row(i) += steps.row(i - 1);
  return FunctionalSample(grid, steps);
}

/// Standard normal cdf.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace fsq::test
