#pragma once

// Discretized function spaces: grids carrying quadrature weights for the
// measure, curves sampled on a grid, samples of curves, orthonormal bases
// and the projection/PCA machinery built on the weighted inner product.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fsq/errors.hpp"

namespace fsq {

enum class GridKind { uniform_interval, gaussian_measure, custom };

inline const char* to_string(GridKind kind) {
  switch (kind) {
    case GridKind::uniform_interval: return "uniform-interval";
    case GridKind::gaussian_measure: return "gaussian-measure";
    case GridKind::custom: return "custom";
  }
  return "custom";
}

/// Tolerance for pairwise inner products of basis functions.
inline constexpr double kOrthonormalTolerance = 1e-8;

/// Norms at or below kZeroThreshold * (1 + reference scale) count as zero
/// for spatial-sign purposes.
inline constexpr double kZeroThreshold = 1e-12;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Evaluation points t_1 < ... < t_D with positive quadrature weights
/// realizing the measure on the index set.
template <typename Scalar>
class BasicGrid {
 public:
  using Vector = VectorX<Scalar>;

  BasicGrid(Vector points, Vector weights, GridKind kind)
      : points_(std::move(points)), weights_(std::move(weights)), kind_(kind) {
    const Eigen::Index size = points_.size();
    if (size != weights_.size()) {
      throw InvalidArgument("grid points and weights differ in length");
    }
    if (size < 1 || (kind_ != GridKind::custom && size < 2)) {
      throw InvalidArgument("grid needs at least two points (one for custom scalar grids)");
    }
    for (Eigen::Index i = 0; i < size; ++i) {
      if (!std::isfinite(points_[i]) || !std::isfinite(weights_[i]) || weights_[i] <= 0) {
        throw InvalidArgument("grid points must be finite and weights positive");
      }
      if (i > 0 && !(points_[i] > points_[i - 1])) {
        throw InvalidArgument("grid points must be strictly increasing");
      }
    }
    const Scalar total = weights_.sum();
    if (kind_ == GridKind::uniform_interval) {
      const Scalar range = points_[size - 1] - points_[0];
      if (std::abs(total - range) > Scalar(1e-10) * std::max(Scalar(1), range)) {
        throw InvalidArgument("uniform-interval weights must sum to the interval length");
      }
    } else if (kind_ == GridKind::gaussian_measure) {
      if (std::abs(total - Scalar(1)) > Scalar(1e-10)) {
        throw InvalidArgument("gaussian-measure weights must sum to one");
      }
    }
  }

  Eigen::Index size() const noexcept { return points_.size(); }
  const Vector& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  GridKind kind() const noexcept { return kind_; }
  Scalar lower() const { return points_[0]; }
  Scalar upper() const { return points_[size() - 1]; }

  bool operator==(const BasicGrid& other) const {
    return kind_ == other.kind_ && points_ == other.points_ && weights_ == other.weights_;
  }

 private:
  Vector points_;
  Vector weights_;
  GridKind kind_;
};

template <typename Scalar>
using BasicGridPtr = std::shared_ptr<const BasicGrid<Scalar>>;

/// Trapezoid weights for arbitrary increasing points; a single point gets weight 1.
template <typename Scalar>
VectorX<Scalar> trapezoid_weights(const VectorX<Scalar>& points) {
  const Eigen::Index size = points.size();
  VectorX<Scalar> weights = VectorX<Scalar>::Zero(size);
  if (size == 1) {
    weights[0] = 1;
    return weights;
  }
  for (Eigen::Index i = 0; i + 1 < size; ++i) {
    const Scalar half = (points[i + 1] - points[i]) / 2;
    weights[i] += half;
    weights[i + 1] += half;
  }
  return weights;
}

/// Equispaced points on [a, b] (endpoints included) with trapezoid weights.
template <typename Scalar = double>
BasicGridPtr<Scalar> make_uniform_grid(Scalar a, Scalar b, Eigen::Index size) {
  if (size < 2 || !(b > a)) {
    throw InvalidArgument("uniform grid needs size >= 2 and a < b");
  }
  VectorX<Scalar> points = VectorX<Scalar>::LinSpaced(size, a, b);
  VectorX<Scalar> weights = trapezoid_weights<Scalar>(points);
  // LinSpaced is not exactly symmetric; pin the total to b - a.
  weights *= (b - a) / weights.sum();
  return std::make_shared<const BasicGrid<Scalar>>(std::move(points), std::move(weights),
                                                   GridKind::uniform_interval);
}

/// Points drawn from a probability measure, each weighted 1/D. Points are sorted.
template <typename Derived>
BasicGridPtr<typename Derived::Scalar> make_measure_grid(const Eigen::MatrixBase<Derived>& drawn) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> points = drawn;
  std::sort(points.data(), points.data() + points.size());
  const Eigen::Index size = points.size();
  VectorX<Scalar> weights = VectorX<Scalar>::Constant(size, Scalar(1) / Scalar(size));
  return std::make_shared<const BasicGrid<Scalar>>(std::move(points), std::move(weights),
                                                   GridKind::gaussian_measure);
}

template <typename P, typename W>
BasicGridPtr<typename P::Scalar> make_custom_grid(const Eigen::MatrixBase<P>& points, const Eigen::MatrixBase<W>& weights) {
  using Scalar = typename P::Scalar;
  return std::make_shared<const BasicGrid<Scalar>>(VectorX<Scalar>(points), VectorX<Scalar>(weights), GridKind::custom);
}

template <typename Scalar>
bool same_grid(const BasicGridPtr<Scalar>& a, const BasicGridPtr<Scalar>& b) {
  return a == b || (a && b && *a == *b);
}

template <typename Scalar>
void require_same_grid(const BasicGridPtr<Scalar>& a, const BasicGridPtr<Scalar>& b) {
  if (!same_grid(a, b)) throw GridMismatch();
}

/// A function evaluated on a grid.
template <typename Scalar>
class BasicCurve {
 public:
  using Vector = VectorX<Scalar>;

  BasicCurve(BasicGridPtr<Scalar> grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("curve requires a grid");
    if (values_.size() != grid_->size()) {
      throw InvalidArgument("curve has " + std::to_string(values_.size()) + " values on a grid of " +
                            std::to_string(grid_->size()) + " points");
    }
    if (!values_.allFinite()) throw InvalidArgument("curve values must be finite");
  }

  static BasicCurve zero(BasicGridPtr<Scalar> grid) {
    const Eigen::Index size = grid->size();
    return BasicCurve(std::move(grid), Vector::Zero(size));
  }

  const BasicGridPtr<Scalar>& grid() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

  friend BasicCurve operator+(const BasicCurve& a, const BasicCurve& b) {
    require_same_grid(a.grid_, b.grid_);
    return BasicCurve(a.grid_, a.values_ + b.values_);
  }
  friend BasicCurve operator-(const BasicCurve& a, const BasicCurve& b) {
    require_same_grid(a.grid_, b.grid_);
    return BasicCurve(a.grid_, a.values_ - b.values_);
  }
  friend BasicCurve operator*(Scalar c, const BasicCurve& a) { return BasicCurve(a.grid_, c * a.values_); }

 private:
  BasicGridPtr<Scalar> grid_;
  Vector values_;
};

/// n curves on a shared grid, stored column-wise (D x n).
template <typename Scalar>
class BasicFunctionalSample {
 public:
  using Matrix = MatrixX<Scalar>;

  BasicFunctionalSample(BasicGridPtr<Scalar> grid, Matrix values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("sample requires a grid");
    if (values_.cols() < 1) throw InvalidArgument("sample must contain at least one curve");
    if (values_.rows() != grid_->size()) throw InvalidArgument("sample rows must match the grid size");
    if (!values_.allFinite()) throw InvalidArgument("sample values must be finite");
  }

  const BasicGridPtr<Scalar>& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.cols(); }
  Eigen::Index grid_size() const noexcept { return values_.rows(); }

  BasicCurve<Scalar> curve(Eigen::Index i) const { return BasicCurve<Scalar>(grid_, values_.col(i)); }

  BasicCurve<Scalar> mean() const { return BasicCurve<Scalar>(grid_, values_.rowwise().mean()); }

  BasicFunctionalSample centered() const {
    return BasicFunctionalSample(grid_, values_.colwise() - values_.rowwise().mean());
  }

 private:
  BasicGridPtr<Scalar> grid_;
  Matrix values_;
};

/// Orthonormal (under the grid inner product) functions stored as the
/// columns of a D x d matrix, optionally with nonincreasing eigenvalues.
template <typename Scalar>
class BasicBasis {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  BasicBasis(BasicGridPtr<Scalar> grid, Matrix functions, std::optional<Vector> eigenvalues = std::nullopt,
             std::optional<Scalar> total_variance = std::nullopt)
      : grid_(std::move(grid)),
        functions_(std::move(functions)),
        eigenvalues_(std::move(eigenvalues)),
        total_variance_(total_variance) {
    if (!grid_) throw InvalidArgument("basis requires a grid");
    if (functions_.rows() != grid_->size()) throw InvalidArgument("basis functions must match the grid size");
    if (functions_.cols() < 1) throw InvalidArgument("basis must contain at least one function");
    const Matrix gram = functions_.transpose() * grid_->weights().asDiagonal() * functions_;
    const Scalar deviation = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (deviation > Scalar(kOrthonormalTolerance)) {
      throw InvalidArgument("basis functions are not orthonormal (max Gram deviation " +
                            std::to_string(static_cast<double>(deviation)) + ")");
    }
    if (eigenvalues_) {
      if (eigenvalues_->size() != functions_.cols()) throw InvalidArgument("one eigenvalue per basis function");
      for (Eigen::Index k = 0; k < eigenvalues_->size(); ++k) {
        if ((*eigenvalues_)[k] < 0 || (k > 0 && (*eigenvalues_)[k] > (*eigenvalues_)[k - 1])) {
          throw InvalidArgument("basis eigenvalues must be nonnegative and nonincreasing");
        }
      }
    }
  }

  const BasicGridPtr<Scalar>& grid() const noexcept { return grid_; }
  const Matrix& functions() const noexcept { return functions_; }
  Eigen::Index size() const noexcept { return functions_.cols(); }
  const std::optional<Vector>& eigenvalues() const noexcept { return eigenvalues_; }
  const std::optional<Scalar>& total_variance() const noexcept { return total_variance_; }

  BasicCurve<Scalar> function(Eigen::Index k) const { return BasicCurve<Scalar>(grid_, functions_.col(k)); }

 private:
  BasicGridPtr<Scalar> grid_;
  Matrix functions_;
  std::optional<Vector> eigenvalues_;
  std::optional<Scalar> total_variance_;
};

template <typename Scalar>
using BasicBasisPtr = std::shared_ptr<const BasicBasis<Scalar>>;

/// Coordinates of an element of span{phi_1, ..., phi_d}.
template <typename Scalar>
class BasicCoefficients {
 public:
  using Vector = VectorX<Scalar>;

  BasicCoefficients(Vector values, BasicBasisPtr<Scalar> basis) : values_(std::move(values)), basis_(std::move(basis)) {
    if (!basis_) throw InvalidArgument("coefficients require a basis");
    if (values_.size() < 1 || values_.size() > basis_->size()) {
      throw InvalidArgument("coefficient count must be between 1 and the basis size");
    }
  }

  const Vector& values() const noexcept { return values_; }
  const BasicBasisPtr<Scalar>& basis() const noexcept { return basis_; }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  Vector values_;
  BasicBasisPtr<Scalar> basis_;
};

using Grid = BasicGrid<double>;
using GridPtr = BasicGridPtr<double>;
using Curve = BasicCurve<double>;
using FunctionalSample = BasicFunctionalSample<double>;
using Basis = BasicBasis<double>;
using BasisPtr = BasicBasisPtr<double>;
using Coefficients = BasicCoefficients<double>;

/// Truncation level used whenever the caller does not choose one.
inline Eigen::Index default_truncation(Eigen::Index n) {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n)))));
}

// Weighted inner product on raw value vectors.
template <typename W, typename A, typename B>
typename A::Scalar weighted_dot(const Eigen::MatrixBase<W>& weights, const Eigen::MatrixBase<A>& a,
                                const Eigen::MatrixBase<B>& b) {
  return (weights.array() * a.array() * b.array()).sum();
}

template <typename W, typename A>
typename A::Scalar weighted_norm(const Eigen::MatrixBase<W>& weights, const Eigen::MatrixBase<A>& a) {
  return std::sqrt((weights.array() * a.array().square()).sum());
}

template <typename Scalar>
Scalar inner_product(const BasicCurve<Scalar>& a, const BasicCurve<Scalar>& b) {
  require_same_grid(a.grid(), b.grid());
  return weighted_dot(a.grid()->weights(), a.values(), b.values());
}

template <typename Scalar>
Scalar norm(const BasicCurve<Scalar>& a) {
  return weighted_norm(a.grid()->weights(), a.values());
}

/// Orthogonal projection onto the span of the first d basis functions.
template <typename Scalar>
BasicCoefficients<Scalar> project(const BasicCurve<Scalar>& x, const BasicBasisPtr<Scalar>& basis, Eigen::Index d) {
  if (d < 1 || d > basis->size()) throw InvalidArgument("projection dimension out of range");
  require_same_grid(x.grid(), basis->grid());
  VectorX<Scalar> coefficients =
      basis->functions().leftCols(d).transpose() * (basis->grid()->weights().asDiagonal() * x.values());
  return BasicCoefficients<Scalar>(std::move(coefficients), basis);
}

/// Coefficients of every curve in the sample, one column per curve (d x n).
template <typename Scalar>
MatrixX<Scalar> project_sample(const BasicFunctionalSample<Scalar>& sample, const BasicBasisPtr<Scalar>& basis,
                               Eigen::Index d) {
  if (d < 1 || d > basis->size()) throw InvalidArgument("projection dimension out of range");
  require_same_grid(sample.grid(), basis->grid());
  return basis->functions().leftCols(d).transpose() * (basis->grid()->weights().asDiagonal() * sample.values());
}

template <typename Scalar>
BasicCurve<Scalar> reconstruct(const BasicCoefficients<Scalar>& c) {
  const auto& basis = *c.basis();
  return BasicCurve<Scalar>(basis.grid(), basis.functions().leftCols(c.size()) * c.values());
}

namespace detail {

// Weighted Gram-Schmidt: orthonormalizes columns [first, end) of `functions`
// against everything before them, drawing replacement directions from the
// grid's coordinate vectors when a column is (numerically) dependent.
template <typename Scalar>
void complete_orthonormal(MatrixX<Scalar>& functions, Eigen::Index first, const VectorX<Scalar>& weights) {
  const Eigen::Index size = functions.rows();
  Eigen::Index candidate = 0;
  for (Eigen::Index k = first; k < functions.cols(); ++k) {
    for (;;) {
      VectorX<Scalar> v = functions.col(k);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < k; ++j) {
          v -= weighted_dot(weights, functions.col(j), v) * functions.col(j);
        }
      }
      const Scalar length = weighted_norm(weights, v);
      if (length > Scalar(1e-8)) {
        functions.col(k) = v / length;
        break;
      }
      if (candidate >= size) throw RankDeficient("cannot complete an orthonormal basis on this grid");
      functions.col(k).setZero();
      functions(candidate, k) = Scalar(1) / std::sqrt(weights[candidate]);
      ++candidate;
    }
  }
}

}  // namespace detail

/// Re-orthonormalizes arbitrary functions under the grid inner product
/// (keeps the span of leading columns, Gram-Schmidt order).
template <typename Scalar>
BasicBasisPtr<Scalar> orthonormalize(const BasicGridPtr<Scalar>& grid, MatrixX<Scalar> functions,
                                     std::optional<VectorX<Scalar>> eigenvalues = std::nullopt) {
  detail::complete_orthonormal(functions, 0, grid->weights());
  return std::make_shared<const BasicBasis<Scalar>>(grid, std::move(functions), std::move(eigenvalues));
}

/// Functional principal components. The sample is centered by its mean
/// curve; the covariance operator uses the 1/(n-1) normalization.
template <typename Scalar>
BasicBasisPtr<Scalar> pca(const BasicFunctionalSample<Scalar>& sample, Eigen::Index d) {
  const Eigen::Index n = sample.size();
  const Eigen::Index size = sample.grid_size();
  if (n < 2) throw InvalidArgument("PCA needs at least two curves");
  if (d < 1 || d > std::min(n - 1, size)) throw InvalidArgument("PCA dimension must be in [1, min(n-1, D)]");

  const auto& weights = sample.grid()->weights();
  const MatrixX<Scalar> centered = sample.centered().values();
  const Scalar scale = Scalar(1) / Scalar(n - 1);

  VectorX<Scalar> eigenvalues(d);
  MatrixX<Scalar> functions(size, d);
  Scalar total = 0;
  Eigen::Index resolved = 0;

  if (n <= size) {
    // Dual route through the n x n weighted Gram matrix of the curves.
    const MatrixX<Scalar> gram = scale * centered.transpose() * weights.asDiagonal() * centered;
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(gram);
    const VectorX<Scalar>& mu = solver.eigenvalues();
    total = std::max(Scalar(0), mu.sum());
    const Scalar top = mu[n - 1];
    if (!(top > 0)) throw RankDeficient("degenerate sample: all curves are identical");
    for (Eigen::Index k = 0; k < d; ++k) {
      const Scalar value = mu[n - 1 - k];
      if (value > top * Scalar(1e-12)) {
        eigenvalues[k] = value;
        functions.col(k) = centered * solver.eigenvectors().col(n - 1 - k) / std::sqrt(value / scale);
        resolved = k + 1;
      } else {
        eigenvalues[k] = 0;
      }
    }
  } else {
    const VectorX<Scalar> root = weights.cwiseSqrt();
    const MatrixX<Scalar> whitened = root.asDiagonal() * centered;
    const MatrixX<Scalar> covariance = scale * whitened * whitened.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(covariance);
    const VectorX<Scalar>& mu = solver.eigenvalues();
    total = std::max(Scalar(0), mu.sum());
    const Scalar top = mu[size - 1];
    if (!(top > 0)) throw RankDeficient("degenerate sample: all curves are identical");
    for (Eigen::Index k = 0; k < d; ++k) {
      const Scalar value = mu[size - 1 - k];
      eigenvalues[k] = value > top * Scalar(1e-12) ? value : Scalar(0);
      functions.col(k) = solver.eigenvectors().col(size - 1 - k).cwiseQuotient(root);
    }
    resolved = d;
  }
  if (resolved < d) {
    functions.rightCols(d - resolved).setZero();
    detail::complete_orthonormal(functions, resolved, weights);
  }
  // Sign convention: each eigenfunction has a nonnegative weighted integral
  // (ties broken by the largest-magnitude entry).
  for (Eigen::Index k = 0; k < d; ++k) {
    Scalar mass = weighted_dot(weights, functions.col(k), VectorX<Scalar>::Ones(size));
    if (std::abs(mass) < Scalar(1e-12)) {
      Eigen::Index at = 0;
      functions.col(k).cwiseAbs().maxCoeff(&at);
      mass = functions(at, k);
    }
    if (mass < 0) functions.col(k) = -functions.col(k);
  }
  return std::make_shared<const BasicBasis<Scalar>>(sample.grid(), std::move(functions), std::move(eigenvalues),
                                                    total);
}

/// Fraction of the total variance carried by each eigenvalue of the basis.
template <typename Scalar>
VectorX<Scalar> explained_variance(const BasicBasis<Scalar>& basis) {
  if (!basis.eigenvalues() || !basis.total_variance() || !(*basis.total_variance() > 0)) {
    throw InvalidArgument("basis carries no variance information");
  }
  return *basis.eigenvalues() / *basis.total_variance();
}

}  // namespace fsq
