#pragma once

// Spatial signs and spatial distributions. In a Hilbert space the sign of x
// is x/||x|| (zero at the origin); the empirical spatial distribution at x is
// the mean of the signs of x - X_i.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fsq/funcspace.hpp"

namespace fsq {

/// Riesz representer of a spatial distribution value and its norm.
template <typename Scalar>
struct BasicSpatialDistValue {
  BasicCurve<Scalar> representation;
  Scalar norm;
};

using SpatialDistValue = BasicSpatialDistValue<double>;

template <typename Scalar>
bool is_effectively_zero(Scalar length, Scalar reference_scale) {
  return length <= Scalar(kZeroThreshold) * (Scalar(1) + reference_scale);
}

template <typename Scalar>
BasicCurve<Scalar> sgn_hilbert(const BasicCurve<Scalar>& x, Scalar reference_scale = 0) {
  const Scalar length = norm(x);
  if (is_effectively_zero(length, reference_scale)) return BasicCurve<Scalar>::zero(x.grid());
  return BasicCurve<Scalar>(x.grid(), x.values() / length);
}

/// Sign in the sequence space l_p, 1 < p < inf: the unit-norm element of
/// l_q (q = p/(p-1)) with entries sign(x_j)|x_j|^(p-1) / ||x||_p^(p-1).
template <typename Derived>
VectorX<typename Derived::Scalar> sgn_lp(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (!(p > Scalar(1)) || !std::isfinite(p)) throw InvalidArgument("l_p sign needs 1 < p < infinity");
  const Scalar scale = x.cwiseAbs().maxCoeff();
  VectorX<Scalar> out = VectorX<Scalar>::Zero(x.size());
  if (!(scale > 0)) return out;
  // Normalize by the max entry first so large p does not overflow.
  const auto ratio = (x.array() / scale).eval();
  const Scalar length = std::pow(ratio.abs().pow(p).sum(), Scalar(1) / p);
  out = (ratio.sign() * ratio.abs().pow(p - 1) / std::pow(length, p - 1)).matrix();
  return out;
}

template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  const Scalar scale = x.cwiseAbs().maxCoeff();
  if (!(scale > 0)) return Scalar(0);
  return scale * std::pow((x.array() / scale).abs().pow(p).sum(), Scalar(1) / p);
}

/// Mean of spatial signs of x - X_i where the columns of `data` are the X_i
/// and the norm is weighted by `weights`. Coincident points contribute zero.
template <typename W, typename X, typename M>
VectorX<typename X::Scalar> mean_spatial_sign(const Eigen::MatrixBase<W>& weights, const Eigen::MatrixBase<X>& x,
                                              const Eigen::MatrixBase<M>& data) {
  using Scalar = typename X::Scalar;
  const Eigen::Index n = data.cols();
  if (n < 1) throw InvalidArgument("spatial distribution of an empty sample");
  const MatrixX<Scalar> diff = (-data).colwise() + x;
  const VectorX<Scalar> lengths = (weights.asDiagonal() * diff.cwiseAbs2()).colwise().sum().cwiseSqrt().transpose();
  const VectorX<Scalar> data_norms =
      (weights.asDiagonal() * data.cwiseAbs2()).colwise().sum().cwiseSqrt().transpose();
  const Scalar x_norm = weighted_norm(weights, x);
  VectorX<Scalar> inverse(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar scale = std::max(x_norm, data_norms[i]);
    inverse[i] = is_effectively_zero(lengths[i], scale) ? Scalar(0) : Scalar(1) / lengths[i];
  }
  return diff * inverse / Scalar(n);
}

/// Empirical spatial distribution of the sample evaluated at x.
template <typename Scalar>
BasicSpatialDistValue<Scalar> empirical_spatial_dist(const BasicCurve<Scalar>& x,
                                                     const BasicFunctionalSample<Scalar>& sample) {
  require_same_grid(x.grid(), sample.grid());
  BasicCurve<Scalar> value(x.grid(), mean_spatial_sign(x.grid()->weights(), x.values(), sample.values()));
  const Scalar length = norm(value);
  return {std::move(value), length};
}

/// Empirical spatial distribution in l_p (finite-dimensional coefficient
/// vectors, one column of `data` per observation). Returns the dual vector.
template <typename X, typename M>
VectorX<typename X::Scalar> empirical_spatial_dist_lp(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<M>& data,
                                                      typename X::Scalar p) {
  using Scalar = typename X::Scalar;
  const Eigen::Index n = data.cols();
  if (n < 1) throw InvalidArgument("spatial distribution of an empty sample");
  VectorX<Scalar> total = VectorX<Scalar>::Zero(x.size());
  const Scalar x_norm = lp_norm(x, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorX<Scalar> diff = x - data.col(i);
    if (is_effectively_zero(lp_norm(diff, p), std::max(x_norm, lp_norm(data.col(i), p)))) continue;
    total += sgn_lp(diff, p);
  }
  return total / Scalar(n);
}

template <typename Scalar>
struct BasicMonotonicityReport {
  std::vector<Scalar> values;   // <S_x - S_y, x - y> per pair
  std::vector<bool> degenerate;  // x == y
  std::size_t violations = 0;   // nondegenerate pairs with value <= 0
  std::size_t degenerate_count = 0;
};

using MonotonicityReport = BasicMonotonicityReport<double>;

/// Strict monotonicity of the empirical spatial distribution over the pairs.
template <typename Scalar>
BasicMonotonicityReport<Scalar> monotonicity_probe(
    const BasicFunctionalSample<Scalar>& sample,
    const std::vector<std::pair<BasicCurve<Scalar>, BasicCurve<Scalar>>>& pairs) {
  BasicMonotonicityReport<Scalar> report;
  for (const auto& [x, y] : pairs) {
    const BasicCurve<Scalar> delta = x - y;
    const bool same = is_effectively_zero(norm(delta), std::max(norm(x), norm(y)));
    Scalar value = 0;
    if (!same) {
      const auto sx = empirical_spatial_dist(x, sample);
      const auto sy = empirical_spatial_dist(y, sample);
      value = inner_product(sx.representation - sy.representation, delta);
    }
    report.values.push_back(value);
    report.degenerate.push_back(same);
    if (same) {
      ++report.degenerate_count;
    } else if (!(value > 0)) {
      ++report.violations;
    }
  }
  return report;
}

}  // namespace fsq
