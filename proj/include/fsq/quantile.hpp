#pragma once

// Sample spatial u-quantiles. The working problem lives in the coefficient
// space of an orthonormal basis truncated at d terms, where the projected
// data are the columns of a d x n matrix and the norm is Euclidean:
//
//   g(Q) = n^-1 sum_i (||Q - X_i|| - ||X_i||) - <u, Q>.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fsq/funcspace.hpp"
#include "fsq/spatialdist.hpp"

namespace fsq {

/// Element of the open unit ball of the dual, stored by its coefficients in
/// the dual basis (identified with the primal basis).
class DirectionU {
 public:
  explicit DirectionU(Eigen::VectorXd coefficients) : coefficients_(std::move(coefficients)) {
    if (!coefficients_.allFinite()) throw InvalidArgument("direction coefficients must be finite");
    if (!(coefficients_.norm() < 1.0)) throw InvalidArgument("direction u must satisfy ||u|| < 1");
  }

  static DirectionU zero(Eigen::Index d) { return DirectionU(Eigen::VectorXd::Zero(d)); }
  /// c * phi_k (k is 1-based).
  static DirectionU along(Eigen::Index k, double c, Eigen::Index d) {
    if (k < 1 || k > d) throw InvalidArgument("direction index out of range");
    Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(d);
    coefficients[k - 1] = c;
    return DirectionU(std::move(coefficients));
  }

  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  double norm() const { return coefficients_.norm(); }

  /// First d coefficients (zero padded).
  Eigen::VectorXd truncated(Eigen::Index d) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    const Eigen::Index keep = std::min(d, coefficients_.size());
    out.head(keep) = coefficients_.head(keep);
    return out;
  }

 private:
  Eigen::VectorXd coefficients_;
};

template <typename Q, typename M, typename U>
typename Q::Scalar objective(const Eigen::MatrixBase<Q>& point, const Eigen::MatrixBase<M>& data,
                             const Eigen::MatrixBase<U>& u) {
  using Scalar = typename Q::Scalar;
  if (!(u.norm() < Scalar(1))) throw InvalidArgument("direction u must satisfy ||u|| < 1");
  const Scalar spread = ((-data).colwise() + point).colwise().norm().sum();
  const Scalar offset = data.colwise().norm().sum();
  return (spread - offset) / Scalar(data.cols()) - u.dot(point);
}

/// Index of a datum within the zero threshold of `point`, if any.
template <typename Q, typename M>
std::optional<Eigen::Index> coincident_datum(const Eigen::MatrixBase<Q>& point, const Eigen::MatrixBase<M>& data) {
  using Scalar = typename Q::Scalar;
  const Scalar scale = point.norm();
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    const Scalar length = (point - data.col(i)).norm();
    if (is_effectively_zero(length, std::max(scale, data.col(i).norm()))) return i;
  }
  return std::nullopt;
}

/// n^-1 sum_i (Q - X_i)/||Q - X_i|| - u. Throws CoincidentDatum when Q sits on a datum.
template <typename Q, typename M, typename U>
VectorX<typename Q::Scalar> gradient(const Eigen::MatrixBase<Q>& point, const Eigen::MatrixBase<M>& data,
                                     const Eigen::MatrixBase<U>& u) {
  using Scalar = typename Q::Scalar;
  if (auto hit = coincident_datum(point, data)) throw CoincidentDatum(*hit);
  const MatrixX<Scalar> diff = (-data).colwise() + point;
  const VectorX<Scalar> inverse = diff.colwise().norm().cwiseInverse().transpose();
  return diff * inverse / Scalar(data.cols()) - u;
}

/// Empirical Hessian: n^-1 sum_i (I - v_i v_i^T) / ||Q - X_i|| with
/// v_i = (Q - X_i)/||Q - X_i||.
template <typename Q, typename M>
MatrixX<typename Q::Scalar> hessian(const Eigen::MatrixBase<Q>& point, const Eigen::MatrixBase<M>& data) {
  using Scalar = typename Q::Scalar;
  if (auto hit = coincident_datum(point, data)) throw CoincidentDatum(*hit);
  const Eigen::Index d = point.size();
  const MatrixX<Scalar> diff = (-data).colwise() + point;
  const VectorX<Scalar> lengths = diff.colwise().norm().transpose();
  // (I - v v^T)/r = I/r - diff diff^T / r^3
  const MatrixX<Scalar> scaled = diff * lengths.array().pow(Scalar(-1.5)).matrix().asDiagonal();
  MatrixX<Scalar> h = MatrixX<Scalar>::Identity(d, d) * lengths.cwiseInverse().sum();
  h.template selfadjointView<Eigen::Lower>().rankUpdate(scaled, Scalar(-1));
  MatrixX<Scalar> full = h.template selfadjointView<Eigen::Lower>();
  return full / Scalar(data.cols());
}

struct QuantileOptions {
  double grad_tol = 1e-8;
  double step_tol = 1e-12;
  int max_iter = 500;
  double hessian_condition_limit = 1e12;
  bool record_objective = false;
};

/// Minimizer in coefficient space.
struct CoefficientSolution {
  Eigen::VectorXd point;
  int iterations = 0;
  double grad_norm = 0;
  double objective = 0;
  bool converged = false;
  std::optional<Eigen::Index> anchored_at_datum;
  bool degenerate = false;  // collinear data, solved on the supporting line
  int newton_steps = 0;
  int fallback_steps = 0;
  std::vector<double> objective_trace;  // filled when options.record_objective
};

/// Damped Newton with backtracking on the objective, Weiszfeld fallback and
/// the datum-optimality test at coincident iterates. Throws ConvergenceError
/// after max_iter iterations.
CoefficientSolution minimize_quantile(const Eigen::MatrixXd& data, const Eigen::VectorXd& u,
                                      const QuantileOptions& options = {});

struct QuantileSolution {
  Coefficients coefficients;  // of Q - mean in the working basis
  Curve curve;                // mean + reconstruction
  int iterations;
  double grad_norm;
  double objective;
  bool converged;
  std::optional<Eigen::Index> anchored_at_datum;
  bool degenerate;
};

/// Centers the sample by its mean curve, solves over span{phi_1..phi_d}
/// (d = 0 selects floor(sqrt(n))) and adds the mean back.
QuantileSolution solve_quantile(const FunctionalSample& sample, const DirectionU& u, const BasisPtr& basis,
                                Eigen::Index d = 0, const QuantileOptions& options = {});

struct FanEntry {
  Eigen::Index k;  // 0 for the median
  double c;        // signed: u = c * phi_k
  QuantileSolution solution;
};

/// Median followed by u = +c phi_k and u = -c phi_k for every (k, c).
/// A null basis selects pca(sample, d).
std::vector<FanEntry> quantile_fan(const FunctionalSample& sample, const std::vector<Eigen::Index>& ks,
                                   const std::vector<double>& cs, BasisPtr basis = nullptr, Eigen::Index d = 0,
                                   const QuantileOptions& options = {});

struct BahadurReport {
  double residual_norm;
  Eigen::Index n;
  Eigen::Index d;
  double linear_term_norm;
  Eigen::Index reference_size;
};

/// R_n = (Qhat(u) - Q_n(u)) + J^-1 n^-1 sum_i score_i(Q_n(u)), with Q_n(u)
/// and J estimated from the (much larger) reference sample.
BahadurReport bahadur_residual(const FunctionalSample& sample, const DirectionU& u, const BasisPtr& basis,
                               Eigen::Index d, const FunctionalSample& reference, const QuantileOptions& options = {});

/// Population-side quantities for repeated Bahadur evaluations.
struct BahadurReference {
  Eigen::VectorXd quantile;  // Q_n(u) in coefficients
  Eigen::MatrixXd inverse_hessian;
  Eigen::VectorXd u;
  Eigen::Index size;
};

BahadurReference bahadur_reference(const Eigen::MatrixXd& reference_coefficients, const Eigen::VectorXd& u,
                                   const QuantileOptions& options = {});
BahadurReport bahadur_residual(const Eigen::MatrixXd& sample_coefficients, const BahadurReference& reference,
                               const QuantileOptions& options = {});

}  // namespace fsq
