#pragma once

// Karhunen-Loeve samplers: X = m + sum_k lambda_k Y_k phi_k, where
// (lambda_k^2, phi_k) are eigenpairs of the covariance operator under the
// grid measure and Y_k are standardized scores (Gaussian or Student-t with
// one shared chi-square mixing variable per path).

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fsq/funcspace.hpp"
#include "fsq/random.hpp"

namespace fsq {

enum class KernelKind { brownian, fractional_brownian, min_kernel, gaussian, custom };

class KernelSpec {
 public:
  /// Closed-form Brownian eigenpairs; kernel min(t, s).
  static KernelSpec brownian() { return KernelSpec(KernelKind::brownian); }
  /// 0.5 (t^2H + s^2H - |t - s|^2H), H in (0, 1).
  static KernelSpec fractional_brownian(double hurst);
  /// min(t, s), eigenpairs computed numerically.
  static KernelSpec min_kernel() { return KernelSpec(KernelKind::min_kernel); }
  /// exp(-(t - s)^2).
  static KernelSpec gaussian() { return KernelSpec(KernelKind::gaussian); }
  /// Explicit covariance matrix on the grid; symmetric PSD within 1e-8.
  static KernelSpec custom(Eigen::MatrixXd matrix);

  KernelKind kind() const noexcept { return kind_; }
  double hurst() const noexcept { return hurst_; }

  /// Kernel evaluated at all grid pairs.
  Eigen::MatrixXd matrix(const Grid& grid) const;
  std::string name() const;

 private:
  explicit KernelSpec(KernelKind kind) : kind_(kind) {}

  KernelKind kind_;
  double hurst_ = 0.5;
  Eigen::MatrixXd custom_;
};

class CoefficientLaw {
 public:
  enum class Kind { gaussian, student_t };

  static CoefficientLaw gaussian() { return CoefficientLaw(Kind::gaussian, 0); }
  /// Y_k = Z_k / sqrt(W / r), W ~ chi-square(r), r >= 3.
  static CoefficientLaw student_t(int dof);

  Kind kind() const noexcept { return kind_; }
  int dof() const noexcept { return dof_; }
  /// Var(Y_k).
  double variance() const noexcept { return kind_ == Kind::gaussian ? 1.0 : dof_ / (dof_ - 2.0); }
  std::string name() const;

 private:
  CoefficientLaw(Kind kind, int dof) : kind_(kind), dof_(dof) {}

  Kind kind_;
  int dof_;
};

struct ProcessSpec {
  KernelSpec kernel;
  CoefficientLaw law;
  Curve mean;
  Eigen::Index truncation;

  const GridPtr& grid() const noexcept { return mean.grid(); }
  std::string name() const;
};

/// Spec with zero mean; truncation 0 selects the default (100 closed-form
/// Brownian pairs capped at D, otherwise D numerical pairs).
ProcessSpec make_process(KernelSpec kernel, CoefficientLaw law, GridPtr grid, Eigen::Index truncation = 0);

/// Closed-form Brownian eigenpair: lambda_k = 1/((k - 1/2) pi),
/// phi_k(t) = sqrt(2) sin((k - 1/2) pi t). Grid must lie in [0, 1].
std::pair<double, Curve> bm_eigenpair(int k, const GridPtr& grid);

/// Top-d eigenpairs of the integral operator of `kernel` under the grid
/// measure (eigendecomposition of W^1/2 K W^1/2). Eigenvalues are the
/// operator eigenvalues lambda_k^2.
BasisPtr kernel_eigen(const KernelSpec& kernel, const GridPtr& grid, Eigen::Index d);

/// The eigenfunctions and standard deviations lambda_k used to sample `spec`.
struct KarhunenLoeve {
  BasisPtr basis;
  Eigen::VectorXd scales;
};

KarhunenLoeve karhunen_loeve(const ProcessSpec& spec);

/// Draws the scores lambda_k Y_k of a single path into `out`.
void draw_scores(const Eigen::VectorXd& scales, const CoefficientLaw& law, Philox4x32& engine,
                 Eigen::Ref<Eigen::VectorXd> out);

/// n i.i.d. truncated KL paths; path i uses its own substream of `seed`.
FunctionalSample sample_process(const ProcessSpec& spec, Eigen::Index n, std::uint64_t seed);
FunctionalSample sample_process(const ProcessSpec& spec, const KarhunenLoeve& expansion, Eigen::Index n,
                                std::uint64_t seed);

/// D points drawn from N(0, variance), each with weight 1/D.
GridPtr draw_measure_grid(Eigen::Index size, double variance, std::uint64_t seed);

}  // namespace fsq
