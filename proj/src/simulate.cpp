#include "fsq/simulate.hpp"

#include <cmath>
#include <numbers>

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "fsq/parallel.hpp"

namespace fsq {

KernelSpec KernelSpec::fractional_brownian(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidArgument("Hurst index must lie in (0, 1)");
  KernelSpec spec(KernelKind::fractional_brownian);
  spec.hurst_ = hurst;
  return spec;
}

KernelSpec KernelSpec::custom(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) throw InvalidArgument("custom kernel must be square");
  if (!matrix.allFinite()) throw InvalidArgument("custom kernel must be finite");
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvalidArgument("custom kernel must be symmetric");
  }
  const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(matrix, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (smallest < -1e-8) throw NumericalPsd("custom kernel is not positive semidefinite");
  KernelSpec spec(KernelKind::custom);
  spec.custom_ = std::move(matrix);
  return spec;
}

Eigen::MatrixXd KernelSpec::matrix(const Grid& grid) const {
  const Eigen::Index size = grid.size();
  const auto& t = grid.points();
  if (kind_ == KernelKind::custom) {
    if (custom_.rows() != size) throw InvalidArgument("custom kernel does not match the grid size");
    return custom_;
  }
  Eigen::MatrixXd k(size, size);
  for (Eigen::Index j = 0; j < size; ++j) {
    for (Eigen::Index i = 0; i < size; ++i) {
      switch (kind_) {
        case KernelKind::brownian:
        case KernelKind::min_kernel:
          k(i, j) = std::min(t[i], t[j]);
          break;
        case KernelKind::fractional_brownian: {
          const double h2 = 2.0 * hurst_;
          k(i, j) = 0.5 * (std::pow(std::abs(t[i]), h2) + std::pow(std::abs(t[j]), h2) -
                           std::pow(std::abs(t[i] - t[j]), h2));
          break;
        }
        case KernelKind::gaussian:
          k(i, j) = std::exp(-(t[i] - t[j]) * (t[i] - t[j]));
          break;
        case KernelKind::custom:
          break;
      }
    }
  }
  return k;
}

std::string KernelSpec::name() const {
  switch (kind_) {
    case KernelKind::brownian: return "brownian";
    case KernelKind::fractional_brownian: return "fractional-brownian(H=" + std::to_string(hurst_) + ")";
    case KernelKind::min_kernel: return "min-kernel";
    case KernelKind::gaussian: return "gaussian-kernel";
    case KernelKind::custom: return "custom";
  }
  return "custom";
}

CoefficientLaw CoefficientLaw::student_t(int dof) {
  if (dof < 3) throw InvalidArgument("Student-t coefficients need at least 3 degrees of freedom");
  return CoefficientLaw(Kind::student_t, dof);
}

std::string CoefficientLaw::name() const {
  return kind_ == Kind::gaussian ? "gaussian" : "student-t(" + std::to_string(dof_) + ")";
}

std::string ProcessSpec::name() const { return kernel.name() + "/" + law.name(); }

ProcessSpec make_process(KernelSpec kernel, CoefficientLaw law, GridPtr grid, Eigen::Index truncation) {
  const Eigen::Index size = grid->size();
  if (truncation == 0) {
    truncation = kernel.kind() == KernelKind::brownian ? std::min<Eigen::Index>(100, size - 1) : size;
  }
  if (truncation < 1) throw InvalidArgument("truncation must be at least 1");
  return ProcessSpec{std::move(kernel), law, Curve::zero(std::move(grid)), truncation};
}

std::pair<double, Curve> bm_eigenpair(int k, const GridPtr& grid) {
  if (k < 1) throw InvalidArgument("eigenpair index starts at 1");
  if (grid->lower() < -1e-12 || grid->upper() > 1.0 + 1e-12) {
    throw InvalidArgument("Brownian eigenpairs need a grid on [0, 1]");
  }
  const double frequency = (k - 0.5) * std::numbers::pi;
  Eigen::VectorXd values = (frequency * grid->points().array()).sin() * std::numbers::sqrt2;
  return {1.0 / frequency, Curve(grid, std::move(values))};
}

BasisPtr kernel_eigen(const KernelSpec& kernel, const GridPtr& grid, Eigen::Index d) {
  const Eigen::Index size = grid->size();
  if (d < 1 || d > size) throw InvalidArgument("requested eigenpairs must be in [1, D]");
  const Eigen::VectorXd root = grid->weights().cwiseSqrt();
  const Eigen::MatrixXd weighted = root.asDiagonal() * kernel.matrix(*grid) * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weighted);
  if (solver.info() != Eigen::Success) throw NumericalPsd("kernel eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values[0] < -1e-10) {
    throw NumericalPsd("kernel has eigenvalue " + std::to_string(values[0]) + " below -1e-10");
  }
  Eigen::VectorXd eigenvalues(d);
  Eigen::MatrixXd functions(size, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    eigenvalues[k] = std::max(0.0, values[size - 1 - k]);
    functions.col(k) = solver.eigenvectors().col(size - 1 - k).cwiseQuotient(root);
  }
  return std::make_shared<const Basis>(grid, std::move(functions), std::move(eigenvalues));
}

KarhunenLoeve karhunen_loeve(const ProcessSpec& spec) {
  const GridPtr& grid = spec.grid();
  const Eigen::Index size = grid->size();
  if (spec.truncation < 1 || spec.truncation > size) {
    throw InvalidArgument("truncation " + std::to_string(spec.truncation) + " exceeds the " +
                          std::to_string(size) + " available eigenpairs");
  }
  if (spec.kernel.kind() == KernelKind::brownian) {
    Eigen::MatrixXd functions(size, spec.truncation);
    Eigen::VectorXd scales(spec.truncation);
    for (Eigen::Index k = 0; k < spec.truncation; ++k) {
      auto [lambda, phi] = bm_eigenpair(static_cast<int>(k + 1), grid);
      scales[k] = lambda;
      functions.col(k) = phi.values();
    }
    Eigen::VectorXd eigenvalues = scales.array().square();
    BasisPtr basis;
    try {
      basis = std::make_shared<const Basis>(grid, functions, eigenvalues);
    } catch (const InvalidArgument&) {
      // Non-trapezoid grids: closed-form sines are only approximately orthonormal.
      basis = orthonormalize(grid, std::move(functions), std::optional<Eigen::VectorXd>(eigenvalues));
    }
    return {std::move(basis), std::move(scales)};
  }
  BasisPtr basis = kernel_eigen(spec.kernel, grid, spec.truncation);
  Eigen::VectorXd scales = basis->eigenvalues()->cwiseSqrt();
  return {std::move(basis), std::move(scales)};
}

void draw_scores(const Eigen::VectorXd& scales, const CoefficientLaw& law, Philox4x32& engine,
                 Eigen::Ref<Eigen::VectorXd> out) {
  double mix = 1.0;
  if (law.kind() == CoefficientLaw::Kind::student_t) {
    boost::random::chi_squared_distribution<double> chi_square(law.dof());
    mix = 1.0 / std::sqrt(chi_square(engine) / law.dof());
  }
  boost::random::normal_distribution<double> normal;
  for (Eigen::Index k = 0; k < scales.size(); ++k) out[k] = scales[k] * normal(engine) * mix;
}

FunctionalSample sample_process(const ProcessSpec& spec, Eigen::Index n, std::uint64_t seed) {
  return sample_process(spec, karhunen_loeve(spec), n, seed);
}

FunctionalSample sample_process(const ProcessSpec& spec, const KarhunenLoeve& expansion, Eigen::Index n,
                                std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be at least 1");
  require_same_grid(spec.grid(), expansion.basis->grid());
  const Eigen::Index terms = expansion.scales.size();
  Eigen::MatrixXd scores(terms, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Philox4x32 engine(seed, stream_id(StreamTag::paths, i));
    draw_scores(expansion.scales, spec.law, engine, scores.col(static_cast<Eigen::Index>(i)));
  });
  Eigen::MatrixXd values = expansion.basis->functions() * scores;
  values.colwise() += spec.mean.values();
  return FunctionalSample(spec.grid(), std::move(values));
}

GridPtr draw_measure_grid(Eigen::Index size, double variance, std::uint64_t seed) {
  if (!(variance > 0)) throw InvalidArgument("measure variance must be positive");
  Philox4x32 engine(seed, stream_id(StreamTag::grid, 0));
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Eigen::VectorXd points(size);
  for (Eigen::Index i = 0; i < size; ++i) points[i] = normal(engine);
  return make_measure_grid(points);
}

}  // namespace fsq
