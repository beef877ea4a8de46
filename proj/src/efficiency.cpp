#include "fsq/efficiency.hpp"

#include <array>
#include <cmath>

#include <boost/random/normal_distribution.hpp>

#include "fsq/parallel.hpp"

namespace fsq {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kChunks = 64;
constexpr std::size_t kBatches = 16;  // kChunks must be a multiple
constexpr Index kBlock = 2048;

struct Accumulator {
  MatrixXd outer;  // lower triangle only
  double inverse_norm_sum = 0;
  std::size_t count = 0;
};

// Coordinates of X - m in which the grid inner product is Euclidean.
struct Whitening {
  VectorXd scales;    // KL standard deviations
  MatrixXd rotation;  // maps KL scores to whitened grid coordinates (grid mode only)
};

Whitening whitening(const ProcessSpec& spec, Coordinates coordinates) {
  const GridPtr& grid = spec.grid();
  const BasisPtr basis = kernel_eigen(spec.kernel, grid, grid->size());
  Whitening out{basis->eigenvalues()->cwiseSqrt(), MatrixXd()};
  if (coordinates == Coordinates::grid) {
    out.rotation = grid->weights().cwiseSqrt().asDiagonal() * basis->functions();
  }
  return out;
}

std::size_t chunk_size(std::size_t mc, std::size_t chunk) {
  return mc / kChunks + (chunk < mc % kChunks ? 1 : 0);
}

// Fills `block` with whitened draws of X - m.
void draw_block(const Whitening& white, const CoefficientLaw& law, Philox4x32& engine, MatrixXd& block) {
  if (white.rotation.size() == 0) {
    for (Index j = 0; j < block.cols(); ++j) draw_scores(white.scales, law, engine, block.col(j));
    return;
  }
  MatrixXd scores(white.scales.size(), block.cols());
  for (Index j = 0; j < block.cols(); ++j) draw_scores(white.scales, law, engine, scores.col(j));
  block.noalias() = white.rotation * scores;
}

// J accumulates sum 1/r and sum v v^T / r; Lambda accumulates sum v v^T.
Accumulator accumulate(const Whitening& white, const CoefficientLaw& law, std::uint64_t seed, StreamTag tag,
                       std::size_t chunk, std::size_t draws, bool jacobian) {
  const Index dim = white.scales.size();
  Accumulator acc{MatrixXd::Zero(dim, dim), 0.0, draws};
  Philox4x32 engine(seed, stream_id(tag, chunk));
  MatrixXd block;
  for (std::size_t done = 0; done < draws;) {
    const Index width = static_cast<Index>(std::min<std::size_t>(kBlock, draws - done));
    block.resize(dim, width);
    draw_block(white, law, engine, block);
    VectorXd lengths = block.colwise().norm().transpose();
    VectorXd factor(width);
    for (Index j = 0; j < width; ++j) {
      if (lengths[j] > 0) {
        factor[j] = jacobian ? std::pow(lengths[j], -1.5) : 1.0 / lengths[j];
        if (jacobian) acc.inverse_norm_sum += 1.0 / lengths[j];
      } else {
        factor[j] = 0;
      }
    }
    block = block * factor.asDiagonal();
    acc.outer.selfadjointView<Eigen::Lower>().rankUpdate(block);
    done += static_cast<std::size_t>(width);
  }
  return acc;
}

struct SandwichTrace {
  double trace;
  double condition;
  int floor_activations;
};

SandwichTrace sandwich_trace(const Accumulator& jacobian, const Accumulator& scores) {
  const Index dim = jacobian.outer.rows();
  const double nj = static_cast<double>(jacobian.count);
  MatrixXd j = MatrixXd::Identity(dim, dim) * (jacobian.inverse_norm_sum / nj);
  j -= MatrixXd(jacobian.outer.selfadjointView<Eigen::Lower>()) / nj;
  const MatrixXd lambda = MatrixXd(scores.outer.selfadjointView<Eigen::Lower>()) / static_cast<double>(scores.count);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(j);
  VectorXd mu = eigen.eigenvalues();
  const double top = mu[dim - 1];
  const double condition = mu[0] > 0 ? top / mu[0] : INFINITY;
  if (!(condition <= 1e12)) {
    throw ConditioningError("J is ill-conditioned (condition " + std::to_string(condition) +
                                "); increase mc or regularize the discretization",
                            condition);
  }
  int floors = 0;
  for (Index k = 0; k < dim; ++k) {
    if (mu[k] < 1e-10 * top) {
      mu[k] = 1e-10 * top;
      ++floors;
    }
  }
  const MatrixXd& u = eigen.eigenvectors();
  // trace(J^-1 Lambda J^-1) in the eigenbasis of J.
  const MatrixXd rotated = u.transpose() * lambda * u;
  double trace = 0;
  for (Index k = 0; k < dim; ++k) trace += rotated(k, k) / (mu[k] * mu[k]);
  return {trace, condition, floors};
}

Accumulator merge(const std::vector<Accumulator>& parts, std::size_t first, std::size_t last) {
  Accumulator total{MatrixXd::Zero(parts[first].outer.rows(), parts[first].outer.cols()), 0.0, 0};
  for (std::size_t i = first; i < last; ++i) {
    total.outer += parts[i].outer;
    total.inverse_norm_sum += parts[i].inverse_norm_sum;
    total.count += parts[i].count;
  }
  return total;
}

}  // namespace

double sigma_trace(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed, TraceMethod method) {
  const GridPtr& grid = spec.grid();
  if (method == TraceMethod::closed_form) {
    const MatrixXd k = spec.kernel.matrix(*grid);
    return spec.law.variance() * grid->weights().dot(k.diagonal());
  }
  if (mc < 1) throw InvalidArgument("Monte Carlo trace needs mc >= 1");
  const Whitening white = whitening(spec, Coordinates::karhunen_loeve);
  std::vector<double> partial(kChunks, 0.0);
  parallel_for(kChunks, [&](std::size_t chunk) {
    Philox4x32 engine(seed, stream_id(StreamTag::sigma, chunk));
    VectorXd draw(white.scales.size());
    double sum = 0;
    for (std::size_t i = 0; i < chunk_size(mc, chunk); ++i) {
      draw_scores(white.scales, spec.law, engine, draw);
      sum += draw.squaredNorm();
    }
    partial[chunk] = sum;
  });
  double total = 0;
  for (double value : partial) total += value;
  return total / static_cast<double>(mc);
}

V0Estimate v0_estimate(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed, Coordinates coordinates) {
  if (mc < kChunks) throw InvalidArgument("v0_estimate needs mc >= " + std::to_string(kChunks));
  const Whitening white = whitening(spec, coordinates);
  std::vector<Accumulator> jacobian(kChunks);
  std::vector<Accumulator> scores(kChunks);
  parallel_for(2 * kChunks, [&](std::size_t task) {
    const std::size_t chunk = task % kChunks;
    if (task < kChunks) {
      jacobian[chunk] = accumulate(white, spec.law, seed, StreamTag::jacobian, chunk, chunk_size(mc, chunk), true);
    } else {
      scores[chunk] = accumulate(white, spec.law, seed, StreamTag::score_covariance, chunk, chunk_size(mc, chunk), false);
    }
  });
  const SandwichTrace full = sandwich_trace(merge(jacobian, 0, kChunks), merge(scores, 0, kChunks));

  constexpr std::size_t per_batch = kChunks / kBatches;
  std::array<double, kBatches> batch{};
  double mean = 0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    batch[b] = sandwich_trace(merge(jacobian, b * per_batch, (b + 1) * per_batch),
                              merge(scores, b * per_batch, (b + 1) * per_batch))
                   .trace;
    mean += batch[b] / kBatches;
  }
  double variance = 0;
  for (double value : batch) variance += (value - mean) * (value - mean) / (kBatches - 1);
  return {full.trace, std::sqrt(variance / kBatches), full.condition, full.floor_activations, mc};
}

EfficiencyReport are(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed, TraceMethod sigma_method) {
  const double trace_sigma = sigma_trace(spec, mc, seed, sigma_method);
  const V0Estimate v0 = v0_estimate(spec, mc, seed);
  if (!(trace_sigma > 0) || !(v0.trace > 0) || !std::isfinite(trace_sigma) || !std::isfinite(v0.trace)) {
    throw ConditioningError("efficiency traces must be finite and positive", v0.jacobian_condition);
  }
  const double ratio = trace_sigma / v0.trace;
  const GridPtr& grid = spec.grid();
  const std::string quadrature =
      grid->kind() == GridKind::gaussian_measure ? "equal weights 1/D (random points from the measure)"
      : grid->kind() == GridKind::uniform_interval ? "trapezoid on equispaced points"
                                                   : "custom weights";
  return EfficiencyReport{trace_sigma,
                          v0.trace,
                          ratio,
                          ratio * v0.standard_error / v0.trace,
                          spec.name(),
                          spec.kernel.name(),
                          spec.law.name(),
                          to_string(grid->kind()),
                          quadrature,
                          Philox4x32::kName,
                          sigma_method == TraceMethod::closed_form ? "closed-form" : "monte-carlo",
                          grid->size(),
                          mc,
                          seed,
                          v0.jacobian_condition,
                          v0.floor_activations};
}

ProcessSpec study_process(StudyProcess process, double parameter, Index grid_size, std::uint64_t grid_seed) {
  auto dof = [&] {
    if (parameter != std::floor(parameter)) throw InvalidArgument("degrees of freedom must be an integer");
    return static_cast<int>(parameter);
  };
  switch (process) {
    case StudyProcess::brownian:
      return make_process(KernelSpec::min_kernel(), CoefficientLaw::gaussian(), make_uniform_grid(0.0, 1.0, grid_size));
    case StudyProcess::fbm:
      return make_process(KernelSpec::fractional_brownian(parameter), CoefficientLaw::gaussian(),
                          make_uniform_grid(0.0, 1.0, grid_size));
    case StudyProcess::t:
      return make_process(KernelSpec::min_kernel(), CoefficientLaw::student_t(dof()),
                          make_uniform_grid(0.0, 1.0, grid_size));
    case StudyProcess::gauss_kernel:
      return make_process(KernelSpec::gaussian(), CoefficientLaw::gaussian(), draw_measure_grid(grid_size, 0.5, grid_seed));
    case StudyProcess::gauss_kernel_t:
      return make_process(KernelSpec::gaussian(), CoefficientLaw::student_t(dof()),
                          draw_measure_grid(grid_size, 0.5, grid_seed));
  }
  throw InvalidArgument("unknown study process");
}

std::vector<EfficiencyRow> efficiency_table(std::size_t mc, std::uint64_t seed, Index grid_size) {
  struct Cell {
    std::string label;
    StudyProcess process;
    double parameter;
    std::optional<double> expected;
    double tolerance;
  };
  std::vector<Cell> cells{{"brownian", StudyProcess::brownian, 0, 0.83, 0.03}};
  for (int h = 1; h <= 9; ++h) {
    std::optional<double> expected;
    if (h == 1) expected = 0.923;
    if (h == 9) expected = 0.718;
    cells.push_back({"fbm H=0." + std::to_string(h), StudyProcess::fbm, h / 10.0, expected, 0.03});
  }
  cells.push_back({"t(3) min-kernel", StudyProcess::t, 3, 2.135, 0.08});
  cells.push_back({"t(9) min-kernel", StudyProcess::t, 9, 1.006, 0.04});
  cells.push_back({"gaussian-kernel gaussian", StudyProcess::gauss_kernel, 0, 0.834, 0.03});
  cells.push_back({"gaussian-kernel t(3)", StudyProcess::gauss_kernel_t, 3, 2.247, 0.08});
  cells.push_back({"gaussian-kernel t(9)", StudyProcess::gauss_kernel_t, 9, 1.013, 0.04});

  std::vector<EfficiencyRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    // All Gaussian-kernel cells share one random grid drawn from `seed`.
    const ProcessSpec spec = study_process(cell.process, cell.parameter, grid_size, seed);
    rows.push_back({cell.label, cell.process, cell.parameter, cell.expected, cell.tolerance,
                    are(spec, mc, derive_seed(seed, i))});
  }
  return rows;
}

}  // namespace fsq
