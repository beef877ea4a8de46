#include "fsq/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "fsq/parallel.hpp"

namespace fsq {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr Index kReferenceBlock = 8192;

std::vector<double> to_double(const std::vector<Index>& values) {
  return std::vector<double>(values.begin(), values.end());
}

struct ErrorPair {
  double sup;
  double integrated;
};

ErrorPair errors_against(const VectorXd& weights, const MatrixXd& estimate, const MatrixXd& reference) {
  const VectorXd squared = (weights.asDiagonal() * (estimate - reference).cwiseAbs2()).colwise().sum().transpose();
  return {std::sqrt(squared.maxCoeff()), squared.mean()};
}

RateReport run_rate_study(std::string study, const ProcessSpec& spec, const FunctionalSample& points,
                          const std::vector<Index>& n_values, Index reps, std::uint64_t seed, std::size_t n_ref) {
  if (reps < 1) throw InvalidArgument("need at least one replication");
  if (n_values.empty() || !std::is_sorted(n_values.begin(), n_values.end()) || n_values.front() < 1) {
    throw InvalidArgument("n values must be positive and increasing");
  }
  const std::vector<ReferenceValue> truth = reference_spatial_dist(spec, points, n_ref, derive_seed(seed, 1));
  MatrixXd reference(points.grid_size(), points.size());
  for (std::size_t j = 0; j < truth.size(); ++j) reference.col(static_cast<Index>(j)) = truth[j].value.values();

  const KarhunenLoeve expansion = karhunen_loeve(spec);
  const VectorXd& weights = spec.grid()->weights();
  const std::size_t cells = n_values.size() * static_cast<std::size_t>(reps);
  std::vector<ErrorPair> results(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t which = cell / static_cast<std::size_t>(reps);
    const std::size_t rep = cell % static_cast<std::size_t>(reps);
    const FunctionalSample sample =
        sample_process(spec, expansion, n_values[which], derive_seed(derive_seed(seed, 2 + which), rep));
    results[cell] = errors_against(weights, batch_spatial_dist(weights, points.values(), sample.values()), reference);
  });

  RateReport report;
  report.study = std::move(study);
  report.process = spec.name();
  report.n_values = n_values;
  report.replications = reps;
  report.point_count = points.size();
  report.n_ref = n_ref;
  report.seed = seed;
  for (std::size_t which = 0; which < n_values.size(); ++which) {
    std::vector<double> sup;
    std::vector<double> integrated;
    for (Index rep = 0; rep < reps; ++rep) {
      const ErrorPair& e = results[which * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      sup.push_back(e.sup);
      integrated.push_back(e.integrated);
    }
    report.sup_errors.push_back(median(sup));
    report.integrated_errors.push_back(median(integrated));
    report.sup_raw.push_back(std::move(sup));
    report.integrated_raw.push_back(std::move(integrated));
  }
  const std::vector<double> ns = to_double(n_values);
  report.fitted_slope_sup = loglog_slope(ns, report.sup_errors);
  report.fitted_slope_int = loglog_slope(ns, report.integrated_errors);
  return report;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs two or more points");
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidArgument("log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

MatrixXd batch_spatial_dist(const VectorXd& weights, const MatrixXd& points, const MatrixXd& data) {
  const Index n = data.cols();
  if (n < 1) throw InvalidArgument("spatial distribution of an empty sample");
  MatrixXd total = MatrixXd::Zero(points.rows(), points.cols());
  const VectorXd point_norms2 = (weights.asDiagonal() * points.cwiseAbs2()).colwise().sum().transpose();
  for (Index start = 0; start < n; start += kReferenceBlock) {
    const Index width = std::min(kReferenceBlock, n - start);
    const auto block = data.middleCols(start, width);
    const VectorXd data_norms2 = (weights.asDiagonal() * block.cwiseAbs2()).colwise().sum().transpose();
    // ||x - X_i||^2 = ||x||^2 + ||X_i||^2 - 2 <x, X_i>
    MatrixXd inverse = -2.0 * (block.transpose() * weights.asDiagonal() * points);
    inverse.colwise() += data_norms2;
    inverse.rowwise() += point_norms2.transpose();
    for (Index p = 0; p < points.cols(); ++p) {
      for (Index i = 0; i < width; ++i) {
        double squared = inverse(i, p);
        const double scale2 = std::max(point_norms2[p], data_norms2[i]);
        if (squared <= 1e-8 * scale2) {
          // Cancellation-prone; recompute directly.
          const VectorXd diff = points.col(p) - block.col(i);
          squared = weights.dot(diff.cwiseAbs2());
        }
        const double length = std::sqrt(std::max(squared, 0.0));
        inverse(i, p) = is_effectively_zero(length, std::sqrt(scale2)) ? 0.0 : 1.0 / length;
      }
    }
    // sum_i (x - X_i)/r_i = x * sum_i 1/r_i - sum_i X_i / r_i
    total += points * inverse.colwise().sum().asDiagonal();
    total -= block * inverse;
  }
  return total / static_cast<double>(n);
}

std::vector<ReferenceValue> reference_spatial_dist(const ProcessSpec& spec, const FunctionalSample& points,
                                                   std::size_t n_ref, std::uint64_t seed) {
  require_same_grid(spec.grid(), points.grid());
  if (n_ref < 1) throw InvalidArgument("reference size must be positive");
  const FunctionalSample reference = sample_process(spec, static_cast<Index>(n_ref), seed);
  const VectorXd& weights = spec.grid()->weights();
  const MatrixXd values = batch_spatial_dist(weights, points.values(), reference.values());
  std::vector<ReferenceValue> out;
  out.reserve(static_cast<std::size_t>(points.size()));
  for (Index j = 0; j < points.size(); ++j) {
    Curve value(spec.grid(), values.col(j));
    const double length = norm(value);
    const double spread = std::max(0.0, 1.0 - length * length);
    out.push_back({std::move(value), length, std::sqrt(spread / static_cast<double>(n_ref)), n_ref});
  }
  return out;
}

ReferenceValue reference_spatial_dist(const ProcessSpec& spec, const Curve& x, std::size_t n_ref, std::uint64_t seed) {
  FunctionalSample single(x.grid(), x.values());
  return reference_spatial_dist(spec, single, n_ref, seed).front();
}

RateReport gc_rate_study(const ProcessSpec& spec, const FunctionalSample& probes, const std::vector<Index>& n_values,
                         Index reps, std::uint64_t seed, std::size_t n_ref) {
  require_same_grid(spec.grid(), probes.grid());
  RateReport report = run_rate_study("gc", spec, probes, n_values, reps, seed, n_ref);
  report.note =
      "sup taken over a finite probe set standing in for a compact set; the finite-max versus true-sup gap is not "
      "estimated";
  return report;
}

RateReport integrated_error_study(const ProcessSpec& spec, const std::vector<Index>& n_values, Index reps,
                                  std::uint64_t seed, Index draws, std::size_t n_ref) {
  if (draws < 1) throw InvalidArgument("need at least one integration draw");
  const FunctionalSample points = sample_process(spec, draws, derive_seed(seed, 0));
  RateReport report = run_rate_study("integrated", spec, points, n_values, reps, seed, n_ref);
  report.note = "integral over mu replaced by the average over " + std::to_string(draws) + " fixed draws from mu";
  return report;
}

FunctionalSample default_probes(const ProcessSpec& spec, Index count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("need at least one probe");
  MatrixXd values(spec.grid()->size(), count);
  values.col(0) = spec.mean.values();
  if (count > 1) {
    values.rightCols(count - 1) = sample_process(spec, count - 1, derive_seed(seed, 0x9b0be5)).values();
  }
  return FunctionalSample(spec.grid(), std::move(values));
}

BahadurStudy bahadur_study(const ProcessSpec& spec, const std::vector<Index>& n_values, Index reps, Index d,
                           std::uint64_t seed, std::size_t n_ref, double u_scale) {
  if (reps < 1) throw InvalidArgument("need at least one replication");
  const KarhunenLoeve expansion = karhunen_loeve(spec);
  if (d < 1 || d > expansion.basis->size()) throw InvalidArgument("d exceeds the available eigenfunctions");
  const Eigen::VectorXd u = DirectionU::along(1, u_scale, d).coefficients();

  const FunctionalSample reference = sample_process(spec, expansion, static_cast<Index>(n_ref), derive_seed(seed, 1));
  const BahadurReference population = bahadur_reference(project_sample(reference, expansion.basis, d), u);

  const std::size_t cells = n_values.size() * static_cast<std::size_t>(reps);
  std::vector<BahadurReport> results(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t which = cell / static_cast<std::size_t>(reps);
    const std::size_t rep = cell % static_cast<std::size_t>(reps);
    const FunctionalSample sample =
        sample_process(spec, expansion, n_values[which], derive_seed(derive_seed(seed, 2 + which), rep));
    results[cell] = bahadur_residual(project_sample(sample, expansion.basis, d), population);
  });

  BahadurStudy study;
  study.process = spec.name();
  study.n_values = n_values;
  study.replications = reps;
  study.d = d;
  study.n_ref = n_ref;
  study.u_scale = u_scale;
  study.seed = seed;
  for (std::size_t which = 0; which < n_values.size(); ++which) {
    std::vector<double> residual;
    std::vector<double> linear;
    for (Index rep = 0; rep < reps; ++rep) {
      const BahadurReport& r = results[which * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      residual.push_back(r.residual_norm);
      linear.push_back(r.linear_term_norm);
    }
    study.residual_medians.push_back(median(residual));
    study.linear_medians.push_back(median(linear));
    study.residual_raw.push_back(std::move(residual));
    study.linear_raw.push_back(std::move(linear));
  }
  const std::vector<double> ns = to_double(n_values);
  study.slope_residual = loglog_slope(ns, study.residual_medians);
  study.slope_linear = loglog_slope(ns, study.linear_medians);
  return study;
}

}  // namespace fsq
