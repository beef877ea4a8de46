#pragma once

// Monte Carlo rate checks for the empirical spatial distribution and the
// Bahadur linearization of sample quantiles. Population quantities are
// replaced by large reference samples.

#include <cstdint>
#include <string>
#include <vector>

#include "fsq/quantile.hpp"
#include "fsq/simulate.hpp"
#include "fsq/spatialdist.hpp"

namespace fsq {

struct ReferenceValue {
  Curve value;
  double norm;
  double mc_error;  // sqrt((1 - ||S||^2) / n_ref), the root mean squared error of the mean of signs
  std::size_t n_ref;
};

/// Spatial distribution of `spec` at x from a reference sample of n_ref paths.
ReferenceValue reference_spatial_dist(const ProcessSpec& spec, const Curve& x, std::size_t n_ref, std::uint64_t seed);

/// Same for every curve in `points`, sharing one reference sample.
std::vector<ReferenceValue> reference_spatial_dist(const ProcessSpec& spec, const FunctionalSample& points,
                                                   std::size_t n_ref, std::uint64_t seed);

/// Empirical spatial distribution of `data` at each column of `points`,
/// both D x (count) value matrices on a grid with `weights`.
Eigen::MatrixXd batch_spatial_dist(const Eigen::VectorXd& weights, const Eigen::MatrixXd& points,
                                   const Eigen::MatrixXd& data);

struct RateReport {
  std::string study;
  std::string process;
  std::vector<Eigen::Index> n_values;
  std::vector<double> sup_errors;         // median over replications of max_x ||S^_x - S_x||
  std::vector<double> integrated_errors;  // median of the mean over points of ||S^_x - S_x||^2
  std::vector<std::vector<double>> sup_raw;  // [n index][replication]
  std::vector<std::vector<double>> integrated_raw;
  double fitted_slope_sup;
  double fitted_slope_int;
  Eigen::Index replications;
  Eigen::Index point_count;
  std::size_t n_ref;
  std::uint64_t seed;
  std::string note;
};

/// Uniform (over a finite probe set) convergence rate of S^_x.
RateReport gc_rate_study(const ProcessSpec& spec, const FunctionalSample& probes,
                         const std::vector<Eigen::Index>& n_values, Eigen::Index reps, std::uint64_t seed,
                         std::size_t n_ref = 100000);

/// Rate of the mu-integrated squared error, with the integral replaced by an
/// average over `draws` fixed points drawn from mu.
RateReport integrated_error_study(const ProcessSpec& spec, const std::vector<Eigen::Index>& n_values,
                                  Eigen::Index reps, std::uint64_t seed, Eigen::Index draws = 200,
                                  std::size_t n_ref = 100000);

struct BahadurStudy {
  std::string process;
  std::vector<Eigen::Index> n_values;
  std::vector<double> residual_medians;
  std::vector<double> linear_medians;
  std::vector<std::vector<double>> residual_raw;
  std::vector<std::vector<double>> linear_raw;
  double slope_residual;
  double slope_linear;
  Eigen::Index replications;
  Eigen::Index d;
  std::size_t n_ref;
  double u_scale;
  std::uint64_t seed;
};

/// Bahadur residual norms over replications at u = u_scale * phi_1 in the
/// first d KL eigenfunctions of the process.
BahadurStudy bahadur_study(const ProcessSpec& spec, const std::vector<Eigen::Index>& n_values, Eigen::Index reps,
                           Eigen::Index d, std::uint64_t seed, std::size_t n_ref = 100000, double u_scale = 0.5);

/// Probe set for uniform-error studies: the mean curve followed by
/// count - 1 draws from the process.
FunctionalSample default_probes(const ProcessSpec& spec, Eigen::Index count, std::uint64_t seed);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace fsq
