#pragma once

// Asymptotic relative efficiency of the spatial median against the sample
// mean, trace(Sigma) / trace(V_0), with V_0 = J^-1 Lambda J^-1 estimated by
// Monte Carlo on a D-point discretization:
//   J      = E{(I - v v^T) / ||X - m||},   Lambda = E{v v^T},
//   v      = (m - X) / ||m - X||.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsq/simulate.hpp"

namespace fsq {

enum class TraceMethod { closed_form, monte_carlo };

/// Coordinate system used for the D x D accumulators. Traces do not depend
/// on it; the choice exists so that invariance can be checked.
enum class Coordinates { karhunen_loeve, grid };

/// trace(Sigma) on the grid: Var(Y) * sum_i w_i K(t_i, t_i) in closed form,
/// or the Monte Carlo mean of ||X - m||^2.
double sigma_trace(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed,
                   TraceMethod method = TraceMethod::closed_form);

struct V0Estimate {
  double trace;
  double standard_error;  // from 16 batch replicates
  double jacobian_condition;
  int floor_activations;
  std::size_t mc;
};

/// J and Lambda are accumulated from independent streams of `mc` draws each,
/// split into a fixed number of chunks so results do not depend on threads.
V0Estimate v0_estimate(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed,
                       Coordinates coordinates = Coordinates::karhunen_loeve);

struct EfficiencyReport {
  double trace_sigma;
  double trace_v0;
  double are;
  double are_standard_error;
  std::string process;
  std::string kernel;
  std::string law;
  std::string grid_kind;
  std::string quadrature;
  std::string generator;
  std::string sigma_method;
  Eigen::Index grid_size;
  std::size_t mc;
  std::uint64_t seed;
  double jacobian_condition;
  int floor_activations;
};

EfficiencyReport are(const ProcessSpec& spec, std::size_t mc, std::uint64_t seed,
                     TraceMethod sigma_method = TraceMethod::closed_form);

/// Process families of the efficiency study. `parameter` is the Hurst index
/// (fbm) or the degrees of freedom (t, gauss-kernel-t); ignored otherwise.
/// [0,1] processes use an equispaced trapezoid grid; the Gaussian-kernel
/// processes live on D points drawn from N(0, 1/2) with weights 1/D.
enum class StudyProcess { brownian, fbm, t, gauss_kernel, gauss_kernel_t };

ProcessSpec study_process(StudyProcess process, double parameter, Eigen::Index grid_size, std::uint64_t grid_seed);

struct EfficiencyRow {
  std::string label;
  StudyProcess process;
  double parameter;
  std::optional<double> expected;
  double tolerance;
  EfficiencyReport report;

  bool within_tolerance() const { return !expected || std::abs(report.are - *expected) <= tolerance; }
};

/// The full sweep: Brownian motion, fBM for H = 0.1..0.9, t(3) and t(9) on
/// [0,1], and the Gaussian-kernel Gaussian/t(3)/t(9) processes on R.
std::vector<EfficiencyRow> efficiency_table(std::size_t mc, std::uint64_t seed, Eigen::Index grid_size = 200);

}  // namespace fsq
