#pragma once

// Spatial depth SD(x) = 1 - ||S_x|| against an empirical distribution, batch
// evaluation and DD-plot data for comparing two samples.

#include <string>
#include <vector>

#include "fsq/funcspace.hpp"
#include "fsq/spatialdist.hpp"

namespace fsq {

template <typename Scalar>
Scalar spatial_depth(const BasicCurve<Scalar>& x, const BasicFunctionalSample<Scalar>& sample) {
  const Scalar value = Scalar(1) - empirical_spatial_dist(x, sample).norm;
  return std::clamp(value, Scalar(0), Scalar(1));
}

/// Depth of every query curve (in order) with respect to the sample.
std::vector<double> depth_profile(const FunctionalSample& sample, const FunctionalSample& queries);

enum class DDSource { sample1, sample2 };

struct DDPoint {
  double depth_in_sample1;
  double depth_in_sample2;
  DDSource source;
};

struct DDPlotData {
  std::vector<DDPoint> points;  // sample1 observations first, then sample2
  Eigen::Index size1;
  Eigen::Index size2;
  Eigen::Index grid_size;
  // Pooled observations are not removed from their own sample's empirical sum.
  bool self_included = true;
};

DDPlotData dd_plot(const FunctionalSample& sample1, const FunctionalSample& sample2);

/// Static SVG scatter with the 45-degree reference line.
std::string render_dd_plot_svg(const DDPlotData& data);

}  // namespace fsq
