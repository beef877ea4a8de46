#include "fsq/depth.hpp"

#include <sstream>

#include "fsq/parallel.hpp"

namespace fsq {

std::vector<double> depth_profile(const FunctionalSample& sample, const FunctionalSample& queries) {
  require_same_grid(sample.grid(), queries.grid());
  std::vector<double> depths(static_cast<std::size_t>(queries.size()));
  parallel_for(depths.size(), [&](std::size_t i) {
    depths[i] = spatial_depth(queries.curve(static_cast<Eigen::Index>(i)), sample);
  });
  return depths;
}

DDPlotData dd_plot(const FunctionalSample& sample1, const FunctionalSample& sample2) {
  require_same_grid(sample1.grid(), sample2.grid());
  const std::vector<double> first_in_1 = depth_profile(sample1, sample1);
  const std::vector<double> first_in_2 = depth_profile(sample2, sample1);
  const std::vector<double> second_in_1 = depth_profile(sample1, sample2);
  const std::vector<double> second_in_2 = depth_profile(sample2, sample2);
  DDPlotData data{{}, sample1.size(), sample2.size(), sample1.grid_size(), true};
  data.points.reserve(first_in_1.size() + second_in_1.size());
  for (std::size_t i = 0; i < first_in_1.size(); ++i) {
    data.points.push_back({first_in_1[i], first_in_2[i], DDSource::sample1});
  }
  for (std::size_t i = 0; i < second_in_1.size(); ++i) {
    data.points.push_back({second_in_1[i], second_in_2[i], DDSource::sample2});
  }
  return data;
}

std::string render_dd_plot_svg(const DDPlotData& data) {
  constexpr double size = 400.0;
  constexpr double margin = 40.0;
  constexpr double span = size - 2 * margin;
  auto px = [&](double depth) { return margin + depth * span; };
  auto py = [&](double depth) { return size - margin - depth * span; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << span << "\" height=\"" << span
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (const DDPoint& point : data.points) {
    const double x = px(point.depth_in_sample1);
    const double y = py(point.depth_in_sample2);
    if (point.source == DDSource::sample1) {
      svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"none\" stroke=\"steelblue\"/>\n";
    } else {
      svg << "<path d=\"M" << x - 3 << ' ' << y - 3 << " L" << x + 3 << ' ' << y + 3 << " M" << x - 3 << ' '
          << y + 3 << " L" << x + 3 << ' ' << y - 3 << "\" stroke=\"firebrick\"/>\n";
    }
  }
  svg << "<text x=\"" << size / 2 << "\" y=\"" << size - 8 << "\" text-anchor=\"middle\">depth w.r.t. sample 1</text>\n";
  svg << "<text x=\"12\" y=\"" << size / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 " << size / 2
      << ")\">depth w.r.t. sample 2</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fsq
