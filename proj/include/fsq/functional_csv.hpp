#pragma once

// Functional-data CSV:
//
//   # kind: uniform-interval | gaussian-measure | custom   (optional)
//   # weights: present                                     (optional)
//   # <key>: <value>                                       (free metadata)
//   t_1,...,t_D          grid points, strictly increasing
//   w_1,...,w_D          quadrature weights, only with "# weights: present"
//   x_1(t_1),...         one curve per row
//
// Without explicit weights they follow from the kind: trapezoid for
// uniform-interval and custom grids, 1/D for gaussian-measure. Without a
// kind, equispaced points mean uniform-interval and anything else custom.
// Comment lines may appear anywhere; blank lines are ignored.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fsq/funcspace.hpp"

namespace fsq {

using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

struct CsvDocument {
  FunctionalSample sample;
  CsvMetadata metadata;  // free-form comment entries, in order
};

CsvDocument read_functional_csv(std::istream& in);
CsvDocument read_functional_csv(const std::filesystem::path& path);

/// Writes the grid kind and weights explicitly, so reading back is bit-exact.
void write_functional_csv(std::ostream& out, const FunctionalSample& sample, const CsvMetadata& metadata = {});
void write_functional_csv(const std::filesystem::path& path, const FunctionalSample& sample,
                          const CsvMetadata& metadata = {});

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace fsq
