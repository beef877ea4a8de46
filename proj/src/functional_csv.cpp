#include "fsq/functional_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace fsq {

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

std::vector<double> parse_row(const std::string& line, std::size_t line_number) {
  std::vector<double> values;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::string cell = trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    double value = 0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw ParseError("cell " + std::to_string(values.size() + 1) + " is not a finite number: '" + cell + "'",
                       line_number);
    }
    values.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

bool equispaced(const Eigen::VectorXd& points) {
  if (points.size() < 2) return false;
  const double step = (points[points.size() - 1] - points[0]) / static_cast<double>(points.size() - 1);
  for (Eigen::Index i = 1; i < points.size(); ++i) {
    if (std::abs(points[i] - points[i - 1] - step) > 1e-9 * std::max(1.0, std::abs(step))) return false;
  }
  return true;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

CsvDocument read_functional_csv(std::istream& in) {
  CsvMetadata metadata;
  std::optional<GridKind> kind;
  bool has_weights = false;
  std::vector<double> points;
  std::vector<double> weights;
  std::vector<std::vector<double>> curves;
  std::size_t points_line = 0;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string body = trim(text.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(body.substr(0, colon));
      const std::string value = trim(body.substr(colon + 1));
      if (key == "kind") {
        if (value == "uniform-interval") kind = GridKind::uniform_interval;
        else if (value == "gaussian-measure") kind = GridKind::gaussian_measure;
        else if (value == "custom") kind = GridKind::custom;
        else throw ParseError("unknown grid kind '" + value + "'", line_number);
      } else if (key == "weights") {
        has_weights = value == "present";
      } else {
        metadata.emplace_back(key, value);
      }
      continue;
    }
    std::vector<double> row = parse_row(text, line_number);
    if (points.empty()) {
      for (std::size_t i = 1; i < row.size(); ++i) {
        if (!(row[i] > row[i - 1])) throw ParseError("grid points must be strictly increasing", line_number);
      }
      points = std::move(row);
      points_line = line_number;
      continue;
    }
    if (row.size() != points.size()) {
      throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(points.size()),
                       line_number);
    }
    if (has_weights && weights.empty()) {
      for (double w : row) {
        if (!(w > 0)) throw ParseError("weights must be positive", line_number);
      }
      weights = std::move(row);
    } else {
      curves.push_back(std::move(row));
    }
  }
  if (points.empty()) throw ParseError("missing grid row", line_number);
  if (curves.empty()) throw ParseError("no curves after the grid row", line_number);

  const Eigen::VectorXd grid_points = to_vector(points);
  if (!kind) kind = equispaced(grid_points) ? GridKind::uniform_interval : GridKind::custom;
  if (*kind == GridKind::uniform_interval && !equispaced(grid_points)) {
    throw ParseError("uniform-interval grid points are not equispaced", points_line);
  }
  Eigen::VectorXd grid_weights;
  if (!weights.empty()) {
    grid_weights = to_vector(weights);
  } else if (*kind == GridKind::gaussian_measure) {
    grid_weights = Eigen::VectorXd::Constant(grid_points.size(), 1.0 / static_cast<double>(grid_points.size()));
  } else {
    grid_weights = trapezoid_weights<double>(grid_points);
  }
  GridPtr grid;
  try {
    grid = std::make_shared<const Grid>(grid_points, grid_weights, *kind);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), points_line);
  }
  Eigen::MatrixXd values(grid->size(), static_cast<Eigen::Index>(curves.size()));
  for (std::size_t j = 0; j < curves.size(); ++j) values.col(static_cast<Eigen::Index>(j)) = to_vector(curves[j]);
  return CsvDocument{FunctionalSample(std::move(grid), std::move(values)), std::move(metadata)};
}

CsvDocument read_functional_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return read_functional_csv(in);
}

void write_functional_csv(std::ostream& out, const FunctionalSample& sample, const CsvMetadata& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  out << "# kind: " << to_string(sample.grid()->kind()) << '\n';
  out << "# weights: present\n";
  auto write_row = [&](const auto& row) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  };
  write_row(sample.grid()->points());
  write_row(sample.grid()->weights());
  for (Eigen::Index j = 0; j < sample.size(); ++j) write_row(sample.values().col(j));
}

void write_functional_csv(const std::filesystem::path& path, const FunctionalSample& sample,
                          const CsvMetadata& metadata) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  write_functional_csv(out, sample, metadata);
}

}  // namespace fsq
