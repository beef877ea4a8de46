#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsq/asymptotics.hpp"
#include "fsq/depth.hpp"
#include "fsq/efficiency.hpp"
#include "fsq/errors.hpp"
#include "fsq/functional_csv.hpp"
#include "fsq/parallel.hpp"
#include "fsq/quantile.hpp"
#include "fsq/report_json.hpp"
#include "fsq/simulate.hpp"
#include "fsq/version.hpp"

namespace fsq::cli {
namespace {

using Eigen::Index;

// JSON config: top-level keys are global options, nested objects are
// subcommand sections. Values already given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json document;
    try {
      document = Json::parse(input);
    } catch (const Json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!document.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(document, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_number()) return value.dump();
    throw CLI::ConversionError("unsupported config value: " + value.dump());
  }

  static void collect(const Json& object, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : object.items()) {
      if (value.is_null()) continue;
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& element : value) item.inputs.push_back(scalar(element));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

const auto open_unit_interval = CLI::Validator(
    [](std::string& input) -> std::string {
      double value = 0;
      const auto [ptr, ec] = std::from_chars(input.data(), input.data() + input.size(), value);
      if (ec != std::errc() || ptr != input.data() + input.size() || !(value > 0 && value < 1)) {
        return "value must lie in (0, 1)";
      }
      return {};
    },
    "(0,1)");

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("io", "cannot open output file " + path);
  file << content;
  if (!file) throw Error("io", "failed writing " + path);
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

CsvMetadata provenance(std::optional<std::uint64_t> seed, const std::string& command) {
  CsvMetadata meta{{"generator-version", kVersion}, {"command", command}};
  if (seed) meta.emplace_back("seed", std::to_string(*seed));
  return meta;
}

struct ProcessOptions {
  std::string process = "bm";
  std::optional<double> hurst;
  std::optional<int> df;
  Index grid_size = 100;
  Index truncation = 0;

  void attach(CLI::App& app, Index default_grid) {
    grid_size = default_grid;
    app.add_option("--process", process, "process family")
        ->check(CLI::IsMember({"bm", "fbm", "t", "gauss-kernel"}))
        ->capture_default_str();
    app.add_option("--hurst", hurst, "Hurst index for fbm")->check(open_unit_interval);
    app.add_option("--df", df, "degrees of freedom of t coefficients")->check(CLI::Range(3, 1000000));
    app.add_option("--grid-size", grid_size, "number of grid points")
        ->check(CLI::Range(Index{2}, Index{100000}))
        ->capture_default_str();
  }

  void require_parameters() const {
    if (process == "fbm" && !hurst) throw CLI::ValidationError("--hurst", "required for --process fbm");
    if (process == "t" && !df) throw CLI::ValidationError("--df", "required for --process t");
  }

  // Simulation processes: closed-form Brownian expansion on [0, 1], numerical
  // expansions otherwise. The Gaussian-kernel grid is drawn from the seed.
  ProcessSpec simulation_spec(std::uint64_t seed) const {
    const auto unit = [&] { return make_uniform_grid(0.0, 1.0, grid_size); };
    if (process == "bm") return make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), unit(), truncation);
    if (process == "fbm") {
      return make_process(KernelSpec::fractional_brownian(*hurst), CoefficientLaw::gaussian(), unit(), truncation);
    }
    if (process == "t") return make_process(KernelSpec::brownian(), CoefficientLaw::student_t(*df), unit(), truncation);
    const auto law = df ? CoefficientLaw::student_t(*df) : CoefficientLaw::gaussian();
    return make_process(KernelSpec::gaussian(), law, draw_measure_grid(grid_size, 0.5, seed), truncation);
  }

  ProcessSpec efficiency_spec(std::uint64_t seed) const {
    if (process == "bm") return study_process(StudyProcess::brownian, 0, grid_size, seed);
    if (process == "fbm") return study_process(StudyProcess::fbm, *hurst, grid_size, seed);
    if (process == "t") return study_process(StudyProcess::t, *df, grid_size, seed);
    if (df) return study_process(StudyProcess::gauss_kernel_t, *df, grid_size, seed);
    return study_process(StudyProcess::gauss_kernel, 0, grid_size, seed);
  }
};

FunctionalSample ingest(const std::string& path, std::ostream& err) {
  auto document = read_functional_csv(std::filesystem::path(path));
  err << path << ": n=" << document.sample.size() << " curves, D=" << document.sample.grid()->size()
      << " grid points\n";
  return std::move(document.sample);
}

// "k:c" terms joined by '+', e.g. "1:0.5+2:-0.25".
Eigen::VectorXd parse_u_spec(const std::string& text, Index d) {
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(d);
  std::stringstream stream(text);
  std::string term;
  while (std::getline(stream, term, '+')) {
    const auto colon = term.find(':');
    if (colon == std::string::npos) throw InvalidArgument("u-spec term '" + term + "' is not of the form k:c");
    long k = 0;
    double c = 0;
    const auto* kb = term.data();
    const auto* ke = kb + colon;
    const auto* cb = ke + 1;
    const auto* ce = term.data() + term.size();
    const auto kr = std::from_chars(kb, ke, k);
    const auto cr = std::from_chars(cb, ce, c);
    if (kr.ec != std::errc() || kr.ptr != ke || cr.ec != std::errc() || cr.ptr != ce) {
      throw InvalidArgument("u-spec term '" + term + "' is not of the form k:c");
    }
    if (k < 1 || k > d) throw InvalidArgument("u-spec index " + std::to_string(k) + " outside 1.." + std::to_string(d));
    coefficients[k - 1] += c;
  }
  return coefficients;
}

// One direction per row of comma-separated coefficients; '#' lines skipped.
std::vector<Eigen::VectorXd> read_u_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
      double value = 0;
      const auto begin = cell.find_first_not_of(" \t\r");
      const auto end = cell.find_last_not_of(" \t\r");
      if (begin == std::string::npos) throw ParseError("empty cell", number);
      const auto r = std::from_chars(cell.data() + begin, cell.data() + end + 1, value);
      if (r.ec != std::errc() || r.ptr != cell.data() + end + 1) throw ParseError("non-numeric cell '" + cell + "'", number);
      values.push_back(value);
    }
    rows.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Index>(values.size())));
  }
  if (rows.empty()) throw InvalidArgument(path + " holds no directions");
  return rows;
}

std::string render_curves_svg(const FunctionalSample& curves, const FunctionalSample* background) {
  const auto& points = curves.grid()->points();
  double lo = curves.values().minCoeff();
  double hi = curves.values().maxCoeff();
  if (background != nullptr) {
    lo = std::min(lo, background->values().minCoeff());
    hi = std::max(hi, background->values().maxCoeff());
  }
  if (hi - lo <= 0) hi = lo + 1;
  const double width = 480, height = 320, margin = 24;
  const double t0 = points[0], t1 = points[points.size() - 1];
  const auto x = [&](double t) { return margin + (t - t0) / (t1 - t0) * (width - 2 * margin); };
  const auto y = [&](double v) { return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const auto polyline = [&](const Eigen::VectorXd& values, const char* stroke, double stroke_width) {
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\" points=\"";
    for (Index j = 0; j < values.size(); ++j) svg << format_double(x(points[j])) << ',' << format_double(y(values[j])) << ' ';
    svg << "\"/>\n";
  };
  if (background != nullptr) {
    for (Index i = 0; i < std::min<Index>(background->size(), 200); ++i) {
      polyline(background->values().col(i), "#cccccc", 0.5);
    }
  }
  for (Index i = 0; i < curves.size(); ++i) polyline(curves.values().col(i), i == 0 ? "black" : "#1f5fa8", 1.2);
  svg << "</svg>\n";
  return svg.str();
}

struct SimulateCommand {
  ProcessOptions process;
  Index n = 100;
  std::uint64_t seed = 0;
  std::string out;

  void attach(CLI::App& app) {
    process.attach(app, 100);
    app.add_option("--n", n, "number of curves")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--truncation", process.truncation, "expansion terms (0 selects the default)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "random seed")->required();
    app.add_option("--out", out, "output CSV (stdout when omitted)");
  }

  void run(std::ostream& out_stream) const {
    process.require_parameters();
    const auto spec = process.simulation_spec(seed);
    const auto sample = sample_process(spec, n, seed);
    auto meta = provenance(seed, "simulate");
    meta.emplace_back("process", spec.name());
    std::ostringstream csv;
    write_functional_csv(csv, sample, meta);
    emit(out, csv.str(), out_stream);
  }
};

struct QuantileCommand {
  std::string in;
  std::vector<std::string> u_specs;
  std::string u_file;
  std::vector<Index> fan_k;
  std::vector<double> fan_c;
  Index d = 0;
  std::string basis = "pca";
  std::string basis_file;
  std::string out;
  std::string diagnostics;
  std::string svg;
  QuantileOptions options;

  void attach(CLI::App& app) {
    app.add_option("--in", in, "functional CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--u-spec", u_specs, "direction as k:c terms joined by '+'; repeatable");
    app.add_option("--u-file", u_file, "CSV of direction coefficients, one per row")->check(CLI::ExistingFile);
    app.add_option("--fan-k", fan_k, "basis indices of a quantile fan")->delimiter(',')->check(CLI::PositiveNumber);
    app.add_option("--fan-c", fan_c, "magnitudes of a quantile fan")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    app.add_option("--d", d, "truncation (0 selects floor(sqrt(n)))")->check(CLI::NonNegativeNumber);
    app.add_option("--basis", basis, "working basis")->check(CLI::IsMember({"pca", "bm", "file"}))->capture_default_str();
    app.add_option("--basis-file", basis_file, "functional CSV whose curves form the basis")->check(CLI::ExistingFile);
    app.add_option("--out", out, "CSV of quantile curves (stdout when omitted)");
    app.add_option("--diagnostics", diagnostics, "JSON diagnostics (defaults to <out>.json)");
    app.add_option("--svg", svg, "SVG plot of the quantile curves");
    app.add_option("--grad-tol", options.grad_tol, "gradient tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--max-iter", options.max_iter, "iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
  }

  BasisPtr working_basis(const FunctionalSample& sample, Index dim) const {
    if (basis == "pca") return pca(sample, dim);
    if (basis == "bm") {
      return karhunen_loeve(make_process(KernelSpec::brownian(), CoefficientLaw::gaussian(), sample.grid(), dim)).basis;
    }
    if (basis_file.empty()) throw CLI::ValidationError("--basis-file", "required for --basis file");
    const auto functions = read_functional_csv(std::filesystem::path(basis_file)).sample;
    require_same_grid(functions.grid(), sample.grid());
    return std::make_shared<const Basis>(sample.grid(), functions.values());
  }

  void run(std::ostream& out_stream, std::ostream& err) const {
    if (fan_k.empty() != fan_c.empty()) throw CLI::ValidationError("--fan-k and --fan-c must be given together");
    const auto sample = ingest(in, err);
    const Index dim = d > 0 ? d : default_truncation(sample.size());
    const auto working = working_basis(sample, dim);

    struct Row {
      std::string label;
      Json direction;
      QuantileSolution solution;
    };
    std::vector<Row> rows;
    if (!fan_k.empty()) {
      for (auto& entry : quantile_fan(sample, fan_k, fan_c, working, dim, options)) {
        const std::string label = entry.k == 0 ? "median" : "k=" + std::to_string(entry.k) + ",c=" + format_double(entry.c);
        Json direction = {{"k", entry.k}, {"c", entry.c}};
        rows.push_back({label, std::move(direction), std::move(entry.solution)});
      }
    }
    std::vector<Eigen::VectorXd> directions;
    for (const auto& text : u_specs) directions.push_back(parse_u_spec(text, dim));
    if (!u_file.empty()) {
      for (auto& row : read_u_file(u_file)) directions.push_back(std::move(row));
    }
    if (directions.empty() && rows.empty()) directions.push_back(Eigen::VectorXd::Zero(dim));
    for (std::size_t i = 0; i < directions.size(); ++i) {
      const DirectionU u(directions[i]);
      const Eigen::VectorXd coefficients = u.truncated(dim);
      Json direction = Json::array();
      for (Index j = 0; j < coefficients.size(); ++j) direction.push_back(coefficients[j]);
      rows.push_back({"u" + std::to_string(i + 1), std::move(direction), solve_quantile(sample, u, working, dim, options)});
    }

    Eigen::MatrixXd curves(sample.grid()->size(), static_cast<Index>(rows.size()));
    Json report;
    report["meta"] = run_metadata(std::nullopt);
    report["meta"]["command"] = "quantile";
    report["input"] = {{"path", in}, {"n", sample.size()}, {"grid_size", sample.grid()->size()}};
    report["basis"] = basis;
    report["d"] = dim;
    report["solutions"] = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      curves.col(static_cast<Index>(i)) = rows[i].solution.curve.values();
      Json entry = to_json(rows[i].solution);
      entry["label"] = rows[i].label;
      entry["direction"] = rows[i].direction;
      report["solutions"].push_back(std::move(entry));
    }
    const FunctionalSample quantiles(sample.grid(), std::move(curves));

    auto meta = provenance(std::nullopt, "quantile");
    std::string labels;
    for (const auto& row : rows) labels += (labels.empty() ? "" : ";") + row.label;
    meta.emplace_back("curves", labels);
    std::ostringstream csv;
    write_functional_csv(csv, quantiles, meta);
    emit(out, csv.str(), out_stream);

    std::string json_path = diagnostics;
    if (json_path.empty() && !out.empty() && out != "-") json_path = out + ".json";
    if (!json_path.empty()) emit(json_path, dump(report), out_stream);
    if (!svg.empty()) emit(svg, render_curves_svg(quantiles, &sample), out_stream);
  }
};

struct DepthCommand {
  std::string in;
  std::string query;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--in", in, "functional CSV defining the distribution")->required()->check(CLI::ExistingFile);
    app.add_option("--query", query, "functional CSV of query curves (defaults to --in)")->check(CLI::ExistingFile);
    app.add_option("--out", out, "CSV of depths (stdout when omitted)");
  }

  void run(std::ostream& out_stream, std::ostream& err) const {
    const auto sample = ingest(in, err);
    const auto queries = query.empty() ? sample : ingest(query, err);
    const auto depths = depth_profile(sample, queries);
    std::ostringstream csv;
    csv << "# generator-version: " << kVersion << "\n# command: depth\nindex,depth\n";
    for (std::size_t i = 0; i < depths.size(); ++i) csv << i << ',' << format_double(depths[i]) << '\n';
    emit(out, csv.str(), out_stream);
  }
};

struct DDPlotCommand {
  std::string a;
  std::string b;
  std::string out;
  std::string svg;

  void attach(CLI::App& app) {
    app.add_option("--a", a, "first sample CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--b", b, "second sample CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "CSV of (d1, d2, source) (stdout when omitted)");
    app.add_option("--svg", svg, "SVG scatter plot");
  }

  void run(std::ostream& out_stream, std::ostream& err) const {
    const auto first = ingest(a, err);
    const auto second = ingest(b, err);
    const auto data = dd_plot(first, second);
    std::ostringstream csv;
    csv << "# generator-version: " << kVersion << "\n# command: ddplot\nd1,d2,source\n";
    for (const auto& point : data.points) {
      csv << format_double(point.depth_in_sample1) << ',' << format_double(point.depth_in_sample2) << ','
          << (point.source == DDSource::sample1 ? "a" : "b") << '\n';
    }
    emit(out, csv.str(), out_stream);
    if (!svg.empty()) emit(svg, render_dd_plot_svg(data), out_stream);
  }
};

struct EfficiencyCommand {
  ProcessOptions process;
  std::size_t mc = 200000;
  std::uint64_t seed = 0;
  bool table = false;
  bool mc_sigma = false;
  std::string out;

  void attach(CLI::App& app) {
    process.attach(app, 200);
    app.add_option("--mc", mc, "Monte Carlo draws per expectation")
        ->check(CLI::Range(std::size_t{64}, std::size_t{1} << 40))
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed")->required();
    app.add_flag("--table", table, "run the full efficiency table");
    app.add_flag("--mc-sigma", mc_sigma, "estimate trace(Sigma) by Monte Carlo instead of quadrature");
    app.add_option("--out", out, "JSON report (stdout when omitted)");
  }

  void run(std::ostream& out_stream, std::ostream& err) const {
    Json report;
    if (table) {
      const auto rows = efficiency_table(mc, seed, process.grid_size);
      report["meta"] = run_metadata(seed);
      report["rows"] = to_json(rows);
      report["all_within_tolerance"] =
          std::all_of(rows.begin(), rows.end(), [](const EfficiencyRow& row) { return row.within_tolerance(); });
      err << "cell                      ARE      se         expected  within\n";
      for (const auto& row : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-24s %8.4f %8.4f %10s  %s\n", row.label.c_str(), row.report.are,
                      row.report.are_standard_error, row.expected ? format_double(*row.expected).c_str() : "-",
                      row.expected ? (row.within_tolerance() ? "yes" : "NO") : "-");
        err << line;
      }
    } else {
      process.require_parameters();
      const auto spec = process.efficiency_spec(seed);
      report["meta"] = run_metadata(seed);
      report["report"] = to_json(are(spec, mc, seed, mc_sigma ? TraceMethod::monte_carlo : TraceMethod::closed_form));
    }
    emit(out, dump(report), out_stream);
  }
};

struct ConvergeCommand {
  std::string study = "gc";
  ProcessOptions process;
  std::vector<Index> n_list{250, 1000, 4000};
  Index reps = 50;
  std::uint64_t seed = 0;
  std::size_t n_ref = 100000;
  Index probes = 20;
  Index draws = 200;
  Index d = 3;
  double u_scale = 0.5;
  std::string out;
  std::string csv_path;

  void attach(CLI::App& app) {
    app.add_option("--study", study, "study kind")->check(CLI::IsMember({"gc", "integrated", "bahadur"}))->capture_default_str();
    process.attach(app, 100);
    app.add_option("--n-list", n_list, "sample sizes")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--reps", reps, "replications per sample size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", seed, "random seed")->required();
    app.add_option("--n-ref", n_ref, "reference sample size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--probes", probes, "probe curves for the gc study")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--draws", draws, "integration draws for the integrated study")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--d", d, "truncation for the bahadur study")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--u-scale", u_scale, "u = u_scale * phi_1 for the bahadur study")->check(CLI::Range(0.0, 0.999))->capture_default_str();
    app.add_option("--out", out, "JSON report (stdout when omitted)");
    app.add_option("--csv", csv_path, "CSV of per-n medians");
  }

  void run(std::ostream& out_stream) const {
    process.require_parameters();
    const auto spec = process.simulation_spec(seed);
    Json report;
    std::ostringstream csv;
    csv << "# generator-version: " << kVersion << "\n# command: converge\n# seed: " << seed << '\n';
    if (study == "bahadur") {
      const auto result = bahadur_study(spec, n_list, reps, d, seed, n_ref, u_scale);
      report["meta"] = run_metadata(seed);
      report["study"] = to_json(result);
      csv << "n,residual_median,linear_median\n";
      for (std::size_t i = 0; i < result.n_values.size(); ++i) {
        csv << result.n_values[i] << ',' << format_double(result.residual_medians[i]) << ','
            << format_double(result.linear_medians[i]) << '\n';
      }
    } else {
      const auto result = study == "gc" ? gc_rate_study(spec, default_probes(spec, probes, seed), n_list, reps, seed, n_ref)
                                        : integrated_error_study(spec, n_list, reps, seed, draws, n_ref);
      report["meta"] = run_metadata(seed);
      report["study"] = to_json(result);
      csv << "n,sup_median,integrated_median\n";
      for (std::size_t i = 0; i < result.n_values.size(); ++i) {
        csv << result.n_values[i] << ',' << format_double(result.sup_errors[i]) << ','
            << format_double(result.integrated_errors[i]) << '\n';
      }
    }
    emit(out, dump(report), out_stream);
    if (!csv_path.empty()) emit(csv_path, csv.str(), out_stream);
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial quantiles, depth and efficiency for functional data", "fsq"};
  app.set_version_flag("--version", std::string(kVersion));
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option defaults; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 uses all cores)")->check(CLI::NonNegativeNumber);

  SimulateCommand simulate;
  QuantileCommand quantile;
  DepthCommand depth;
  DDPlotCommand ddplot;
  EfficiencyCommand efficiency;
  ConvergeCommand converge;
  auto* simulate_app = app.add_subcommand("simulate", "sample paths of a process to CSV");
  auto* quantile_app = app.add_subcommand("quantile", "sample spatial quantiles of a functional CSV");
  auto* depth_app = app.add_subcommand("depth", "spatial depth of query curves");
  auto* ddplot_app = app.add_subcommand("ddplot", "depth-versus-depth plot of two samples");
  auto* efficiency_app = app.add_subcommand("efficiency", "asymptotic relative efficiency of the spatial median");
  auto* converge_app = app.add_subcommand("converge", "Monte Carlo convergence-rate studies");
  simulate.attach(*simulate_app);
  quantile.attach(*quantile_app);
  depth.attach(*depth_app);
  ddplot.attach(*ddplot_app);
  efficiency.attach(*efficiency_app);
  converge.attach(*converge_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? success : usage_error;
  }

  try {
    set_thread_count(static_cast<unsigned>(threads));
    if (simulate_app->parsed()) simulate.run(out);
    if (quantile_app->parsed()) quantile.run(out, err);
    if (depth_app->parsed()) depth.run(out, err);
    if (ddplot_app->parsed()) ddplot.run(out, err);
    if (efficiency_app->parsed()) efficiency.run(out, err);
    if (converge_app->parsed()) converge.run(out);
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "Run with --help for more information.\n";
    return usage_error;
  } catch (const Error& e) {
    err << dump(error_json(e.kind(), e.what()));
    return runtime_failure;
  } catch (const std::exception& e) {
    err << dump(error_json("internal", e.what()));
    return runtime_failure;
  }
  return success;
}

}  // namespace fsq::cli
