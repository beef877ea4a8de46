#include "fsq/report_json.hpp"

#include "fsq/random.hpp"
#include "fsq/version.hpp"

namespace fsq {

namespace {

const char* study_name(StudyProcess process) {
  switch (process) {
    case StudyProcess::brownian: return "bm";
    case StudyProcess::fbm: return "fbm";
    case StudyProcess::t: return "t";
    case StudyProcess::gauss_kernel: return "gauss-kernel";
    case StudyProcess::gauss_kernel_t: return "gauss-kernel";
  }
  return "unknown";
}

}  // namespace

Json run_metadata(std::optional<std::uint64_t> seed) {
  Json meta;
  meta["version"] = kVersion;
  meta["generator"] = Philox4x32::kName;
  if (seed) meta["seed"] = *seed;
  return meta;
}

Json to_json(const EfficiencyReport& report) {
  Json j;
  j["trace_sigma"] = report.trace_sigma;
  j["trace_v0"] = report.trace_v0;
  j["are"] = report.are;
  j["are_standard_error"] = report.are_standard_error;
  j["process"] = report.process;
  j["kernel"] = report.kernel;
  j["law"] = report.law;
  j["D"] = report.grid_size;
  j["grid_kind"] = report.grid_kind;
  j["quadrature"] = report.quadrature;
  j["sigma_method"] = report.sigma_method;
  j["mc_size"] = report.mc;
  j["seed"] = report.seed;
  j["generator"] = report.generator;
  j["jacobian_condition"] = report.jacobian_condition;
  j["floor_activations"] = report.floor_activations;
  return j;
}

Json to_json(const std::vector<EfficiencyRow>& table) {
  Json rows = Json::array();
  for (const EfficiencyRow& row : table) {
    Json r;
    r["label"] = row.label;
    r["process"] = study_name(row.process);
    r["parameter"] = row.parameter;
    r["expected"] = row.expected ? Json(*row.expected) : Json(nullptr);
    r["tolerance"] = row.tolerance;
    r["within_tolerance"] = row.within_tolerance();
    r["report"] = to_json(row.report);
    rows.push_back(std::move(r));
  }
  return rows;
}

Json to_json(const RateReport& report) {
  Json j;
  j["study"] = report.study;
  j["process"] = report.process;
  j["n_values"] = report.n_values;
  j["sup_errors"] = report.sup_errors;
  j["integrated_errors"] = report.integrated_errors;
  j["fitted_slope_sup"] = report.fitted_slope_sup;
  j["fitted_slope_int"] = report.fitted_slope_int;
  j["replications"] = report.replications;
  j["point_count"] = report.point_count;
  j["n_ref"] = report.n_ref;
  j["seed"] = report.seed;
  j["note"] = report.note;
  return j;
}

Json to_json(const BahadurStudy& study) {
  Json j;
  j["study"] = "bahadur";
  j["process"] = study.process;
  j["n_values"] = study.n_values;
  j["residual_medians"] = study.residual_medians;
  j["linear_medians"] = study.linear_medians;
  j["slope_residual"] = study.slope_residual;
  j["slope_linear"] = study.slope_linear;
  j["replications"] = study.replications;
  j["d"] = study.d;
  j["n_ref"] = study.n_ref;
  j["u_scale"] = study.u_scale;
  j["seed"] = study.seed;
  return j;
}

Json to_json(const QuantileSolution& solution) {
  Json j;
  j["iterations"] = solution.iterations;
  j["grad_norm"] = solution.grad_norm;
  j["objective"] = solution.objective;
  j["converged"] = solution.converged;
  j["anchored_at_datum"] = solution.anchored_at_datum ? Json(*solution.anchored_at_datum) : Json(nullptr);
  j["degenerate"] = solution.degenerate;
  j["d"] = solution.coefficients.size();
  return j;
}

Json to_json(const DDPlotData& data) {
  Json j;
  j["size1"] = data.size1;
  j["size2"] = data.size2;
  j["grid_size"] = data.grid_size;
  j["self_included"] = data.self_included;
  return j;
}

Json error_json(const std::string& kind, const std::string& message) {
  Json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  j["meta"] = run_metadata(std::nullopt);
  return j;
}

}  // namespace fsq
