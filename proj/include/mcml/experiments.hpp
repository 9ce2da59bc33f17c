#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "mcml/asymptotics.hpp"
#include "mcml/estimator.hpp"
#include "mcml/importance.hpp"
#include "mcml/model.hpp"

namespace mcml {

// --- configuration --------------------------------------------------------

struct ModelSpec {
  std::string kind;  // "toy" | "autologistic" | "generic"
  int rows = 0, cols = 0;
  int param_dim = 0;  // generic only
  std::vector<VectorXd> states;
  std::vector<VectorXd> suff_stats;
  std::string label;

  Model build() const;
};

struct InstrumentalSpec {
  std::string kind;  // "model_at" | "uniform"
  VectorXd psi;
  VectorXd x_ref;

  Instrumental build() const;
};

struct ExperimentConfig {
  ModelSpec model;
  InstrumentalSpec instrumental;
  VectorXd theta_star;
  int n = 0;
  int m = 0;
  int replications = 1;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::vector<VectorXd> covariates{VectorXd()};  // finite uniform g(x)
  std::vector<VectorXd> psi_grid;                // psi-sweep
  std::vector<int> n_grid;                       // compare-schemes
  FitOptions fit;
  int threads = 1;     // 0 = hardware concurrency; not part of the report echo
  std::string out;     // report path; not part of the report echo
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Deterministic echo of everything that affects the results (threads and
// output paths excluded, so reports are byte-identical across parallelism).
nlohmann::ordered_json config_echo(const ExperimentConfig& config);

// --- replication experiments ----------------------------------------------

struct CoverageRecord {
  int rep = 0;
  bool converged = false;
  int iterations = 0;
  VectorXd theta_hat;
  VectorXd z;
  std::vector<int> ci_hit;
  std::vector<std::string> warnings;
};

struct CoverageResult {
  ExperimentConfig config;
  std::vector<CoverageRecord> records;
  int excluded = 0;
  bool valid = true;  // false when more than 1% of replications were excluded
  VectorXd coverage;  // per coordinate, over converged replications
  VectorXd z_mean;
  VectorXd z_var;  // sample variance, 1/(k-1)
};

// R replications of generate - sample - fit - standardize - interval-check.
CoverageResult run_coverage(const ExperimentConfig& config);

struct PsiSweepRecord {
  int psi_index = 0;
  int rep = 0;
  bool converged = false;
  VectorXd err;  // psi - psi_hat^m
};

struct PsiSweepPoint {
  VectorXd psi;
  int excluded = 0;
  VectorXd err_variance;             // per coordinate, over converged reps
  double toy_theory_variance = 0.0;  // exp(-psi)(1+e^psi)^2 / m, toy only
};

struct PsiSweepResult {
  ExperimentConfig config;
  std::vector<PsiSweepRecord> records;
  std::vector<PsiSweepPoint> points;
  bool valid = true;
};

// MC-error variance of (psi - psi_hat^m) across the configured psi grid.
PsiSweepResult run_psi_sweep(const ExperimentConfig& config);

struct CompareRecord {
  int n_index = 0;
  int rep = 0;
  double product_logw_var = 0.0;  // variance over k of the joint log-weights
  double shared_obj_error = 0.0;  // shared-sample objective minus exact value
};

struct ComparePoint {
  int n = 0;
  double mean_logw_var = 0.0;
  double obj_error_variance = 0.0;
};

struct CompareResult {
  ExperimentConfig config;
  std::vector<CompareRecord> records;
  std::vector<ComparePoint> points;
  double logw_var_slope = 0.0;  // least-squares slope of mean_logw_var ~ n
};

// Product-form log-weight variance growth versus the shared-sample scheme.
CompareResult run_compare_schemes(const ExperimentConfig& config);

struct SingleFitResult {
  FitResult fit;
  SandwichParts parts;
  MatrixXd cov;
  VectorXd se;
  ConfidenceRegion region;
  double w_tilde = 0.0;  // second-moment diagnostic of the MC influence
};

// One MCML fit of a loaded dataset with plug-in standard errors.
SingleFitResult run_single_fit(const Dataset& data, const ExperimentConfig& config);

// --- reports ---------------------------------------------------------------

struct Report {
  nlohmann::ordered_json doc;
  std::string records_csv;
};

Report coverage_report(const CoverageResult& result);
Report psi_sweep_report(const PsiSweepResult& result);
Report compare_report(const CompareResult& result);
nlohmann::ordered_json single_fit_json(const SingleFitResult& result);

// Writes the JSON document to `json_path` and the record dump next to it
// (extension replaced by .csv).
void write_report(const Report& report, const std::string& json_path);

std::string csv_sibling_path(const std::string& json_path);

}  // namespace mcml
