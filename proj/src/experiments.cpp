#include "mcml/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "mcml/dataset_io.hpp"
#include "mcml/likelihood.hpp"

namespace mcml {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Shortest round-trip decimal form, for the CSV record dumps.
std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

VectorXd vec_from_json(const json& node, const std::string& key) {
  if (!node.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  VectorXd out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    out[static_cast<Eigen::Index>(i)] = node[i].get<double>();
  }
  return out;
}

std::vector<VectorXd> vec_list_from_json(const json& node, const std::string& key) {
  if (!node.is_array()) throw ConfigError("'" + key + "' must be an array of arrays");
  std::vector<VectorXd> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(vec_from_json(node[i], key));
  return out;
}

ordered_json vec_to_json(const VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json vec_list_to_json(const std::vector<VectorXd>& vs) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : vs) arr.push_back(vec_to_json(v));
  return arr;
}

int effective_threads(int configured) {
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel loop; results must be written to disjoint slots so the
// outcome is identical for every thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Dataset generate_dataset(const Model& model, const VectorXd& theta_star,
                         const std::vector<VectorXd>& covariates, int n, RngStream& rng) {
  Dataset data;
  data.responses.reserve(static_cast<std::size_t>(n));
  data.covariates.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const VectorXd& x = covariates[rng.uniform_index(covariates.size())];
    data.covariates.push_back(x);
    data.responses.push_back(sample_response(model, x, theta_star, rng));
  }
  return data;
}

double sample_variance(const VectorXd& v) {
  const Eigen::Index k = v.size();
  if (k < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / double(k - 1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

// --- configuration ----------------------------------------------------------

Model ModelSpec::build() const {
  if (kind == "toy") return toy_model();
  if (kind == "autologistic") return autologistic_model(rows, cols);
  if (kind == "generic") return generic_model(param_dim, states, suff_stats,
                                              label.empty() ? "generic" : label);
  throw ConfigError("unknown model kind '" + kind + "'");
}

Instrumental InstrumentalSpec::build() const {
  if (kind.empty() || kind == "uniform") return Instrumental::Uniform();
  if (kind == "model_at") {
    require(psi.size() > 0, "instrumental 'model_at' needs a psi vector");
    return Instrumental::ModelAt(psi, x_ref);
  }
  throw ConfigError("unknown instrumental kind '" + kind + "'");
}

ExperimentConfig config_from_json(const json& doc) {
  try {
    ExperimentConfig config;
    require(doc.is_object(), "config must be a JSON object");
    require(doc.contains("model"), "config needs a 'model' object");
    const json& model = doc.at("model");
    config.model.kind = model.value("kind", std::string());
    config.model.rows = model.value("rows", 0);
    config.model.cols = model.value("cols", 0);
    config.model.param_dim = model.value("param_dim", 0);
    config.model.label = model.value("label", std::string());
    if (model.contains("states")) config.model.states = vec_list_from_json(model["states"], "states");
    if (model.contains("suff_stats"))
      config.model.suff_stats = vec_list_from_json(model["suff_stats"], "suff_stats");

    if (doc.contains("instrumental")) {
      const json& instr = doc.at("instrumental");
      config.instrumental.kind = instr.value("kind", std::string("uniform"));
      if (instr.contains("psi")) config.instrumental.psi = vec_from_json(instr["psi"], "psi");
      if (instr.contains("x_ref"))
        config.instrumental.x_ref = vec_from_json(instr["x_ref"], "x_ref");
    }

    if (doc.contains("theta_star"))
      config.theta_star = vec_from_json(doc["theta_star"], "theta_star");
    config.n = doc.value("n", 0);
    config.m = doc.value("m", 0);
    config.replications = doc.value("replications", 1);
    config.seed = doc.value("seed", std::uint64_t(0));
    config.level = doc.value("level", 0.95);
    if (doc.contains("covariates"))
      config.covariates = vec_list_from_json(doc["covariates"], "covariates");
    if (doc.contains("psi_grid")) config.psi_grid = vec_list_from_json(doc["psi_grid"], "psi_grid");
    if (doc.contains("n_grid")) {
      require(doc["n_grid"].is_array(), "'n_grid' must be an array of integers");
      for (const auto& v : doc["n_grid"]) config.n_grid.push_back(v.get<int>());
    }
    if (doc.contains("fit")) {
      const json& fit = doc.at("fit");
      config.fit.grad_tol = fit.value("grad_tol", config.fit.grad_tol);
      config.fit.max_iter = fit.value("max_iter", config.fit.max_iter);
      config.fit.step_halving_max = fit.value("step_halving_max", config.fit.step_halving_max);
      config.fit.divergence_bound = fit.value("divergence_bound", config.fit.divergence_bound);
      if (fit.contains("init")) config.fit.init = vec_from_json(fit["init"], "init");
    }
    config.threads = doc.value("threads", 1);
    config.out = doc.value("out", std::string());
    require(!config.covariates.empty(), "'covariates' must list at least one vector");
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return config_from_json(doc);
}

ordered_json config_echo(const ExperimentConfig& config) {
  ordered_json model{{"kind", config.model.kind}};
  if (config.model.kind == "autologistic") {
    model["rows"] = config.model.rows;
    model["cols"] = config.model.cols;
  }
  if (config.model.kind == "generic") {
    model["param_dim"] = config.model.param_dim;
    model["states"] = vec_list_to_json(config.model.states);
    model["suff_stats"] = vec_list_to_json(config.model.suff_stats);
    if (!config.model.label.empty()) model["label"] = config.model.label;
  }

  ordered_json instr{{"kind", config.instrumental.kind.empty() ? "uniform"
                                                               : config.instrumental.kind}};
  if (config.instrumental.psi.size() > 0) instr["psi"] = vec_to_json(config.instrumental.psi);
  if (config.instrumental.x_ref.size() > 0)
    instr["x_ref"] = vec_to_json(config.instrumental.x_ref);

  ordered_json doc;
  doc["model"] = model;
  doc["instrumental"] = instr;
  if (config.theta_star.size() > 0) doc["theta_star"] = vec_to_json(config.theta_star);
  doc["n"] = config.n;
  doc["m"] = config.m;
  doc["replications"] = config.replications;
  doc["seed"] = config.seed;
  doc["level"] = config.level;
  doc["covariates"] = vec_list_to_json(config.covariates);
  if (!config.psi_grid.empty()) doc["psi_grid"] = vec_list_to_json(config.psi_grid);
  if (!config.n_grid.empty()) doc["n_grid"] = config.n_grid;
  doc["fit"] = ordered_json{{"grad_tol", config.fit.grad_tol},
                            {"max_iter", config.fit.max_iter},
                            {"step_halving_max", config.fit.step_halving_max},
                            {"divergence_bound", config.fit.divergence_bound}};
  return doc;
}

// --- coverage ----------------------------------------------------------------

namespace {

CoverageRecord coverage_replication(const ExperimentConfig& config, const Model& model,
                                    const Instrumental& instr, int rep) {
  CoverageRecord rec;
  rec.rep = rep;
  RngStream data_rng =
      derive_stream(config.seed, std::uint64_t(rep), StreamRole::data_generation);
  RngStream mc_rng = derive_stream(config.seed, std::uint64_t(rep), StreamRole::mc_sampling);

  const Dataset data =
      generate_dataset(model, config.theta_star, config.covariates, config.n, data_rng);
  const ImportanceSample sample =
      draw_instrumental(instr, model, config.m, mc_rng,
                        stream_tag(config.seed, std::uint64_t(rep), StreamRole::mc_sampling));

  try {
    const FitResult fit = fit_mcml(data, sample, model, config.fit);
    const SandwichParts parts = estimate_sandwich_parts(data, sample, model, fit.theta_hat);
    rec.warnings = sandwich_diagnostics(parts);
    rec.z = standardize(fit.theta_hat, config.theta_star, parts);
    const MatrixXd cov = sandwich_cov(parts);
    const ConfidenceRegion region = confidence_region(fit.theta_hat, cov, config.level);
    rec.ci_hit.resize(static_cast<std::size_t>(config.theta_star.size()));
    for (Eigen::Index j = 0; j < config.theta_star.size(); ++j)
      rec.ci_hit[static_cast<std::size_t>(j)] = (region.lower[j] <= config.theta_star[j] &&
                                                 config.theta_star[j] <= region.upper[j])
                                                    ? 1
                                                    : 0;
    rec.theta_hat = fit.theta_hat;
    rec.iterations = fit.iterations;
    rec.converged = true;
  } catch (const Error& e) {
    rec.converged = false;
    rec.warnings.push_back(e.what());
  }
  return rec;
}

}  // namespace

CoverageResult run_coverage(const ExperimentConfig& config) {
  require(config.replications >= 1, "coverage needs replications >= 1");
  require(config.n >= 1 && config.m >= 1, "coverage needs n >= 1 and m >= 1");
  require(config.theta_star.size() > 0, "coverage needs theta_star");
  const Model model = config.model.build();
  require(config.theta_star.size() == model.param_dim,
          "theta_star length does not match the model");
  const Instrumental instr = config.instrumental.build();
  const int p = model.param_dim;
  const int R = config.replications;

  CoverageResult result;
  result.config = config;
  result.records.resize(static_cast<std::size_t>(R));
  parallel_for(R, effective_threads(config.threads), [&](int rep) {
    result.records[static_cast<std::size_t>(rep)] =
        coverage_replication(config, model, instr, rep);
  });

  // Aggregates, recomputable from the records: per-coordinate hit means and
  // z moments over converged replications only.
  int k = 0;
  result.coverage = VectorXd::Zero(p);
  result.z_mean = VectorXd::Zero(p);
  for (const auto& rec : result.records) {
    if (!rec.converged) continue;
    ++k;
    for (int j = 0; j < p; ++j) result.coverage[j] += rec.ci_hit[static_cast<std::size_t>(j)];
    result.z_mean += rec.z;
  }
  result.excluded = R - k;
  result.valid = k >= 1 && double(result.excluded) <= 0.01 * double(R);
  if (k >= 1) {
    result.coverage /= double(k);
    result.z_mean /= double(k);
  }
  result.z_var = VectorXd::Zero(p);
  if (k >= 2) {
    for (const auto& rec : result.records)
      if (rec.converged)
        result.z_var += (rec.z - result.z_mean).array().square().matrix();
    result.z_var /= double(k - 1);
  }
  return result;
}

// --- psi sweep ----------------------------------------------------------------

PsiSweepResult run_psi_sweep(const ExperimentConfig& config) {
  require(config.replications >= 1, "psi-sweep needs replications >= 1");
  require(config.m >= 2, "psi-sweep needs m >= 2");
  require(!config.psi_grid.empty(), "psi-sweep needs a psi_grid");
  for (const auto& x : config.covariates)
    require(x.size() == 0, "psi-sweep supports covariate-free setups only");
  const Model model = config.model.build();
  for (const auto& psi : config.psi_grid)
    require(psi.size() == model.param_dim, "psi_grid entry does not match the model dimension");

  const int R = config.replications;
  const int J = static_cast<int>(config.psi_grid.size());
  const int p = model.param_dim;

  PsiSweepResult result;
  result.config = config;
  result.records.resize(static_cast<std::size_t>(J) * static_cast<std::size_t>(R));
  parallel_for(J * R, effective_threads(config.threads), [&](int idx) {
    const int j = idx / R;
    const int rep = idx % R;
    PsiSweepRecord rec;
    rec.psi_index = j;
    rec.rep = rep;
    RngStream rng = derive_stream(config.seed, std::uint64_t(rep), StreamRole::mc_sampling,
                                  std::uint64_t(j));
    const Instrumental instr = Instrumental::ModelAt(config.psi_grid[static_cast<std::size_t>(j)]);
    const ImportanceSample sample = draw_instrumental(
        instr, model, config.m, rng,
        stream_tag(config.seed, std::uint64_t(rep), StreamRole::mc_sampling, std::uint64_t(j)));
    try {
      Dataset mc_data;
      mc_data.responses = sample.draws;
      mc_data.covariates.assign(sample.draws.size(), VectorXd());
      const FitResult fit = fit_exact(mc_data, model, config.fit);
      rec.err = config.psi_grid[static_cast<std::size_t>(j)] - fit.theta_hat;
      rec.converged = true;
    } catch (const Error&) {
      rec.converged = false;
    }
    result.records[static_cast<std::size_t>(idx)] = std::move(rec);
  });

  result.points.resize(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    PsiSweepPoint& point = result.points[static_cast<std::size_t>(j)];
    point.psi = config.psi_grid[static_cast<std::size_t>(j)];
    int k = 0;
    VectorXd mean = VectorXd::Zero(p);
    for (int rep = 0; rep < R; ++rep) {
      const auto& rec = result.records[static_cast<std::size_t>(j * R + rep)];
      if (rec.converged) {
        ++k;
        mean += rec.err;
      }
    }
    point.excluded = R - k;
    if (k >= 1) mean /= double(k);
    point.err_variance = VectorXd::Zero(p);
    if (k >= 2) {
      for (int rep = 0; rep < R; ++rep) {
        const auto& rec = result.records[static_cast<std::size_t>(j * R + rep)];
        if (rec.converged)
          point.err_variance += (rec.err - mean).array().square().matrix();
      }
      point.err_variance /= double(k - 1);
    }
    if (config.model.kind == "toy" && p == 1) {
      const double psi = point.psi[0];
      point.toy_theory_variance =
          std::exp(-psi) * (1.0 + std::exp(psi)) * (1.0 + std::exp(psi)) / double(config.m);
    }
    if (double(point.excluded) > 0.01 * double(R)) result.valid = false;
  }
  return result;
}

// --- scheme comparison ----------------------------------------------------------

CompareResult run_compare_schemes(const ExperimentConfig& config) {
  require(config.replications >= 1, "compare-schemes needs replications >= 1");
  require(config.m >= 2, "compare-schemes needs m >= 2");
  require(!config.n_grid.empty(), "compare-schemes needs an n_grid");
  require(config.theta_star.size() > 0, "compare-schemes needs theta_star");
  const Model model = config.model.build();
  require(config.theta_star.size() == model.param_dim,
          "theta_star length does not match the model");
  const Instrumental instr = config.instrumental.build();

  const int R = config.replications;
  const int N = static_cast<int>(config.n_grid.size());

  CompareResult result;
  result.config = config;
  result.records.resize(static_cast<std::size_t>(N) * static_cast<std::size_t>(R));
  parallel_for(N * R, effective_threads(config.threads), [&](int idx) {
    const int ni = idx / R;
    const int rep = idx % R;
    const int n = config.n_grid[static_cast<std::size_t>(ni)];

    CompareRecord rec;
    rec.n_index = ni;
    rec.rep = rep;

    RngStream data_rng = derive_stream(config.seed, std::uint64_t(rep),
                                       StreamRole::data_generation, std::uint64_t(ni));
    const Dataset data =
        generate_dataset(model, config.theta_star, config.covariates, n, data_rng);

    // Product-form scheme: one instrumental sample per observation.
    ProductSample joint;
    joint.per_obs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      RngStream rng = derive_stream(config.seed, std::uint64_t(rep), StreamRole::mc_sampling,
                                    (std::uint64_t(ni) << 32) | std::uint64_t(i + 1));
      joint.per_obs.push_back(draw_instrumental(
          instr, model, config.m, rng,
          stream_tag(config.seed, std::uint64_t(rep), StreamRole::mc_sampling,
                     (std::uint64_t(ni) << 32) | std::uint64_t(i + 1))));
    }
    const VectorXd log_weights = product_log_weights(data, joint, model, config.theta_star);
    rec.product_logw_var = sample_variance(log_weights);

    // Shared-sample scheme: objective error against the exact value.
    RngStream shared_rng = derive_stream(config.seed, std::uint64_t(rep),
                                         StreamRole::mc_sampling, std::uint64_t(ni) << 32);
    const ImportanceSample shared =
        draw_instrumental(instr, model, config.m, shared_rng,
                          stream_tag(config.seed, std::uint64_t(rep), StreamRole::mc_sampling,
                                     std::uint64_t(ni) << 32));
    rec.shared_obj_error = mc_loglik(data, shared, model, config.theta_star).value -
                           exact_loglik(data, model, config.theta_star).value;

    result.records[static_cast<std::size_t>(idx)] = rec;
  });

  result.points.resize(static_cast<std::size_t>(N));
  double slope_num = 0.0, slope_den = 0.0;
  for (int ni = 0; ni < N; ++ni) {
    ComparePoint& point = result.points[static_cast<std::size_t>(ni)];
    point.n = config.n_grid[static_cast<std::size_t>(ni)];
    VectorXd errs(R);
    double var_sum = 0.0;
    for (int rep = 0; rep < R; ++rep) {
      const auto& rec = result.records[static_cast<std::size_t>(ni * R + rep)];
      var_sum += rec.product_logw_var;
      errs[rep] = rec.shared_obj_error;
    }
    point.mean_logw_var = var_sum / double(R);
    point.obj_error_variance = sample_variance(errs);
    slope_num += double(point.n) * point.mean_logw_var;
    slope_den += double(point.n) * double(point.n);
  }
  result.logw_var_slope = slope_den > 0.0 ? slope_num / slope_den : 0.0;
  return result;
}

// --- single fit -------------------------------------------------------------------

SingleFitResult run_single_fit(const Dataset& data, const ExperimentConfig& config) {
  require(config.m >= 2, "fit needs m >= 2");
  const Model model = config.model.build();
  const Instrumental instr = config.instrumental.build();
  RngStream rng = derive_stream(config.seed, 0, StreamRole::mc_sampling);
  const ImportanceSample sample = draw_instrumental(
      instr, model, config.m, rng, stream_tag(config.seed, 0, StreamRole::mc_sampling));

  SingleFitResult result;
  result.fit = fit_mcml(data, sample, model, config.fit);
  result.parts = estimate_sandwich_parts(data, sample, model, result.fit.theta_hat);
  for (auto& w : sandwich_diagnostics(result.parts)) result.fit.warnings.push_back(std::move(w));
  result.cov = sandwich_cov(result.parts);
  result.se = result.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.region = confidence_region(result.fit.theta_hat, result.cov, config.level);
  result.w_tilde = estimate_W_tilde(data, sample, model, result.fit.theta_hat,
                                    mc_norming_fn(sample, model, result.fit.theta_hat));
  return result;
}

// --- reports ------------------------------------------------------------------------

namespace {

ordered_json matrix_to_json(const MatrixXd& mat) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void append_vec_cells(std::string& line, const VectorXd& v, int expected) {
  for (int j = 0; j < expected; ++j) {
    line += ',';
    if (v.size() == expected) line += fmt_double(v[j]);
  }
}

}  // namespace

Report coverage_report(const CoverageResult& result) {
  const int p = static_cast<int>(result.coverage.size());

  ordered_json records = ordered_json::array();
  std::string csv = "rep,converged,iterations";
  for (int j = 0; j < p; ++j) csv += ",theta_hat_" + std::to_string(j);
  for (int j = 0; j < p; ++j) csv += ",z_" + std::to_string(j);
  for (int j = 0; j < p; ++j) csv += ",ci_hit_" + std::to_string(j);
  csv += '\n';

  for (const auto& rec : result.records) {
    ordered_json node{{"rep", rec.rep}, {"converged", rec.converged}};
    if (rec.converged) {
      node["iterations"] = rec.iterations;
      node["theta_hat"] = vec_to_json(rec.theta_hat);
      node["z"] = vec_to_json(rec.z);
      node["ci_hit"] = rec.ci_hit;
    }
    if (!rec.warnings.empty()) node["warnings"] = rec.warnings;
    records.push_back(std::move(node));

    std::string line = std::to_string(rec.rep);
    line += rec.converged ? ",1" : ",0";
    line += ',' + std::to_string(rec.iterations);
    append_vec_cells(line, rec.theta_hat, p);
    append_vec_cells(line, rec.z, p);
    for (int j = 0; j < p; ++j) {
      line += ',';
      if (rec.converged) line += std::to_string(rec.ci_hit[static_cast<std::size_t>(j)]);
    }
    csv += line + '\n';
  }

  Report report;
  report.doc = ordered_json{{"schema", "mcml-coverage-report-v1"},
                            {"config", config_echo(result.config)},
                            {"records", std::move(records)},
                            {"aggregates",
                             ordered_json{{"replications", result.config.replications},
                                          {"excluded", result.excluded},
                                          {"valid", result.valid},
                                          {"coverage", vec_to_json(result.coverage)},
                                          {"z_mean", vec_to_json(result.z_mean)},
                                          {"z_var", vec_to_json(result.z_var)}}}};
  report.records_csv = std::move(csv);
  return report;
}

Report psi_sweep_report(const PsiSweepResult& result) {
  const int p = result.points.empty() ? 0 : static_cast<int>(result.points.front().psi.size());

  ordered_json records = ordered_json::array();
  std::string csv = "psi_index,rep,converged";
  for (int j = 0; j < p; ++j) csv += ",err_" + std::to_string(j);
  csv += '\n';
  for (const auto& rec : result.records) {
    ordered_json node{{"psi_index", rec.psi_index}, {"rep", rec.rep}, {"converged", rec.converged}};
    if (rec.converged) node["err"] = vec_to_json(rec.err);
    records.push_back(std::move(node));

    std::string line = std::to_string(rec.psi_index) + ',' + std::to_string(rec.rep);
    line += rec.converged ? ",1" : ",0";
    append_vec_cells(line, rec.err, p);
    csv += line + '\n';
  }

  ordered_json points = ordered_json::array();
  for (const auto& point : result.points) {
    ordered_json node{{"psi", vec_to_json(point.psi)},
                      {"excluded", point.excluded},
                      {"err_variance", vec_to_json(point.err_variance)}};
    if (point.toy_theory_variance > 0.0) node["toy_theory_variance"] = point.toy_theory_variance;
    points.push_back(std::move(node));
  }

  Report report;
  report.doc = ordered_json{{"schema", "mcml-psi-sweep-report-v1"},
                            {"config", config_echo(result.config)},
                            {"records", std::move(records)},
                            {"aggregates",
                             ordered_json{{"valid", result.valid}, {"points", std::move(points)}}}};
  report.records_csv = std::move(csv);
  return report;
}

Report compare_report(const CompareResult& result) {
  ordered_json records = ordered_json::array();
  std::string csv = "n_index,rep,product_logw_var,shared_obj_error\n";
  for (const auto& rec : result.records) {
    records.push_back(ordered_json{{"n_index", rec.n_index},
                                   {"rep", rec.rep},
                                   {"product_logw_var", rec.product_logw_var},
                                   {"shared_obj_error", rec.shared_obj_error}});
    csv += std::to_string(rec.n_index) + ',' + std::to_string(rec.rep) + ',' +
           fmt_double(rec.product_logw_var) + ',' + fmt_double(rec.shared_obj_error) + '\n';
  }

  ordered_json points = ordered_json::array();
  for (const auto& point : result.points)
    points.push_back(ordered_json{{"n", point.n},
                                  {"mean_logw_var", point.mean_logw_var},
                                  {"obj_error_variance", point.obj_error_variance}});

  Report report;
  report.doc = ordered_json{{"schema", "mcml-compare-schemes-report-v1"},
                            {"config", config_echo(result.config)},
                            {"records", std::move(records)},
                            {"aggregates",
                             ordered_json{{"points", std::move(points)},
                                          {"logw_var_slope", result.logw_var_slope}}}};
  report.records_csv = std::move(csv);
  return report;
}

ordered_json single_fit_json(const SingleFitResult& result) {
  return ordered_json{{"schema", "mcml-fit-report-v1"},
                      {"converged", result.fit.converged},
                      {"iterations", result.fit.iterations},
                      {"final_grad_norm", result.fit.final_grad_norm},
                      {"theta_hat", vec_to_json(result.fit.theta_hat)},
                      {"se", vec_to_json(result.se)},
                      {"ci_lower", vec_to_json(result.region.lower)},
                      {"ci_upper", vec_to_json(result.region.upper)},
                      {"level", result.region.level},
                      {"n", result.parts.n},
                      {"m", result.parts.m},
                      {"V_hat", matrix_to_json(result.parts.V_hat)},
                      {"D_hat", matrix_to_json(result.parts.D_hat)},
                      {"W_hat", matrix_to_json(result.parts.W_hat)},
                      {"w_tilde", result.w_tilde},
                      {"sandwich_cov", matrix_to_json(result.cov)},
                      {"warnings", result.fit.warnings}};
}

std::string csv_sibling_path(const std::string& json_path) {
  const auto dot = json_path.rfind('.');
  const auto slash = json_path.find_last_of("/\\");
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return json_path.substr(0, dot) + ".csv";
  return json_path + ".csv";
}

void write_report(const Report& report, const std::string& json_path) {
  std::ofstream out(json_path);
  if (!out) throw Error("cannot write report to " + json_path);
  out << report.doc.dump(2) << '\n';
  out.close();
  if (!out) throw Error("failed writing report to " + json_path);

  const std::string csv_path = csv_sibling_path(json_path);
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write record dump to " + csv_path);
  csv << report.records_csv;
  csv.close();
  if (!csv) throw Error("failed writing record dump to " + csv_path);
}

}  // namespace mcml
