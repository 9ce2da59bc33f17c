#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>

#include "mcml/dataset_io.hpp"
#include "mcml/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitEstimationError = 3;

struct CommonArgs {
  std::string config_path;
  std::string data_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int threads = -1;
  int m = 0;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_data) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  if (with_data)
    cmd->add_option("--data", args.data_path, "dataset CSV (header: y..., x...)")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_path, "report path (JSON; record CSV written alongside)");
  cmd->add_option("--threads", args.threads, "replication threads (0 = hardware)");
}

mcml::ExperimentConfig load_with_overrides(const CLI::App* cmd, const CommonArgs& args) {
  mcml::ExperimentConfig config = mcml::load_config(args.config_path);
  if (cmd->count("--seed") > 0) config.seed = args.seed;
  if (cmd->count("--out") > 0) config.out = args.out_path;
  if (cmd->count("--threads") > 0) config.threads = args.threads;
  const CLI::Option* m_option = cmd->get_option_no_throw("--m");
  if (m_option != nullptr && m_option->count() > 0) config.m = args.m;
  return config;
}

void emit(const mcml::Report& report, const mcml::ExperimentConfig& config) {
  if (config.out.empty()) {
    std::cout << report.doc.dump(2) << '\n';
  } else {
    mcml::write_report(report, config.out);
    std::cout << report.doc.at("aggregates").dump(2) << '\n';
    std::cerr << "report written to " << config.out << " and "
              << mcml::csv_sibling_path(config.out) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo maximum likelihood for models with intractable norming constants"};
  app.require_subcommand(1);

  CommonArgs fit_args, coverage_args, sweep_args, compare_args;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one dataset and report plug-in errors");
  add_common_options(fit_cmd, fit_args, /*with_data=*/true);
  fit_cmd->add_option("--m", fit_args.m, "override the instrumental sample size");

  CLI::App* coverage_cmd =
      app.add_subcommand("coverage", "replicated coverage/normality experiment");
  add_common_options(coverage_cmd, coverage_args, /*with_data=*/false);

  CLI::App* sweep_cmd =
      app.add_subcommand("psi-sweep", "MC-error variance across instrumental parameters");
  add_common_options(sweep_cmd, sweep_args, /*with_data=*/false);

  CLI::App* compare_cmd =
      app.add_subcommand("compare-schemes", "product-form versus shared-sample weight growth");
  add_common_options(compare_cmd, compare_args, /*with_data=*/false);

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (fit_cmd->parsed()) {
      const mcml::ExperimentConfig config = load_with_overrides(fit_cmd, fit_args);
      const mcml::Dataset data = mcml::load_dataset(fit_args.data_path);
      const mcml::SingleFitResult result = mcml::run_single_fit(data, config);
      const auto doc = mcml::single_fit_json(result);
      std::cout << doc.dump(2) << '\n';
      if (!config.out.empty()) {
        std::ofstream out(config.out);
        if (!out) throw mcml::Error("cannot write report to " + config.out);
        out << doc.dump(2) << '\n';
      }
    } else if (coverage_cmd->parsed()) {
      const mcml::ExperimentConfig config = load_with_overrides(coverage_cmd, coverage_args);
      emit(mcml::coverage_report(mcml::run_coverage(config)), config);
    } else if (sweep_cmd->parsed()) {
      const mcml::ExperimentConfig config = load_with_overrides(sweep_cmd, sweep_args);
      emit(mcml::psi_sweep_report(mcml::run_psi_sweep(config)), config);
    } else if (compare_cmd->parsed()) {
      const mcml::ExperimentConfig config = load_with_overrides(compare_cmd, compare_args);
      emit(mcml::compare_report(mcml::run_compare_schemes(config)), config);
    }
  } catch (const mcml::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const mcml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const mcml::DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const mcml::DimensionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const mcml::NoOracleError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const mcml::Error& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return kExitEstimationError;
  }

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  std::cerr << "elapsed: " << elapsed.count() << " s\n";
  return kExitOk;
}
