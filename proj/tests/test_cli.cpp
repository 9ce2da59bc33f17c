#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "") : path(name) {
    if (!content.empty()) {
      std::ofstream out(path);
      out << content;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string(MCML_CLI_PATH) + " " + args + " > " + stdout_file + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kToyFitConfig = R"({
  "model": {"kind": "toy"},
  "instrumental": {"kind": "model_at", "psi": [0.0]},
  "m": 1000000,
  "seed": 20240915
})";

std::string toy_csv(int n, int ones) {
  std::string text = "y\n";
  for (int i = 0; i < n; ++i) text += (i < ones) ? "1\n" : "0\n";
  return text;
}

}  // namespace

TEST_CASE("fit recovers the toy MLE from a CSV dataset") {
  TempFile config("cli_fit_config.json", kToyFitConfig);
  TempFile data("cli_fit_data.csv", toy_csv(400, 300));
  TempFile out("cli_fit_stdout.json");

  const int code =
      run_cli("fit --config " + config.path + " --data " + data.path, out.path);
  CHECK(code == 0);

  const auto doc = nlohmann::json::parse(slurp(out.path));
  CHECK(doc.at("converged").get<bool>());
  // With m = 1e6 the MC part of the error is ~2e-3, so log 3 to 0.01.
  CHECK(std::abs(doc.at("theta_hat")[0].get<double>() - std::log(3.0)) < 0.01);
  CHECK(doc.at("se")[0].get<double>() > 0.0);
}

TEST_CASE("fit exit codes distinguish input and estimation failures") {
  TempFile config("cli_codes_config.json", kToyFitConfig);

  TempFile empty_csv("cli_empty.csv", " ");
  CHECK(run_cli("fit --config " + config.path + " --data " + empty_csv.path) == 2);

  TempFile header_only("cli_header_only.csv", "y\n");
  CHECK(run_cli("fit --config " + config.path + " --data " + header_only.path) == 2);

  CHECK(run_cli("fit --config " + config.path + " --data cli_nonexistent.csv") == 2);

  TempFile bad_config("cli_bad_config.json", "{ nope");
  TempFile data("cli_codes_data.csv", toy_csv(10, 5));
  CHECK(run_cli("fit --config " + bad_config.path + " --data " + data.path) == 2);

  // Divergent MLE: every response is 1.
  TempFile all_ones("cli_all_ones.csv", toy_csv(12, 12));
  CHECK(run_cli("fit --config " + config.path + " --data " + all_ones.path + " --m 1000") == 3);
}

TEST_CASE("coverage runs write byte-identical reports for a fixed seed") {
  const char* config_text = R"({
    "model": {"kind": "toy"},
    "instrumental": {"kind": "model_at", "psi": [0.0]},
    "theta_star": [0.0],
    "n": 150, "m": 150, "replications": 6, "seed": 31
  })";
  TempFile config("cli_cov_config.json", config_text);
  TempFile out_a("cli_cov_a.json");
  TempFile out_a_csv("cli_cov_a.csv");
  TempFile out_b("cli_cov_b.json");
  TempFile out_b_csv("cli_cov_b.csv");

  CHECK(run_cli("coverage --config " + config.path + " --out " + out_a.path) == 0);
  CHECK(run_cli("coverage --config " + config.path + " --out " + out_b.path +
                " --threads 4") == 0);

  const std::string a = slurp(out_a.path);
  CHECK(!a.empty());
  CHECK(a == slurp(out_b.path));
  CHECK(slurp(out_a_csv.path) == slurp(out_b_csv.path));
}

TEST_CASE("psi-sweep and compare-schemes subcommands run end to end") {
  const char* sweep_text = R"({
    "model": {"kind": "toy"},
    "psi_grid": [[-1.0], [0.0], [1.0]],
    "m": 500, "replications": 10, "seed": 41,
    "covariates": [[]]
  })";
  TempFile sweep_config("cli_sweep_config.json", sweep_text);
  TempFile sweep_out("cli_sweep_out.json");
  TempFile sweep_csv("cli_sweep_out.csv");
  CHECK(run_cli("psi-sweep --config " + sweep_config.path + " --out " + sweep_out.path) == 0);
  const auto sweep_doc = nlohmann::json::parse(slurp(sweep_out.path));
  CHECK(sweep_doc.at("aggregates").at("points").size() == 3);

  const char* compare_text = R"({
    "model": {"kind": "toy"},
    "instrumental": {"kind": "uniform"},
    "theta_star": [1.0],
    "n_grid": [1, 2, 4], "m": 400, "replications": 4, "seed": 43
  })";
  TempFile compare_config("cli_compare_config.json", compare_text);
  TempFile compare_out("cli_compare_out.json");
  TempFile compare_csv("cli_compare_out.csv");
  CHECK(run_cli("compare-schemes --config " + compare_config.path + " --out " +
                compare_out.path) == 0);
  const auto compare_doc = nlohmann::json::parse(slurp(compare_out.path));
  CHECK(compare_doc.at("aggregates").at("points").size() == 3);

  // Seed override changes the report; repeating the override reproduces it.
  TempFile alt_a("cli_sweep_alt_a.json");
  TempFile alt_a_csv("cli_sweep_alt_a.csv");
  TempFile alt_b("cli_sweep_alt_b.json");
  TempFile alt_b_csv("cli_sweep_alt_b.csv");
  CHECK(run_cli("psi-sweep --config " + sweep_config.path + " --seed 99 --out " + alt_a.path) ==
        0);
  CHECK(run_cli("psi-sweep --config " + sweep_config.path + " --seed 99 --out " + alt_b.path) ==
        0);
  CHECK(slurp(alt_a.path) == slurp(alt_b.path));
  CHECK(slurp(alt_a.path) != slurp(sweep_out.path));
}

TEST_CASE("unknown flags and missing subcommands fail fast") {
  CHECK(run_cli("") != 0);
  CHECK(run_cli("fit") != 0);  // missing required --config/--data
}
