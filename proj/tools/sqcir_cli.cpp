// Command-line front end. Everything goes through the C interface.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sqcir/sqcir.h"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2 };

struct Failure {
  int exit_code;
  std::string message;
};

struct Options {
  std::string config;
  std::string out;
  std::size_t runs = 20;
  std::optional<std::uint64_t> seed;
  std::string param = "epsilon";
  double from = 0.0;
  double to = 0.0;
  int steps = 40;
  std::string data;
  std::string free;
  double noise = 0.0;
};

using ConfigPtr = std::unique_ptr<sqcir_config, decltype(&sqcir_config_free)>;
using SeriesPtr = std::unique_ptr<sqcir_series, decltype(&sqcir_series_free)>;
using TrajectoryPtr = std::unique_ptr<sqcir_trajectory, decltype(&sqcir_trajectory_free)>;

struct OwnedString {
  char* text = nullptr;
  ~OwnedString() { sqcir_string_free(text); }
};

void check(sqcir_status status, int exit_code) {
  if (status != SQCIR_OK) {
    throw Failure{exit_code, std::string(sqcir_status_name(status)) + ": " + sqcir_last_error()};
  }
}

ConfigPtr load_config(const std::string& path) {
  sqcir_config* raw = nullptr;
  check(sqcir_config_load(path.c_str(), &raw), kUsage);
  return {raw, &sqcir_config_free};
}

void emit(const std::string& path, const char* text) {
  if (path.empty()) {
    std::cout << text;
    if (*text && text[std::char_traits<char>::length(text) - 1] != '\n') std::cout << '\n';
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Failure{kRuntime, "io: cannot open '" + path + "' for writing"};
  file << text;
  if (!file) throw Failure{kRuntime, "io: failed writing '" + path + "'"};
}

// report.json -> report.runs.csv; anything else gets the suffix appended.
std::string runs_csv_path(const std::string& out) {
  const std::string ext = ".json";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
    return out.substr(0, out.size() - ext.size()) + ".runs.csv";
  }
  return out + ".runs.csv";
}

void run_simulate(const Options& o) {
  auto cfg = load_config(o.config);
  sqcir_trajectory* raw = nullptr;
  check(sqcir_simulate(cfg.get(), &raw), kRuntime);
  TrajectoryPtr traj(raw, &sqcir_trajectory_free);
  OwnedString csv;
  check(sqcir_trajectory_to_csv(traj.get(), &csv.text), kRuntime);
  emit(o.out, csv.text);
}

void run_analyze(const Options& o) {
  auto cfg = load_config(o.config);
  OwnedString json;
  check(sqcir_analyze_json(cfg.get(), &json.text), kRuntime);
  emit(o.out, json.text);
}

void run_sweep(const Options& o) {
  auto cfg = load_config(o.config);
  OwnedString csv;
  const auto status = sqcir_sweep_csv(cfg.get(), o.param.c_str(), o.from, o.to, o.steps, &csv.text);
  check(status, status == SQCIR_E_INVALID_INPUT ? kUsage : kRuntime);
  emit(o.out, csv.text);
}

void run_mc(const Options& o) {
  auto cfg = load_config(o.config);
  OwnedString json;
  OwnedString csv;
  const std::uint64_t seed = o.seed.value_or(0);
  check(sqcir_mc_json(cfg.get(), o.runs, o.seed ? &seed : nullptr, &json.text, &csv.text),
        kRuntime);
  emit(o.out, json.text);
  if (!o.out.empty()) emit(runs_csv_path(o.out), csv.text);
}

void run_fit(const Options& o) {
  auto cfg = load_config(o.config);
  sqcir_series* raw = nullptr;
  check(sqcir_series_load(o.data.c_str(), &raw), kUsage);
  SeriesPtr series(raw, &sqcir_series_free);
  OwnedString json;
  const std::uint64_t seed = o.seed.value_or(0);
  const auto status = sqcir_fit_json(cfg.get(), series.get(), o.free.c_str(),
                                     o.seed ? &seed : nullptr, &json.text);
  check(status, status == SQCIR_E_INVALID_INPUT ? kUsage : kRuntime);
  emit(o.out, json.text);
}

void run_gen_data(const Options& o) {
  auto cfg = load_config(o.config);
  sqcir_series* raw = nullptr;
  check(sqcir_gen_data(cfg.get(), 0, o.noise, o.seed.value_or(0), &raw), kRuntime);
  SeriesPtr series(raw, &sqcir_series_free);
  OwnedString csv;
  check(sqcir_series_to_csv(series.get(), &csv.text), kRuntime);
  emit(o.out, csv.text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SQCIR mob-propagation model toolkit"};
  app.set_version_flag("--version", sqcir_version());
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--out", o.out, "output file (default: stdout)");
  };

  auto* simulate = app.add_subcommand("simulate", "integrate and write the trajectory CSV");
  add_common(simulate);

  auto* analyze = app.add_subcommand("analyze", "equilibria, stability, thresholds, sensitivity");
  add_common(analyze);

  auto* sweep = app.add_subcommand("sweep", "bifurcation sweep over one parameter");
  add_common(sweep);
  sweep->add_option("--param", o.param, "parameter to vary")->capture_default_str();
  sweep->add_option("--from", o.from, "first value")->required();
  sweep->add_option("--to", o.to, "last value")->required();
  sweep->add_option("--steps", o.steps, "number of grid points")->capture_default_str();

  auto* mc = app.add_subcommand("mc", "Monte Carlo ensemble of mob-event runs");
  add_common(mc);
  mc->add_option("--runs", o.runs, "number of stochastic runs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", o.seed, "master seed (overrides mob.seed)");

  auto* fit = app.add_subcommand("fit", "fit free parameters to cumulative incidence");
  add_common(fit);
  fit->add_option("--data", o.data, "series CSV with header t,cumulative")->required();
  fit->add_option("--free", o.free, "comma-separated free parameters (default epsilon)");
  fit->add_option("--seed", o.seed, "multi-start seed");

  auto* gen = app.add_subcommand("gen-data", "synthetic cumulative incidence series");
  add_common(gen);
  gen->add_option("--noise", o.noise, "Gaussian noise standard deviation")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", o.seed, "noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*simulate) run_simulate(o);
    else if (*analyze) run_analyze(o);
    else if (*sweep) run_sweep(o);
    else if (*mc) run_mc(o);
    else if (*fit) run_fit(o);
    else if (*gen) run_gen_data(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  }
  return kOk;
}
