#include "sqcir/commands.hpp"

#include <cmath>
#include <sstream>

#include "sqcir/csv_io.hpp"
#include "sqcir/error.hpp"

namespace sqcir::commands {

using nlohmann::json;

json report_header(const RunConfig& cfg, const char* kind) {
  json out;
  out["kind"] = kind;
  out["version"] = kVersion;
  out["preset"] = cfg.preset ? json(*cfg.preset) : json(nullptr);
  out["config"] = sqcir::to_json(cfg);
  return out;
}

json to_json(const RunMetrics& m) {
  return {{"peak_infected", m.peak_infected},
          {"peak_time", m.peak_time},
          {"duration", m.duration},
          {"avg_recovery_rate", m.avg_recovery_rate},
          {"total_infections", m.total_infections}};
}

SimulationResult simulate(const RunConfig& cfg) {
  const auto m = cfg.mob ? sample_mob_process(*cfg.mob, cfg.integrator.t0, cfg.integrator.tf)
                         : MobSchedule::constant(0.0);
  const auto schedule = epsilon_schedule(cfg.params, m);
  if (cfg.network) {
    return integrate_network(cfg.network->initial, cfg.network->params, cfg.integrator, schedule);
  }
  return integrate(cfg.initial, cfg.params, cfg.integrator, schedule);
}

json analyze(const RunConfig& cfg) {
  const ModelParams& p = cfg.params;
  json out = report_header(cfg, "analyze");

  json eq;
  const auto mfe = mob_free_equilibrium(p);
  eq["mfe"] = sqcir::to_json(mfe);
  eq["mfe_residual"] = max_abs_residual(mfe, p);
  StateVector guess = cfg.initial;
  try {
    const auto closed = endemic_equilibrium_closed(p);
    eq["endemic_closed"] = sqcir::to_json(closed.state);
    eq["endemic_closed_feasible"] = closed.feasible;
    guess = closed.state;
  } catch (const Error& e) {
    eq["endemic_closed"] = nullptr;
    eq["endemic_closed_error"] = e.what();
  }
  try {
    const auto root = endemic_equilibrium_numeric(p, guess);
    eq["endemic_numeric"] = sqcir::to_json(root.state);
    eq["endemic_residual"] = root.residual;
    eq["endemic_iterations"] = root.iterations;
    eq["endemic_numeric_feasible"] = root.feasible;
  } catch (const Error& e) {
    eq["endemic_numeric"] = nullptr;
    eq["endemic_numeric_error"] = e.what();
  }
  out["equilibrium"] = eq;

  const auto st = classify_stability(p);
  out["stability"] = {{"r0_paper", st.r0_paper},
                      {"r0_ngm", st.r0_ngm},
                      {"eigenvalues_mfe", st.eigenvalues_mfe},
                      {"classification", to_string(st.classification)},
                      {"criterion_agreement", st.criterion_agreement}};

  try {
    const auto th = critical_thresholds(p);
    out["thresholds"] = {
        {"epsilon_c", th.epsilon_c}, {"lambda_c", th.lambda_c}, {"phi_c", th.phi_c}};
  } catch (const Error& e) {
    out["thresholds"] = {{"error", e.what()}};
  }

  const auto si = sensitivity_indices(p);
  out["sensitivity"] = {{"pi_lambda", si.pi_lambda},
                        {"pi_epsilon", si.pi_epsilon},
                        {"pi_phi", si.pi_phi},
                        {"pi_nu", si.pi_nu}};
  return out;
}

BifurcationTable sweep(const RunConfig& cfg, ParamName parameter, double from, double to,
                       int steps) {
  return bifurcation_sweep(cfg.params, cfg.initial, from, to, steps, cfg.integrator, parameter);
}

std::string bifurcation_csv(const BifurcationTable& table) {
  std::ostringstream out;
  out << to_string(table.parameter) << ",r0_paper,long_run_c,long_run_i,persisted,error\n";
  for (const auto& row : table.rows) {
    out << format_number(row.value) << ',' << format_number(row.r0_paper) << ','
        << format_number(row.long_run_c) << ',' << format_number(row.long_run_i) << ','
        << (row.persisted ? "true" : "false") << ',';
    if (row.error) {
      std::string msg = *row.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << msg;
    }
    out << '\n';
  }
  return out.str();
}

EnsembleOutput monte_carlo(const RunConfig& cfg, std::size_t runs,
                           std::optional<std::uint64_t> seed) {
  RunConfig effective = cfg;
  MobProcessConfig mob = cfg.mob.value_or(MobProcessConfig{});
  if (seed) mob.seed = *seed;
  effective.mob = mob;

  const auto ens = run_ensemble(cfg.initial, cfg.params, mob, cfg.integrator, runs);

  EnsembleOutput out;
  json& rep = out.report;
  rep = report_header(effective, "mc");
  rep["runs"] = runs;
  rep["seed"] = mob.seed;
  rep["initial"] = sqcir::to_json(cfg.initial);
  rep["duration_threshold"] = kDefaultDurationThreshold;
  rep["baseline"] = to_json(ens.baseline);
  rep["mean"] = to_json(ens.mean);
  rep["stddev"] = to_json(ens.stddev);
  rep["successful"] = ens.successful;
  json per_run = json::array();
  std::ostringstream csv;
  csv << "run,seed,events,peak_infected,peak_time,duration,avg_recovery_rate,total_infections,"
         "error\n";
  auto csv_metrics = [&](const RunMetrics& m) {
    csv << format_number(m.peak_infected) << ',' << format_number(m.peak_time) << ','
        << format_number(m.duration) << ',' << format_number(m.avg_recovery_rate) << ','
        << format_number(m.total_infections);
  };
  csv << "baseline,,0,";
  csv_metrics(ens.baseline);
  csv << ",\n";
  for (std::size_t r = 0; r < ens.per_run.size(); ++r) {
    const auto& run = ens.per_run[r];
    json item = {{"run", r}, {"seed", run.seed}, {"events", run.events}};
    csv << r << ',' << run.seed << ',' << run.events << ',';
    if (run.metrics) {
      item["metrics"] = to_json(*run.metrics);
      csv_metrics(*run.metrics);
      csv << ",\n";
    } else {
      item["error"] = run.error.value_or("unknown failure");
      csv << ",,,,," << '"' << run.error.value_or("") << '"' << '\n';
    }
    per_run.push_back(item);
  }
  rep["per_run"] = per_run;
  out.runs_csv = csv.str();
  return out;
}

FitConfig make_fit_config(const RunConfig& cfg, const std::vector<ParamName>& free_override,
                          std::optional<std::uint64_t> seed) {
  const FitSettings settings = cfg.fit.value_or(FitSettings{});
  FitConfig out;
  out.free = !free_override.empty()  ? free_override
             : !settings.free.empty() ? settings.free
                                      : std::vector<ParamName>{ParamName::Epsilon};
  for (ParamName name : out.free) {
    const auto it = settings.bounds.find(name);
    out.bounds.push_back(it != settings.bounds.end() ? it->second : default_bounds(name));
  }
  out.fixed = cfg.params;
  out.initial = cfg.initial;
  out.n_starts = settings.n_starts;
  out.max_evals = settings.max_evals;
  out.tolerance = settings.tolerance;
  out.seed = seed.value_or(settings.seed);
  validate(out);
  return out;
}

json fit_report(const RunConfig& cfg, const ObservedSeries& observed,
                const std::vector<ParamName>& free_override, std::optional<std::uint64_t> seed) {
  const FitConfig fitcfg = make_fit_config(cfg, free_override, seed);

  RunConfig effective = cfg;
  FitSettings settings = cfg.fit.value_or(FitSettings{});
  settings.free = fitcfg.free;
  settings.seed = fitcfg.seed;
  for (std::size_t k = 0; k < fitcfg.free.size(); ++k) {
    settings.bounds[fitcfg.free[k]] = fitcfg.bounds[k];
  }
  effective.fit = settings;

  const FitResult result = fit(observed, fitcfg, cfg.integrator);

  auto named = [&](const std::vector<double>& values) {
    json obj = json::object();
    for (std::size_t k = 0; k < fitcfg.free.size(); ++k) {
      obj[std::string(to_string(fitcfg.free[k]))] = values[k];
    }
    return obj;
  };

  json rep = report_header(effective, "fit");
  rep["seed"] = fitcfg.seed;
  rep["incidence_definition"] = "cumulative inflow to I: integral of delta*C*I dt";
  rep["observations"] = observed.size();
  rep["theta"] = named(result.theta);
  rep["fitted_params"] = sqcir::to_json(assemble(fitcfg, result.theta));
  rep["objective"] = result.objective;
  rep["e_rel"] = result.e_rel ? json(*result.e_rel) : json(nullptr);
  rep["mae"] = result.mae;
  rep["n_evals"] = result.n_evals;
  rep["converged"] = result.converged;
  rep["best_start"] = result.best_start;
  json starts = json::array();
  for (const auto& s : result.starts) {
    starts.push_back({{"start", named(s.start)},
                      {"theta", named(s.theta)},
                      {"objective", s.objective},
                      {"n_evals", s.n_evals},
                      {"converged", s.converged}});
  }
  rep["starts"] = starts;
  return rep;
}

ObservedSeries generate_data(const RunConfig& cfg, std::optional<int> n_points, double noise_sd,
                             std::uint64_t seed) {
  const auto& ic = cfg.integrator;
  const int n = n_points.value_or(static_cast<int>(std::floor(ic.tf - ic.t0 + 1e-9)));
  if (n < 1) throw Error(ErrorCode::InvalidInput, "gen-data needs at least one point");
  if (ic.t0 + n > ic.tf + 1e-9) {
    throw Error(ErrorCode::InvalidInput, "requested points extend past integrator.tf");
  }
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) times.push_back(ic.t0 + k);
  IntegratorConfig run = ic;
  run.tf = std::max(ic.tf, times.back());
  return generate_synthetic(cfg.params, cfg.initial, times, noise_sd, seed, run);
}

}  // namespace sqcir::commands
