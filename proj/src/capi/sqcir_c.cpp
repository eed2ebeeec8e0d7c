#include "sqcir/sqcir.h"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <variant>

#include "sqcir/analytics.hpp"
#include "sqcir/commands.hpp"
#include "sqcir/config.hpp"
#include "sqcir/csv_io.hpp"
#include "sqcir/error.hpp"
#include "sqcir/fitting.hpp"

struct sqcir_config {
  sqcir::RunConfig value;
};

struct sqcir_trajectory {
  sqcir::commands::SimulationResult value;
};

struct sqcir_series {
  sqcir::ObservedSeries value;
};

namespace {

thread_local std::string g_last_error;

sqcir_status to_status(sqcir::ErrorCode code) {
  using sqcir::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput: return SQCIR_E_INVALID_INPUT;
    case ErrorCode::InvalidParameter: return SQCIR_E_INVALID_PARAMETER;
    case ErrorCode::ParseError: return SQCIR_E_PARSE;
    case ErrorCode::SchemaError: return SQCIR_E_SCHEMA;
    case ErrorCode::InvariantViolation: return SQCIR_E_INVARIANT;
    case ErrorCode::StepSize: return SQCIR_E_STEP_SIZE;
    case ErrorCode::Divergence: return SQCIR_E_DIVERGENCE;
    case ErrorCode::Convergence: return SQCIR_E_CONVERGENCE;
    case ErrorCode::DegenerateParameter: return SQCIR_E_DEGENERATE;
    case ErrorCode::UndefinedMetric: return SQCIR_E_UNDEFINED;
    case ErrorCode::FitFailure: return SQCIR_E_FIT_FAILURE;
    case ErrorCode::Io: return SQCIR_E_IO;
  }
  return SQCIR_E_INTERNAL;
}

sqcir_status fail(sqcir_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <typename Body>
sqcir_status guarded(Body&& body) {
  try {
    g_last_error.clear();
    body();
    return SQCIR_OK;
  } catch (const sqcir::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SQCIR_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SQCIR_E_INTERNAL, e.what());
  }
}

sqcir::ModelParams from_c(const sqcir_params& p) {
  return {p.lambda, p.alpha, p.epsilon0, p.delta, p.mu, p.nu, p.phi};
}

sqcir_params to_c(const sqcir::ModelParams& p) {
  return {p.lambda, p.alpha, p.epsilon0, p.delta, p.mu, p.nu, p.phi};
}

sqcir::StateVector from_c(const sqcir_state& x) { return {x.s, x.q, x.c, x.i, x.r}; }

sqcir_state to_c(const sqcir::StateVector& x) { return {x.s, x.q, x.c, x.i, x.r}; }

char* duplicate(const std::string& text) {
  auto* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

#define SQCIR_REQUIRE(cond)                                                   \
  do {                                                                        \
    if (!(cond)) return fail(SQCIR_E_ARGUMENT, "invalid argument: " #cond);   \
  } while (0)

}  // namespace

extern "C" {

const char* sqcir_version(void) { return sqcir::kVersion; }

const char* sqcir_last_error(void) { return g_last_error.c_str(); }

const char* sqcir_status_name(sqcir_status status) {
  switch (status) {
    case SQCIR_OK: return "ok";
    case SQCIR_E_ARGUMENT: return "argument";
    case SQCIR_E_INVALID_INPUT: return "invalid-input";
    case SQCIR_E_INVALID_PARAMETER: return "invalid-parameter";
    case SQCIR_E_PARSE: return "parse-error";
    case SQCIR_E_SCHEMA: return "schema-error";
    case SQCIR_E_INVARIANT: return "invariant-violation";
    case SQCIR_E_STEP_SIZE: return "step-size";
    case SQCIR_E_DIVERGENCE: return "divergence";
    case SQCIR_E_CONVERGENCE: return "convergence";
    case SQCIR_E_DEGENERATE: return "degenerate-parameter";
    case SQCIR_E_UNDEFINED: return "undefined-metric";
    case SQCIR_E_FIT_FAILURE: return "fit-failure";
    case SQCIR_E_IO: return "io";
    case SQCIR_E_INTERNAL: return "internal";
  }
  return "unknown";
}

void sqcir_string_free(char* text) { std::free(text); }

sqcir_status sqcir_config_load(const char* path, sqcir_config** out) {
  SQCIR_REQUIRE(path && out);
  return guarded([&] { *out = new sqcir_config{sqcir::load_config(path)}; });
}

sqcir_status sqcir_config_parse(const char* json_text, sqcir_config** out) {
  SQCIR_REQUIRE(json_text && out);
  return guarded([&] { *out = new sqcir_config{sqcir::parse_config_text(json_text)}; });
}

sqcir_status sqcir_config_from_preset(const char* name, sqcir_config** out) {
  SQCIR_REQUIRE(name && out);
  return guarded([&] {
    *out = new sqcir_config{sqcir::parse_config(nlohmann::json{{"preset", name}})};
  });
}

void sqcir_config_free(sqcir_config* cfg) { delete cfg; }

sqcir_status sqcir_config_params(const sqcir_config* cfg, sqcir_params* out) {
  SQCIR_REQUIRE(cfg && out);
  *out = to_c(cfg->value.params);
  return SQCIR_OK;
}

sqcir_status sqcir_config_initial(const sqcir_config* cfg, sqcir_state* out) {
  SQCIR_REQUIRE(cfg && out);
  *out = to_c(cfg->value.initial);
  return SQCIR_OK;
}

sqcir_status sqcir_config_to_json(const sqcir_config* cfg, char** out) {
  SQCIR_REQUIRE(cfg && out);
  return guarded([&] { *out = duplicate(sqcir::to_json(cfg->value).dump(2)); });
}

sqcir_status sqcir_derivative_reduced(const sqcir_state* state, const sqcir_params* params,
                                      double epsilon_t, sqcir_state* out) {
  SQCIR_REQUIRE(state && params && out);
  return guarded([&] {
    *out = to_c(sqcir::derivative_reduced(from_c(*state), from_c(*params), epsilon_t));
  });
}

sqcir_status sqcir_derivative_network(size_t k, const sqcir_state* states,
                                      const double* t_matrix, const sqcir_params* per_region,
                                      double epsilon_t, sqcir_state* out) {
  SQCIR_REQUIRE(k >= 1 && states && per_region && out);
  return guarded([&] {
    sqcir::NetworkParams net;
    net.k = k;
    if (t_matrix) net.mobility.assign(t_matrix, t_matrix + k * k);
    sqcir::NetworkState state;
    for (size_t i = 0; i < k; ++i) {
      net.per_region.push_back(from_c(per_region[i]));
      state.regions.push_back(from_c(states[i]));
    }
    const auto rates = sqcir::derivative_network(state, net, epsilon_t);
    for (size_t i = 0; i < k; ++i) out[i] = to_c(rates.regions[i]);
  });
}

double sqcir_total_population(const sqcir_state* state) {
  return state ? sqcir::total_population(from_c(*state)) : 0.0;
}

int sqcir_in_invariant_region(const sqcir_state* state, const sqcir_params* params) {
  if (!state || !params) return 0;
  return sqcir::in_invariant_region(from_c(*state), from_c(*params)) ? 1 : 0;
}

double sqcir_closed_form_total(double n0, const sqcir_params* params, double t) {
  return params ? sqcir::closed_form_total(n0, from_c(*params), t) : 0.0;
}

sqcir_status sqcir_r0_paper(const sqcir_params* params, double* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] { *out = sqcir::r0_paper(from_c(*params)); });
}

sqcir_status sqcir_r0_next_generation(const sqcir_params* params, double* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] { *out = sqcir::r0_next_generation(from_c(*params)); });
}

sqcir_status sqcir_effective_r(const sqcir_params* params, double m, double* out) {
  SQCIR_REQUIRE(params && out);
  if (!(m >= 0.0)) return fail(SQCIR_E_ARGUMENT, "mob intensity must be >= 0");
  return guarded([&] { *out = sqcir::effective_r(from_c(*params), m); });
}

sqcir_status sqcir_mob_free_equilibrium(const sqcir_params* params, sqcir_state* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] { *out = to_c(sqcir::mob_free_equilibrium(from_c(*params))); });
}

sqcir_status sqcir_endemic_closed(const sqcir_params* params, sqcir_state* out, int* feasible) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] {
    const auto eq = sqcir::endemic_equilibrium_closed(from_c(*params));
    *out = to_c(eq.state);
    if (feasible) *feasible = eq.feasible ? 1 : 0;
  });
}

sqcir_status sqcir_endemic_numeric(const sqcir_params* params, const sqcir_state* guess,
                                   sqcir_state* out, double* residual, int* iterations) {
  SQCIR_REQUIRE(params && guess && out);
  return guarded([&] {
    const auto root = sqcir::endemic_equilibrium_numeric(from_c(*params), from_c(*guess));
    *out = to_c(root.state);
    if (residual) *residual = root.residual;
    if (iterations) *iterations = root.iterations;
  });
}

sqcir_status sqcir_jacobian(const sqcir_state* state, const sqcir_params* params, double* out25) {
  SQCIR_REQUIRE(state && params && out25);
  return guarded([&] {
    const auto j = sqcir::jacobian(from_c(*state), from_c(*params));
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) out25[r * 5 + c] = j(r, c);
    }
  });
}

sqcir_status sqcir_eigenvalues_at_mfe(const sqcir_params* params, double* out5) {
  SQCIR_REQUIRE(params && out5);
  return guarded([&] {
    const auto ev = sqcir::eigenvalues_at_mfe(from_c(*params));
    std::copy(ev.begin(), ev.end(), out5);
  });
}

sqcir_status sqcir_classify_stability(const sqcir_params* params, sqcir_stability* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] {
    const auto st = sqcir::classify_stability(from_c(*params));
    out->r0_paper = st.r0_paper;
    out->r0_ngm = st.r0_ngm;
    std::copy(st.eigenvalues_mfe.begin(), st.eigenvalues_mfe.end(), out->eigenvalues_mfe);
    out->stable = st.classification == sqcir::Stability::Stable ? 1 : 0;
    out->criterion_agreement = st.criterion_agreement ? 1 : 0;
  });
}

sqcir_status sqcir_critical_thresholds(const sqcir_params* params, sqcir_thresholds* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] {
    const auto th = sqcir::critical_thresholds(from_c(*params));
    *out = {th.epsilon_c, th.lambda_c, th.phi_c};
  });
}

sqcir_status sqcir_sensitivity_indices(const sqcir_params* params, sqcir_sensitivity* out) {
  SQCIR_REQUIRE(params && out);
  return guarded([&] {
    const auto si = sqcir::sensitivity_indices(from_c(*params));
    *out = {si.pi_lambda, si.pi_epsilon, si.pi_phi, si.pi_nu};
  });
}

sqcir_status sqcir_error_metrics(const double* observed, const double* predicted, size_t n,
                                 double* e_rel, double* mae) {
  SQCIR_REQUIRE(observed && predicted && mae && n > 0);
  bool undefined = false;
  const auto status = guarded([&] {
    const auto m = sqcir::error_metrics({observed, n}, {predicted, n});
    *mae = m.mae;
    if (m.e_rel) {
      if (e_rel) *e_rel = *m.e_rel;
    } else {
      undefined = true;
    }
  });
  if (status == SQCIR_OK && undefined) {
    return fail(SQCIR_E_UNDEFINED, "relative error undefined: predicted series has zero norm");
  }
  return status;
}

sqcir_status sqcir_simulate(const sqcir_config* cfg, sqcir_trajectory** out) {
  SQCIR_REQUIRE(cfg && out);
  return guarded([&] { *out = new sqcir_trajectory{sqcir::commands::simulate(cfg->value)}; });
}

void sqcir_trajectory_free(sqcir_trajectory* traj) { delete traj; }

size_t sqcir_trajectory_length(const sqcir_trajectory* traj) {
  if (!traj) return 0;
  return std::visit([](const auto& t) { return t.size(); }, traj->value);
}

size_t sqcir_trajectory_regions(const sqcir_trajectory* traj) {
  if (!traj) return 0;
  if (const auto* net = std::get_if<sqcir::NetworkTrajectory>(&traj->value)) {
    return net->states.empty() ? 0 : net->states.front().regions.size();
  }
  return 1;
}

sqcir_status sqcir_trajectory_point(const sqcir_trajectory* traj, size_t index, size_t region,
                                    double* t, sqcir_state* state, double* epsilon) {
  SQCIR_REQUIRE(traj);
  if (index >= sqcir_trajectory_length(traj) || region >= sqcir_trajectory_regions(traj)) {
    return fail(SQCIR_E_ARGUMENT, "trajectory index out of range");
  }
  std::visit(
      [&](const auto& tr) {
        if (t) *t = tr.times[index];
        if (epsilon) *epsilon = tr.epsilon_used[index];
        if (state) {
          using T = std::decay_t<decltype(tr)>;
          if constexpr (std::is_same_v<T, sqcir::Trajectory>) {
            *state = to_c(tr.states[index]);
          } else {
            *state = to_c(tr.states[index].regions[region]);
          }
        }
      },
      traj->value);
  return SQCIR_OK;
}

sqcir_status sqcir_trajectory_to_csv(const sqcir_trajectory* traj, char** out) {
  SQCIR_REQUIRE(traj && out);
  return guarded([&] {
    std::ostringstream csv;
    std::visit([&](const auto& tr) { sqcir::write_trajectory_csv(tr, csv); }, traj->value);
    *out = duplicate(csv.str());
  });
}

sqcir_status sqcir_analyze_json(const sqcir_config* cfg, char** out) {
  SQCIR_REQUIRE(cfg && out);
  return guarded([&] { *out = duplicate(sqcir::commands::analyze(cfg->value).dump(2)); });
}

sqcir_status sqcir_sweep_csv(const sqcir_config* cfg, const char* param, double from, double to,
                             int steps, char** out) {
  SQCIR_REQUIRE(cfg && out);
  return guarded([&] {
    const auto name = sqcir::parse_param_name(param ? param : "epsilon");
    const auto table = sqcir::commands::sweep(cfg->value, name, from, to, steps);
    *out = duplicate(sqcir::commands::bifurcation_csv(table));
  });
}

sqcir_status sqcir_mc_json(const sqcir_config* cfg, size_t runs, const uint64_t* seed,
                           char** report_json, char** runs_csv) {
  SQCIR_REQUIRE(cfg && report_json && runs >= 1);
  return guarded([&] {
    std::optional<std::uint64_t> chosen;
    if (seed) chosen = *seed;
    const auto result = sqcir::commands::monte_carlo(cfg->value, runs, chosen);
    *report_json = duplicate(result.report.dump(2));
    if (runs_csv) *runs_csv = duplicate(result.runs_csv);
  });
}

sqcir_status sqcir_fit_json(const sqcir_config* cfg, const sqcir_series* observed,
                            const char* free_list, const uint64_t* seed, char** out) {
  SQCIR_REQUIRE(cfg && observed && out);
  return guarded([&] {
    std::vector<sqcir::ParamName> free;
    if (free_list) {
      std::istringstream names(free_list);
      std::string name;
      while (std::getline(names, name, ',')) {
        if (!name.empty()) free.push_back(sqcir::parse_param_name(name));
      }
    }
    std::optional<std::uint64_t> chosen;
    if (seed) chosen = *seed;
    *out = duplicate(
        sqcir::commands::fit_report(cfg->value, observed->value, free, chosen).dump(2));
  });
}

sqcir_status sqcir_series_load(const char* path, sqcir_series** out) {
  SQCIR_REQUIRE(path && out);
  return guarded([&] { *out = new sqcir_series{sqcir::load_series(path)}; });
}

sqcir_status sqcir_series_parse(const char* csv_text, sqcir_series** out) {
  SQCIR_REQUIRE(csv_text && out);
  return guarded([&] {
    std::istringstream in(csv_text);
    *out = new sqcir_series{sqcir::parse_series_csv(in)};
  });
}

sqcir_status sqcir_gen_data(const sqcir_config* cfg, int n_points, double noise_sd,
                            uint64_t seed, sqcir_series** out) {
  SQCIR_REQUIRE(cfg && out);
  return guarded([&] {
    std::optional<int> n;
    if (n_points > 0) n = n_points;
    *out = new sqcir_series{sqcir::commands::generate_data(cfg->value, n, noise_sd, seed)};
  });
}

void sqcir_series_free(sqcir_series* series) { delete series; }

size_t sqcir_series_length(const sqcir_series* series) {
  return series ? series->value.size() : 0;
}

sqcir_status sqcir_series_point(const sqcir_series* series, size_t index, double* t,
                                double* cumulative) {
  SQCIR_REQUIRE(series);
  if (index >= series->value.size()) return fail(SQCIR_E_ARGUMENT, "series index out of range");
  if (t) *t = series->value.times[index];
  if (cumulative) *cumulative = series->value.cumulative[index];
  return SQCIR_OK;
}

sqcir_status sqcir_series_to_csv(const sqcir_series* series, char** out) {
  SQCIR_REQUIRE(series && out);
  return guarded([&] {
    std::ostringstream csv;
    sqcir::write_series_csv(series->value, csv);
    *out = duplicate(csv.str());
  });
}

}  // extern "C"
