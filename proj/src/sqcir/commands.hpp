#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "sqcir/analytics.hpp"
#include "sqcir/config.hpp"
#include "sqcir/fitting.hpp"
#include "sqcir/mob_events.hpp"

// Whole-command operations behind the C API and the CLI. Each one takes the
// effective RunConfig and produces a serializable result.
namespace sqcir::commands {

using SimulationResult = std::variant<Trajectory, NetworkTrajectory>;

SimulationResult simulate(const RunConfig& cfg);

/// Equilibria, stability, thresholds and sensitivity as one JSON document.
nlohmann::json analyze(const RunConfig& cfg);

BifurcationTable sweep(const RunConfig& cfg, ParamName parameter, double from, double to,
                       int steps);
std::string bifurcation_csv(const BifurcationTable& table);

struct EnsembleOutput {
  nlohmann::json report;
  std::string runs_csv;
};

/// Uses cfg.mob (or defaults) with the seed replaced by `seed` when given.
EnsembleOutput monte_carlo(const RunConfig& cfg, std::size_t runs,
                           std::optional<std::uint64_t> seed);

FitConfig make_fit_config(const RunConfig& cfg, const std::vector<ParamName>& free_override,
                          std::optional<std::uint64_t> seed);

/// Throws FitFailure (with the partial result) when every start fails.
nlohmann::json fit_report(const RunConfig& cfg, const ObservedSeries& observed,
                          const std::vector<ParamName>& free_override,
                          std::optional<std::uint64_t> seed);

/// Daily points t0+1 .. t0+n_points (default floor(tf - t0)).
ObservedSeries generate_data(const RunConfig& cfg, std::optional<int> n_points, double noise_sd,
                             std::uint64_t seed);

/// Common header of every JSON report: version, preset and config echo.
nlohmann::json report_header(const RunConfig& cfg, const char* kind);

nlohmann::json to_json(const RunMetrics& m);

}  // namespace sqcir::commands
