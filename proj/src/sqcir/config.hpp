#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "sqcir/fitting.hpp"
#include "sqcir/integrator.hpp"
#include "sqcir/mob_events.hpp"
#include "sqcir/model.hpp"

namespace sqcir {

inline constexpr const char* kVersion = "0.1.0";

struct NetworkConfig {
  NetworkParams params;
  NetworkState initial;
};

struct FitSettings {
  std::vector<ParamName> free;
  std::map<ParamName, ParameterBounds> bounds;
  int n_starts = 4;
  int max_evals = 5000;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::optional<std::string> preset;
  ModelParams params;
  StateVector initial;
  IntegratorConfig integrator;
  std::optional<MobProcessConfig> mob;
  std::optional<NetworkConfig> network;
  std::optional<FitSettings> fit;
};

/// table1, fig-sim, fig-peak. Empty for unknown names.
std::optional<ModelParams> preset_params(std::string_view name);
std::vector<std::string> preset_names();

/// (max(Lambda/phi - 3, 0), 1, 1, 1, 0)
StateVector default_initial(const ModelParams& params);

/// Strict parse: unknown keys, wrong types and invariant violations all
/// throw, naming the offending field. The preset (if any) is expanded before
/// field overrides.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);

/// Full effective configuration; feeding it back to parse_config yields an
/// identical RunConfig.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const StateVector& state);

}  // namespace sqcir
