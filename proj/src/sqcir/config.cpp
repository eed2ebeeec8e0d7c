#include "sqcir/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "sqcir/error.hpp"

namespace sqcir {

using nlohmann::json;

namespace {

struct Preset {
  const char* name;
  ModelParams params;
};

// Table 1 estimates and the two figure-caption parameter sets.
constexpr Preset kPresets[] = {
    {"table1", {4.0, 0.14, 0.03, 0.10, 0.10, 0.05, 0.01}},
    {"fig-sim", {2.0, 0.14, 0.26, 0.10, 0.10, 0.05, 0.0074}},
    {"fig-peak", {4.0, 0.14, 0.26, 0.10, 0.10, 0.05, 0.0074}},
};

[[noreturn]] void schema_error(const std::string& msg) {
  throw Error(ErrorCode::SchemaError, msg);
}

void require_object(const json& node, const std::string& where) {
  if (!node.is_object()) schema_error(where + " must be an object");
}

void reject_unknown(const json& node, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& item : node.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      schema_error("unknown field '" + (where.empty() ? "" : where + ".") + item.key() + "'");
    }
  }
}

double number(const json& node, const std::string& where) {
  if (!node.is_number()) schema_error(where + " must be a number");
  return node.get<double>();
}

std::uint64_t unsigned_integer(const json& node, const std::string& where) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer() && node.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(node.get<std::int64_t>());
  }
  schema_error(where + " must be a nonnegative integer");
}

int positive_int(const json& node, const std::string& where) {
  const auto v = unsigned_integer(node, where);
  if (v < 1 || v > 1'000'000'000ULL) schema_error(where + " must be a positive integer");
  return static_cast<int>(v);
}

void apply_params(const json& node, const std::string& where, ModelParams& params) {
  require_object(node, where);
  reject_unknown(node, where, {"lambda", "alpha", "epsilon", "delta", "mu", "nu", "phi"});
  for (const auto& item : node.items()) {
    set(params, parse_param_name(item.key()), number(item.value(), where + "." + item.key()));
  }
}

void apply_state(const json& node, const std::string& where, StateVector& state) {
  require_object(node, where);
  reject_unknown(node, where, {"s", "q", "c", "i", "r"});
  if (node.contains("s")) state.s = number(node["s"], where + ".s");
  if (node.contains("q")) state.q = number(node["q"], where + ".q");
  if (node.contains("c")) state.c = number(node["c"], where + ".c");
  if (node.contains("i")) state.i = number(node["i"], where + ".i");
  if (node.contains("r")) state.r = number(node["r"], where + ".r");
}

void validate_named(const ModelParams& params, const std::string& where) {
  try {
    validate(params);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantViolation, where + ": " + e.what());
  }
}

void validate_state_named(const StateVector& state, const std::string& where) {
  try {
    validate(state);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantViolation, where + ": " + e.what());
  }
}

IntegratorConfig parse_integrator(const json& node) {
  require_object(node, "integrator");
  reject_unknown(node, "integrator", {"t0", "tf", "h", "method"});
  IntegratorConfig cfg;
  if (node.contains("t0")) cfg.t0 = number(node["t0"], "integrator.t0");
  if (node.contains("tf")) cfg.tf = number(node["tf"], "integrator.tf");
  if (node.contains("h")) cfg.h = number(node["h"], "integrator.h");
  if (node.contains("method")) {
    const auto& m = node["method"];
    if (!m.is_string() || m.get<std::string>() != "rk4") {
      schema_error("integrator.method must be \"rk4\"");
    }
  }
  return cfg;
}

MobProcessConfig parse_mob(const json& node) {
  require_object(node, "mob");
  reject_unknown(node, "mob",
                 {"arrival_rate", "amplitude_lo", "amplitude_hi", "event_duration", "seed"});
  MobProcessConfig cfg;
  if (node.contains("arrival_rate")) cfg.arrival_rate = number(node["arrival_rate"], "mob.arrival_rate");
  if (node.contains("amplitude_lo")) cfg.amplitude_lo = number(node["amplitude_lo"], "mob.amplitude_lo");
  if (node.contains("amplitude_hi")) cfg.amplitude_hi = number(node["amplitude_hi"], "mob.amplitude_hi");
  if (node.contains("event_duration")) {
    cfg.event_duration = number(node["event_duration"], "mob.event_duration");
  }
  if (node.contains("seed")) cfg.seed = unsigned_integer(node["seed"], "mob.seed");
  validate(cfg);
  return cfg;
}

NetworkConfig parse_network(const json& node, const ModelParams& base, const StateVector& base_initial) {
  require_object(node, "network");
  reject_unknown(node, "network", {"k", "t_matrix", "per_region", "initial"});
  if (!node.contains("k")) schema_error("network.k is required");
  NetworkConfig out;
  const auto k = static_cast<std::size_t>(positive_int(node["k"], "network.k"));
  out.params.k = k;
  out.params.mobility.assign(k * k, 0.0);
  if (node.contains("t_matrix")) {
    const auto& rows = node["t_matrix"];
    if (!rows.is_array() || rows.size() != k) schema_error("network.t_matrix must have k rows");
    for (std::size_t i = 0; i < k; ++i) {
      if (!rows[i].is_array() || rows[i].size() != k) {
        schema_error("network.t_matrix row " + std::to_string(i) + " must have k entries");
      }
      for (std::size_t j = 0; j < k; ++j) {
        out.params.mobility[i * k + j] = number(
            rows[i][j], "network.t_matrix[" + std::to_string(i) + "][" + std::to_string(j) + "]");
      }
    }
  }
  out.params.per_region.assign(k, base);
  if (node.contains("per_region")) {
    const auto& list = node["per_region"];
    if (!list.is_array() || list.size() != k) schema_error("network.per_region must have k entries");
    for (std::size_t i = 0; i < k; ++i) {
      const std::string where = "network.per_region[" + std::to_string(i) + "]";
      apply_params(list[i], where, out.params.per_region[i]);
      // All regions share one epsilon(t), built from params.epsilon.
      if (out.params.per_region[i].epsilon0 != base.epsilon0) {
        throw Error(ErrorCode::InvariantViolation,
                    where + ".epsilon: the contact rate is shared by all regions; set params.epsilon");
      }
    }
  }
  out.initial.regions.assign(k, base_initial);
  if (node.contains("initial")) {
    const auto& list = node["initial"];
    if (!list.is_array() || list.size() != k) schema_error("network.initial must have k entries");
    for (std::size_t i = 0; i < k; ++i) {
      apply_state(list[i], "network.initial[" + std::to_string(i) + "]", out.initial.regions[i]);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    validate_named(out.params.per_region[i], "network.per_region[" + std::to_string(i) + "]");
    validate_state_named(out.initial.regions[i], "network.initial[" + std::to_string(i) + "]");
  }
  try {
    validate(out.params);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantViolation, e.what());
  }
  return out;
}

FitSettings parse_fit(const json& node) {
  require_object(node, "fit");
  reject_unknown(node, "fit", {"free", "bounds", "n_starts", "max_evals", "tolerance", "seed"});
  FitSettings out;
  if (node.contains("free")) {
    const auto& list = node["free"];
    if (!list.is_array()) schema_error("fit.free must be an array of parameter names");
    for (const auto& name : list) {
      if (!name.is_string()) schema_error("fit.free must be an array of parameter names");
      out.free.push_back(parse_param_name(name.get<std::string>()));
    }
  }
  if (node.contains("bounds")) {
    const auto& bounds = node["bounds"];
    require_object(bounds, "fit.bounds");
    reject_unknown(bounds, "fit.bounds", {"lambda", "alpha", "epsilon", "delta", "mu", "nu", "phi"});
    for (const auto& item : bounds.items()) {
      const std::string where = "fit.bounds." + item.key();
      const auto& pair = item.value();
      if (!pair.is_array() || pair.size() != 2) schema_error(where + " must be [lo, hi]");
      ParameterBounds b{number(pair[0], where), number(pair[1], where)};
      if (!(b.lo < b.hi)) throw Error(ErrorCode::InvariantViolation, where + " needs lo < hi");
      out.bounds[parse_param_name(item.key())] = b;
    }
  }
  if (node.contains("n_starts")) out.n_starts = positive_int(node["n_starts"], "fit.n_starts");
  if (node.contains("max_evals")) out.max_evals = positive_int(node["max_evals"], "fit.max_evals");
  if (node.contains("tolerance")) {
    out.tolerance = number(node["tolerance"], "fit.tolerance");
    if (!(out.tolerance > 0.0)) throw Error(ErrorCode::InvariantViolation, "fit.tolerance must be > 0");
  }
  if (node.contains("seed")) out.seed = unsigned_integer(node["seed"], "fit.seed");
  return out;
}

}  // namespace

std::optional<ModelParams> preset_params(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p.params;
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

StateVector default_initial(const ModelParams& params) {
  return {std::max(params.lambda / params.phi - 3.0, 0.0), 1.0, 1.0, 1.0, 0.0};
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "", {"preset", "params", "initial", "integrator", "mob", "network", "fit"});

  RunConfig cfg;
  bool have_params = false;
  if (doc.contains("preset")) {
    const auto& node = doc["preset"];
    if (!node.is_string()) schema_error("preset must be a string");
    const auto name = node.get<std::string>();
    const auto params = preset_params(name);
    if (!params) schema_error("unknown preset '" + name + "'");
    cfg.preset = name;
    cfg.params = *params;
    have_params = true;
  }
  if (doc.contains("params")) {
    const auto& node = doc["params"];
    apply_params(node, "params", cfg.params);
    if (!have_params) {
      for (ParamName name : kAllParams) {
        if (!node.contains(std::string(to_string(name)))) {
          schema_error("params." + std::string(to_string(name)) +
                       " is required when no preset is given");
        }
      }
    }
    have_params = true;
  }
  if (!have_params) schema_error("config needs a preset or a full params block");
  validate_named(cfg.params, "params");

  cfg.initial = default_initial(cfg.params);
  if (doc.contains("initial")) apply_state(doc["initial"], "initial", cfg.initial);
  validate_state_named(cfg.initial, "initial");

  if (doc.contains("integrator")) cfg.integrator = parse_integrator(doc["integrator"]);
  validate(cfg.integrator);

  if (doc.contains("mob")) cfg.mob = parse_mob(doc["mob"]);
  if (doc.contains("network")) cfg.network = parse_network(doc["network"], cfg.params, cfg.initial);
  if (doc.contains("fit")) cfg.fit = parse_fit(doc["fit"]);
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column for the message.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t k = 0; k < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "config parse error at line " << line << ", column " << column << ": " << e.what();
    throw Error(ErrorCode::ParseError, msg.str());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

json to_json(const ModelParams& p) {
  return {{"lambda", p.lambda}, {"alpha", p.alpha}, {"epsilon", p.epsilon0},
          {"delta", p.delta},   {"mu", p.mu},       {"nu", p.nu},
          {"phi", p.phi}};
}

json to_json(const StateVector& x) {
  return {{"s", x.s}, {"q", x.q}, {"c", x.c}, {"i", x.i}, {"r", x.r}};
}

json to_json(const RunConfig& cfg) {
  json out;
  if (cfg.preset) out["preset"] = *cfg.preset;
  out["params"] = to_json(cfg.params);
  out["initial"] = to_json(cfg.initial);
  out["integrator"] = {{"t0", cfg.integrator.t0},
                       {"tf", cfg.integrator.tf},
                       {"h", cfg.integrator.h},
                       {"method", "rk4"}};
  if (cfg.mob) {
    const auto& m = *cfg.mob;
    out["mob"] = {{"arrival_rate", m.arrival_rate}, {"amplitude_lo", m.amplitude_lo},
                  {"amplitude_hi", m.amplitude_hi}, {"event_duration", m.event_duration},
                  {"seed", m.seed}};
  }
  if (cfg.network) {
    const auto& net = cfg.network->params;
    json rows = json::array();
    for (std::size_t i = 0; i < net.k; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < net.k; ++j) row.push_back(net.rate(i, j));
      rows.push_back(row);
    }
    json per_region = json::array();
    for (const auto& p : net.per_region) per_region.push_back(to_json(p));
    json initial = json::array();
    for (const auto& x : cfg.network->initial.regions) initial.push_back(to_json(x));
    out["network"] = {{"k", net.k}, {"t_matrix", rows}, {"per_region", per_region},
                      {"initial", initial}};
  }
  if (cfg.fit) {
    const auto& f = *cfg.fit;
    json free = json::array();
    for (ParamName name : f.free) free.push_back(std::string(to_string(name)));
    json bounds = json::object();
    for (const auto& [name, b] : f.bounds) bounds[std::string(to_string(name))] = {b.lo, b.hi};
    out["fit"] = {{"free", free},           {"bounds", bounds},
                  {"n_starts", f.n_starts}, {"max_evals", f.max_evals},
                  {"tolerance", f.tolerance}, {"seed", f.seed}};
  }
  return out;
}

}  // namespace sqcir
