#include "sqcir/model.hpp"

#include <cmath>
#include <string>

#include "sqcir/error.hpp"

namespace sqcir {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::SchemaError: return "schema-error";
    case ErrorCode::InvariantViolation: return "invariant-violation";
    case ErrorCode::StepSize: return "step-size";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::DegenerateParameter: return "degenerate-parameter";
    case ErrorCode::UndefinedMetric: return "undefined-metric";
    case ErrorCode::FitFailure: return "fit-failure";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(ParamName name) noexcept {
  switch (name) {
    case ParamName::Lambda: return "lambda";
    case ParamName::Alpha: return "alpha";
    case ParamName::Epsilon: return "epsilon";
    case ParamName::Delta: return "delta";
    case ParamName::Mu: return "mu";
    case ParamName::Nu: return "nu";
    case ParamName::Phi: return "phi";
  }
  return "?";
}

ParamName parse_param_name(std::string_view text) {
  for (ParamName name : kAllParams) {
    if (to_string(name) == text) return name;
  }
  throw Error(ErrorCode::InvalidInput, "unknown parameter name '" + std::string(text) + "'");
}

double get(const ModelParams& p, ParamName name) noexcept {
  switch (name) {
    case ParamName::Lambda: return p.lambda;
    case ParamName::Alpha: return p.alpha;
    case ParamName::Epsilon: return p.epsilon0;
    case ParamName::Delta: return p.delta;
    case ParamName::Mu: return p.mu;
    case ParamName::Nu: return p.nu;
    case ParamName::Phi: return p.phi;
  }
  return 0.0;
}

void set(ModelParams& p, ParamName name, double value) noexcept {
  switch (name) {
    case ParamName::Lambda: p.lambda = value; break;
    case ParamName::Alpha: p.alpha = value; break;
    case ParamName::Epsilon: p.epsilon0 = value; break;
    case ParamName::Delta: p.delta = value; break;
    case ParamName::Mu: p.mu = value; break;
    case ParamName::Nu: p.nu = value; break;
    case ParamName::Phi: p.phi = value; break;
  }
}

void validate(const ModelParams& params) {
  for (ParamName name : kAllParams) {
    const double v = get(params, name);
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvariantViolation,
                  std::string(to_string(name)) + " must be finite and >= 0");
    }
  }
  if (!(params.phi > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "phi must be > 0");
  }
}

double total_population(const StateVector& x) noexcept {
  return x.s + x.q + x.c + x.i + x.r;
}

bool in_invariant_region(const StateVector& x, const ModelParams& params) noexcept {
  for (double v : to_array(x)) {
    if (!(v >= 0.0)) return false;
  }
  const double n = total_population(x);
  return n > 0.0 && n <= params.lambda / params.phi;
}

void validate(const StateVector& state) {
  static constexpr const char* kNames[] = {"s", "q", "c", "i", "r"};
  const auto values = to_array(state);
  for (std::size_t k = 0; k < kCompartments; ++k) {
    if (!std::isfinite(values[k]) || values[k] < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  std::string("state component ") + kNames[k] + " must be finite and >= 0");
    }
  }
}

namespace {

void require_finite(const StateVector& x, const ModelParams& p, double epsilon_t) {
  bool ok = std::isfinite(epsilon_t);
  for (double v : to_array(x)) ok = ok && std::isfinite(v);
  for (ParamName name : kAllParams) ok = ok && std::isfinite(get(p, name));
  if (!ok) throw Error(ErrorCode::InvalidInput, "non-finite input to derivative");
}

}  // namespace

StateVector derivative_reduced(const StateVector& x, const ModelParams& p, double epsilon_t) {
  require_finite(x, p, epsilon_t);
  const double sq = p.alpha * x.s * x.q;
  const double sc = epsilon_t * x.s * x.c;
  const double qc = epsilon_t * x.q * x.c;
  const double ci = p.delta * x.c * x.i;
  return {
      p.lambda - sq - sc - p.phi * x.s,
      sq - qc - p.phi * x.q,
      sc + qc - ci - p.mu * x.c - p.phi * x.c,
      ci - p.nu * x.i - p.phi * x.i,
      p.mu * x.c + p.nu * x.i - p.phi * x.r,
  };
}

void validate(const NetworkParams& net) {
  if (net.k < 1) throw Error(ErrorCode::InvalidInput, "network.k must be >= 1");
  if (net.per_region.size() != net.k) {
    throw Error(ErrorCode::InvalidInput, "network.per_region length must equal k");
  }
  if (!net.mobility.empty() && net.mobility.size() != net.k * net.k) {
    throw Error(ErrorCode::InvalidInput, "network.t_matrix must be k x k");
  }
  for (std::size_t i = 0; i < net.k; ++i) {
    for (std::size_t j = 0; j < net.k; ++j) {
      const double t = net.rate(i, j);
      if (!std::isfinite(t) || t < 0.0) {
        throw Error(ErrorCode::InvalidInput, "network.t_matrix entries must be finite and >= 0");
      }
      if (i == j && t != 0.0) {
        throw Error(ErrorCode::InvalidInput, "network.t_matrix diagonal must be 0");
      }
    }
  }
}

NetworkState derivative_network(const NetworkState& state, const NetworkParams& net,
                                double epsilon_t) {
  if (state.regions.size() != net.k || net.per_region.size() != net.k ||
      (!net.mobility.empty() && net.mobility.size() != net.k * net.k)) {
    throw Error(ErrorCode::InvalidInput, "network dimension mismatch");
  }
  const std::size_t k = net.k;
  std::vector<std::array<double, kCompartments>> occupancy;
  occupancy.reserve(k);
  for (const auto& region : state.regions) occupancy.push_back(to_array(region));

  NetworkState out;
  out.regions.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto rates = to_array(derivative_reduced(state.regions[i], net.per_region[i], epsilon_t));
    const auto& own = occupancy[i];
    double leaving = 0.0;
    for (std::size_t j = 0; j < k; ++j) leaving += net.rate(i, j);
    for (std::size_t comp = 0; comp < kCompartments; ++comp) {
      double entering = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        entering += net.rate(j, i) * occupancy[j][comp];
      }
      rates[comp] += entering - leaving * own[comp];
    }
    out.regions.push_back(from_array(rates));
  }
  return out;
}

}  // namespace sqcir
