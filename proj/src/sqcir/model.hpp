#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace sqcir {

/// Rate constants of the SQCIR system. `epsilon0` is the baseline contact
/// rate; the contact rate actually applied is passed to the derivative
/// separately so mob-modulated runs can reuse the same right-hand side.
struct ModelParams {
  double lambda = 0.0;    // recruitment, individuals/time
  double alpha = 0.0;     // S -> Q contact rate
  double epsilon0 = 0.0;  // baseline S,Q -> C contact rate
  double delta = 0.0;     // C -> I contact rate
  double mu = 0.0;        // direct recovery of contacted
  double nu = 0.0;        // recovery of infected
  double phi = 0.0;       // emigration

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class ParamName { Lambda, Alpha, Epsilon, Delta, Mu, Nu, Phi };

inline constexpr std::array<ParamName, 7> kAllParams = {
    ParamName::Lambda, ParamName::Alpha, ParamName::Epsilon, ParamName::Delta,
    ParamName::Mu,     ParamName::Nu,    ParamName::Phi};

std::string_view to_string(ParamName name) noexcept;
/// Accepts the spelled-out file keys (lambda, alpha, epsilon, ...).
ParamName parse_param_name(std::string_view text);

double get(const ModelParams& params, ParamName name) noexcept;
void set(ModelParams& params, ParamName name, double value) noexcept;

/// Throws InvariantViolation naming the offending field.
void validate(const ModelParams& params);

struct StateVector {
  double s = 0.0;
  double q = 0.0;
  double c = 0.0;
  double i = 0.0;
  double r = 0.0;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline constexpr std::size_t kCompartments = 5;

inline std::array<double, kCompartments> to_array(const StateVector& x) {
  return {x.s, x.q, x.c, x.i, x.r};
}

inline StateVector from_array(const std::array<double, kCompartments>& a) {
  return {a[0], a[1], a[2], a[3], a[4]};
}

double total_population(const StateVector& state) noexcept;

/// True iff every component is nonnegative and 0 < N <= lambda/phi.
bool in_invariant_region(const StateVector& state, const ModelParams& params) noexcept;

/// Throws InvalidInput if any component is negative or non-finite.
void validate(const StateVector& state);

StateVector derivative_reduced(const StateVector& state, const ModelParams& params,
                               double epsilon_t);

/// k regions coupled by a mobility matrix. `mobility[i * k + j]` is the rate
/// of leaving region i toward region j.
struct NetworkParams {
  std::size_t k = 1;
  std::vector<double> mobility;
  std::vector<ModelParams> per_region;

  double rate(std::size_t from, std::size_t to) const {
    return mobility.empty() ? 0.0 : mobility[from * k + to];
  }
};

void validate(const NetworkParams& net);

struct NetworkState {
  std::vector<StateVector> regions;

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

NetworkState derivative_network(const NetworkState& state, const NetworkParams& net,
                                double epsilon_t);

}  // namespace sqcir
