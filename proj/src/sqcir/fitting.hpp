#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sqcir/error.hpp"
#include "sqcir/integrator.hpp"
#include "sqcir/model.hpp"

namespace sqcir {

struct ObservedSeries {
  std::vector<double> times;
  std::vector<double> cumulative;

  std::size_t size() const noexcept { return times.size(); }
};

/// Throws InvalidInput unless lengths agree, times strictly increase and the
/// counts are finite, nonnegative and nondecreasing.
void validate(const ObservedSeries& series);

struct ParameterBounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct FitConfig {
  std::vector<ParamName> free;
  /// One entry per element of `free`.
  std::vector<ParameterBounds> bounds;
  ModelParams fixed;
  StateVector initial;
  int n_starts = 4;
  int max_evals = 5000;  // per start
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
};

void validate(const FitConfig& cfg);

/// Bounds used when a fit names a parameter without explicit bounds.
ParameterBounds default_bounds(ParamName name) noexcept;

/// Cumulative inflow to I, the integral of delta C I, sampled at `times`
/// under a constant contact rate eps0. Observation times become grid points.
std::vector<double> model_cumulative_incidence(const ModelParams& params,
                                               const StateVector& initial,
                                               std::span<const double> times,
                                               const IntegratorConfig& cfg);

inline constexpr double kPenaltyBase = 1e12;

struct ObjectiveValue {
  double value = 0.0;
  /// Set when the value is a penalty (out of bounds or model failure).
  bool penalized = false;
};

ModelParams assemble(const FitConfig& cfg, std::span<const double> theta);

/// Sum of squared residuals. Out-of-bounds candidates cost kPenaltyBase plus
/// the squared bound violation; a failed or non-finite model run costs
/// kPenaltyBase.
ObjectiveValue sse_objective(std::span<const double> theta, const ObservedSeries& observed,
                             const FitConfig& fitcfg, const IntegratorConfig& icfg);

struct StartOutcome {
  std::vector<double> start;
  std::vector<double> theta;
  double objective = 0.0;
  int n_evals = 0;
  bool converged = false;
  bool penalized = false;
};

struct FitResult {
  std::vector<double> theta;  // ordered as FitConfig::free
  double objective = 0.0;
  std::optional<double> e_rel;
  double mae = 0.0;
  int n_evals = 0;  // summed over starts
  bool converged = false;
  std::size_t best_start = 0;
  std::vector<StartOutcome> starts;
};

/// Thrown when every start ends on a penalty value; carries the best of them.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, FitResult partial)
      : Error(ErrorCode::FitFailure, what), partial_(std::move(partial)) {}
  const FitResult& partial() const noexcept { return partial_; }

 private:
  FitResult partial_;
};

/// Multi-start Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). The simplex lives in bound-normalized coordinates, so
/// `tolerance` applies to its normalized diameter. Starts form a Latin
/// hypercube drawn from `seed`.
FitResult fit(const ObservedSeries& observed, const FitConfig& fitcfg,
              const IntegratorConfig& icfg);

struct ErrorMetrics {
  /// Empty when the predicted series has zero norm.
  std::optional<double> e_rel;
  double mae = 0.0;
};

ErrorMetrics error_metrics(std::span<const double> observed, std::span<const double> predicted);

/// Least-squares nondecreasing sequence closest to `y` (isotonic regression).
std::vector<double> nondecreasing_fit(std::span<const double> y);

/// Model incidence plus Gaussian noise, projected onto nondecreasing
/// sequences and clamped at 0.
ObservedSeries generate_synthetic(const ModelParams& params, const StateVector& initial,
                                  std::span<const double> times, double noise_sd,
                                  std::uint64_t seed, const IntegratorConfig& cfg);

}  // namespace sqcir
