#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sqcir/integrator.hpp"
#include "sqcir/model.hpp"

namespace sqcir {

using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// Lambda*eps0 / (phi (phi + nu)), the closed form printed for R0.
double r0_paper(const ModelParams& params);

/// Spectral radius of F V^-1 with F = diag(Lambda eps0/phi, 0) and
/// V = diag(phi + mu, phi + nu). Differs from r0_paper unless mu == nu.
double r0_next_generation(const ModelParams& params);

/// r0_paper with the contact rate raised to eps0 (1 + m).
double effective_r(const ModelParams& params, double m);

StateVector mob_free_equilibrium(const ModelParams& params);

struct EndemicClosed {
  StateVector state;
  /// False when any component is negative, i.e. the point lies outside the
  /// invariant region.
  bool feasible = true;
};

EndemicClosed endemic_equilibrium_closed(const ModelParams& params);

struct NewtonResult {
  StateVector state;
  double residual = 0.0;  // max-abs of the right-hand side at `state`
  int iterations = 0;
  bool feasible = true;
};

inline constexpr double kNewtonTolerance = 1e-12;
inline constexpr int kNewtonMaxIterations = 200;
inline constexpr int kNewtonMaxHalvings = 40;

/// Damped Newton on the five right-hand sides (contact rate eps0) with the
/// analytic Jacobian. Throws Convergence (carrying the last residual) after
/// kNewtonMaxIterations, DegenerateParameter on a singular Jacobian or delta = 0.
NewtonResult endemic_equilibrium_numeric(const ModelParams& params, const StateVector& guess);

double max_abs_residual(const StateVector& state, const ModelParams& params);

/// Analytic Jacobian of the reduced system at `state`, contact rate eps0.
Matrix5 jacobian(const StateVector& state, const ModelParams& params);

/// {-phi, -phi, (Lambda alpha - phi^2)/phi, (Lambda eps0 - phi^2 - phi mu)/phi, -phi - nu}
std::array<double, 5> eigenvalues_at_mfe(const ModelParams& params);

enum class Stability { Stable, Unstable };

const char* to_string(Stability s) noexcept;

struct StabilityReport {
  double r0_paper = 0.0;
  double r0_ngm = 0.0;
  std::array<double, 5> eigenvalues_mfe{};
  Stability classification = Stability::Unstable;
  /// Whether "r0_paper < 1" predicts the spectral classification.
  bool criterion_agreement = false;
};

StabilityReport classify_stability(const ModelParams& params);

struct ThresholdReport {
  double epsilon_c = 0.0;
  double lambda_c = 0.0;
  /// Positive root of phi^2 + nu phi - eps0 Lambda = 0.
  double phi_c = 0.0;
};

ThresholdReport critical_thresholds(const ModelParams& params);

struct SensitivityReport {
  double pi_lambda = 0.0;
  double pi_epsilon = 0.0;
  double pi_phi = 0.0;
  double pi_nu = 0.0;
};

SensitivityReport sensitivity_indices(const ModelParams& params);

struct BifurcationRow {
  double value = 0.0;  // swept parameter value
  double r0_paper = 0.0;
  double long_run_c = 0.0;
  double long_run_i = 0.0;
  bool persisted = false;
  std::optional<std::string> error;
};

struct BifurcationTable {
  ParamName parameter = ParamName::Epsilon;
  std::vector<BifurcationRow> rows;
};

inline constexpr double kPersistenceThreshold = 1e-3;
inline constexpr double kLongRunFraction = 0.1;

/// Trapezoidal time-average of C and I over the last kLongRunFraction of the
/// trajectory's span.
std::pair<double, double> long_run_means(const Trajectory& traj);

/// Integrates at each of `n_steps` evenly spaced values of `parameter` in
/// [lo, hi] with a constant contact rate and records the long-run means.
/// A failed integration is kept as a row with `error` set.
BifurcationTable bifurcation_sweep(const ModelParams& params, const StateVector& initial,
                                   double lo, double hi, int n_steps,
                                   const IntegratorConfig& cfg,
                                   ParamName parameter = ParamName::Epsilon);

}  // namespace sqcir
