#pragma once

#include <span>
#include <vector>

#include "sqcir/model.hpp"
#include "sqcir/schedule.hpp"

namespace sqcir {

enum class Method { Rk4 };

struct IntegratorConfig {
  double t0 = 0.0;
  double tf = 300.0;
  double h = 0.01;
  Method method = Method::Rk4;
};

/// Throws InvariantViolation unless tf > t0 and 0 < h <= tf - t0.
void validate(const IntegratorConfig& cfg);

/// Components above -kClampTolerance but below zero are reset to zero after
/// each step; anything lower is reported as a step-size failure.
inline constexpr double kClampTolerance = 1e-12;

template <typename State>
struct BasicTrajectory {
  std::vector<double> times;
  std::vector<State> states;
  /// Contact rate in force on the step that starts at the matching time.
  std::vector<double> epsilon_used;

  std::size_t size() const noexcept { return times.size(); }
};

using Trajectory = BasicTrajectory<StateVector>;
using NetworkTrajectory = BasicTrajectory<NetworkState>;

/// Step boundaries for [t0, tf]: the nominal grid t0 + k*h, every schedule
/// breakpoint and every requested stop inside the interval, and tf itself.
/// Points closer than a tiny fraction of h are merged, preferring the
/// breakpoint or stop over the nominal point.
std::vector<double> build_time_grid(const IntegratorConfig& cfg,
                                    std::span<const double> breakpoints,
                                    std::span<const double> stops = {});

/// Classical fixed-step RK4 on the reduced system. The contact rate is taken
/// from `schedule` at the start of each step; steps never straddle a
/// breakpoint, so this is exact for piecewise-constant schedules. `stops`
/// adds extra grid points (observation times, for instance).
Trajectory integrate(const StateVector& initial, const ModelParams& params,
                     const IntegratorConfig& cfg, const EpsilonSchedule& schedule,
                     std::span<const double> stops = {});

NetworkTrajectory integrate_network(const NetworkState& initial, const NetworkParams& net,
                                    const IntegratorConfig& cfg,
                                    const EpsilonSchedule& schedule);

/// N(t) = lambda/phi + (n0 - lambda/phi) exp(-phi t); exact for the reduced
/// system because every bilinear term cancels in dN/dt.
double closed_form_total(double n0, const ModelParams& params, double t) noexcept;

}  // namespace sqcir
