#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqcir/integrator.hpp"
#include "sqcir/model.hpp"
#include "sqcir/schedule.hpp"

namespace sqcir {

inline constexpr double kMaxMobAmplitude = 1.5;

/// Poisson arrivals, each holding M at a uniform amplitude for a fixed time.
struct MobProcessConfig {
  double arrival_rate = 0.02;
  double amplitude_lo = 0.0;
  double amplitude_hi = kMaxMobAmplitude;
  double event_duration = 10.0;
  std::uint64_t seed = 0;

  friend bool operator==(const MobProcessConfig&, const MobProcessConfig&) = default;
};

void validate(const MobProcessConfig& cfg);

struct MobEvent {
  double start = 0.0;
  double end = 0.0;
  double amplitude = 0.0;
};

/// Raw event list on [t0, tf). Per event the generator draws the exponential
/// gap first and then the amplitude.
std::vector<MobEvent> sample_mob_events(const MobProcessConfig& cfg, double t0, double tf);

/// M(t) on [t0, tf]: zero outside events, the largest amplitude where events
/// overlap. Adjacent equal pieces are merged.
MobSchedule sample_mob_process(const MobProcessConfig& cfg, double t0, double tf);

/// eps(t) = eps0 (1 + M(t)) on the breakpoints of `m`.
EpsilonSchedule epsilon_schedule(const ModelParams& params, const MobSchedule& m);

struct RunMetrics {
  double peak_infected = 0.0;
  double peak_time = 0.0;
  double duration = 0.0;
  double avg_recovery_rate = 0.0;
  double total_infections = 0.0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

inline constexpr double kDefaultDurationThreshold = 1.0;

/// Peak is the largest grid value of I (first attainment). Duration is the
/// measure of {I >= threshold} with I linear between grid points; the
/// recovery rate is mu C + nu I averaged over that same set. Total
/// infections is the trapezoidal integral of delta C I.
RunMetrics compute_run_metrics(const Trajectory& traj, const ModelParams& params,
                               double duration_threshold = kDefaultDurationThreshold);

struct RunOutcome {
  std::uint64_t seed = 0;
  std::size_t events = 0;
  std::optional<RunMetrics> metrics;
  std::optional<std::string> error;
};

struct EnsembleReport {
  std::vector<RunOutcome> per_run;
  RunMetrics baseline;
  /// Over successful runs only; stddev uses the n-1 denominator (0 for n=1).
  RunMetrics mean;
  RunMetrics stddev;
  std::size_t successful = 0;
};

EnsembleReport run_ensemble(const StateVector& initial, const ModelParams& params,
                            const MobProcessConfig& mob, const IntegratorConfig& cfg,
                            std::size_t n_runs,
                            double duration_threshold = kDefaultDurationThreshold);

}  // namespace sqcir
