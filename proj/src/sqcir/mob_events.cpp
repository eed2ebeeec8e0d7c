#include "sqcir/mob_events.hpp"

#include <algorithm>
#include <cmath>

#include "sqcir/error.hpp"
#include "sqcir/parallel.hpp"
#include "sqcir/rng.hpp"

namespace sqcir {

void validate(const MobProcessConfig& cfg) {
  if (!std::isfinite(cfg.arrival_rate) || cfg.arrival_rate < 0.0) {
    throw Error(ErrorCode::InvariantViolation, "mob.arrival_rate must be finite and >= 0");
  }
  if (!(cfg.amplitude_lo >= 0.0) || !(cfg.amplitude_lo <= cfg.amplitude_hi) ||
      !(cfg.amplitude_hi <= kMaxMobAmplitude)) {
    throw Error(ErrorCode::InvariantViolation,
                "mob amplitudes must satisfy 0 <= amplitude_lo <= amplitude_hi <= 1.5");
  }
  if (!std::isfinite(cfg.event_duration) || !(cfg.event_duration > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "mob.event_duration must be > 0");
  }
}

std::vector<MobEvent> sample_mob_events(const MobProcessConfig& cfg, double t0, double tf) {
  validate(cfg);
  if (!(tf > t0)) throw Error(ErrorCode::InvalidInput, "mob horizon must be positive");
  std::vector<MobEvent> events;
  if (cfg.arrival_rate == 0.0) return events;
  SplitMix64 rng(cfg.seed);
  double t = t0;
  for (;;) {
    t += -std::log1p(-rng.uniform()) / cfg.arrival_rate;
    if (!(t < tf)) break;
    const double amplitude =
        cfg.amplitude_lo + (cfg.amplitude_hi - cfg.amplitude_lo) * rng.uniform();
    events.push_back({t, t + cfg.event_duration, amplitude});
  }
  return events;
}

MobSchedule sample_mob_process(const MobProcessConfig& cfg, double t0, double tf) {
  const auto events = sample_mob_events(cfg, t0, tf);

  std::vector<double> cuts;
  for (const auto& e : events) {
    for (double t : {e.start, e.end}) {
      if (t > t0 && t < tf) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto level = [&](double t) {
    double m = 0.0;
    for (const auto& e : events) {
      if (e.start <= t && t < e.end) m = std::max(m, e.amplitude);
    }
    return m;
  };

  MobSchedule out;
  out.values = {level(t0)};
  for (double t : cuts) {
    const double m = level(t);
    if (m == out.values.back()) continue;
    out.breakpoints.push_back(t);
    out.values.push_back(m);
  }
  return out;
}

EpsilonSchedule epsilon_schedule(const ModelParams& params, const MobSchedule& m) {
  EpsilonSchedule out;
  out.breakpoints = m.breakpoints;
  out.values.clear();
  out.values.reserve(m.values.size());
  for (double v : m.values) out.values.push_back(params.epsilon0 * (1.0 + v));
  return out;
}

RunMetrics compute_run_metrics(const Trajectory& traj, const ModelParams& params,
                               double duration_threshold) {
  if (traj.size() == 0) throw Error(ErrorCode::InvalidInput, "empty trajectory");
  RunMetrics out;
  out.peak_time = traj.times.front();
  out.peak_infected = traj.states.front().i;
  for (std::size_t n = 1; n < traj.size(); ++n) {
    if (traj.states[n].i > out.peak_infected) {
      out.peak_infected = traj.states[n].i;
      out.peak_time = traj.times[n];
    }
  }

  auto recovery = [&](const StateVector& x) { return params.mu * x.c + params.nu * x.i; };
  double recovered_in_window = 0.0;
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const double ta = traj.times[n];
    const double tb = traj.times[n + 1];
    const double dt = tb - ta;
    const StateVector& xa = traj.states[n];
    const StateVector& xb = traj.states[n + 1];

    out.total_infections +=
        0.5 * dt * (params.delta * xa.c * xa.i + params.delta * xb.c * xb.i);

    const double ia = xa.i - duration_threshold;
    const double ib = xb.i - duration_threshold;
    if (ia < 0.0 && ib < 0.0) continue;
    // Sub-interval [lo, hi] of the unit step where the interpolated I is
    // above the threshold.
    double lo = 0.0;
    double hi = 1.0;
    if (ia < 0.0) lo = ia / (ia - ib);
    if (ib < 0.0) hi = ia / (ia - ib);
    const double ga = recovery(xa);
    const double gb = recovery(xb);
    const double g_lo = ga + lo * (gb - ga);
    const double g_hi = ga + hi * (gb - ga);
    out.duration += (hi - lo) * dt;
    recovered_in_window += 0.5 * (hi - lo) * dt * (g_lo + g_hi);
  }
  out.avg_recovery_rate = out.duration > 0.0 ? recovered_in_window / out.duration : 0.0;
  return out;
}

namespace {

void accumulate(RunMetrics& acc, const RunMetrics& x, double w) {
  acc.peak_infected += w * x.peak_infected;
  acc.peak_time += w * x.peak_time;
  acc.duration += w * x.duration;
  acc.avg_recovery_rate += w * x.avg_recovery_rate;
  acc.total_infections += w * x.total_infections;
}

RunMetrics scaled(const RunMetrics& x, double w) {
  RunMetrics out;
  accumulate(out, x, w);
  return out;
}

RunMetrics squared_deviation(const RunMetrics& x, const RunMetrics& mean) {
  auto sq = [](double a, double b) { return (a - b) * (a - b); };
  return {sq(x.peak_infected, mean.peak_infected), sq(x.peak_time, mean.peak_time),
          sq(x.duration, mean.duration), sq(x.avg_recovery_rate, mean.avg_recovery_rate),
          sq(x.total_infections, mean.total_infections)};
}

}  // namespace

EnsembleReport run_ensemble(const StateVector& initial, const ModelParams& params,
                            const MobProcessConfig& mob, const IntegratorConfig& cfg,
                            std::size_t n_runs, double duration_threshold) {
  if (n_runs < 1) throw Error(ErrorCode::InvalidInput, "ensemble needs at least one run");
  validate(mob);
  validate(cfg);

  EnsembleReport report;
  const auto baseline =
      integrate(initial, params, cfg, EpsilonSchedule::constant(params.epsilon0));
  report.baseline = compute_run_metrics(baseline, params, duration_threshold);

  report.per_run.resize(n_runs);
  detail::parallel_for(n_runs, [&](std::size_t r) {
    RunOutcome& outcome = report.per_run[r];
    MobProcessConfig run_cfg = mob;
    run_cfg.seed = outcome.seed = derive_seed(mob.seed, r);
    try {
      outcome.events = sample_mob_events(run_cfg, cfg.t0, cfg.tf).size();
      const auto m = sample_mob_process(run_cfg, cfg.t0, cfg.tf);
      const auto traj = integrate(initial, params, cfg, epsilon_schedule(params, m));
      outcome.metrics = compute_run_metrics(traj, params, duration_threshold);
    } catch (const Error& e) {
      outcome.error = e.what();
    }
  });

  std::vector<const RunMetrics*> ok;
  for (const auto& outcome : report.per_run) {
    if (outcome.metrics) ok.push_back(&*outcome.metrics);
  }
  report.successful = ok.size();
  if (ok.empty()) return report;
  const double n = static_cast<double>(ok.size());
  RunMetrics sum;
  for (const auto* m : ok) accumulate(sum, *m, 1.0);
  report.mean = scaled(sum, 1.0 / n);
  if (ok.size() > 1) {
    RunMetrics ss;
    for (const auto* m : ok) accumulate(ss, squared_deviation(*m, report.mean), 1.0);
    const RunMetrics var = scaled(ss, 1.0 / (n - 1.0));
    report.stddev = {std::sqrt(var.peak_infected), std::sqrt(var.peak_time),
                     std::sqrt(var.duration), std::sqrt(var.avg_recovery_rate),
                     std::sqrt(var.total_infections)};
  }
  return report;
}

}  // namespace sqcir
