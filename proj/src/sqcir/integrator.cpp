#include "sqcir/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "sqcir/error.hpp"

namespace sqcir {

double PiecewiseConstant::at(double t) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return values[static_cast<std::size_t>(it - breakpoints.begin())];
}

void PiecewiseConstant::validate() const {
  if (values.size() != breakpoints.size() + 1) {
    throw Error(ErrorCode::InvalidInput, "schedule needs one more value than breakpoints");
  }
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (!std::isfinite(breakpoints[k]) || (k > 0 && !(breakpoints[k] > breakpoints[k - 1]))) {
      throw Error(ErrorCode::InvalidInput, "schedule breakpoints must be finite and increasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidInput, "schedule values must be finite and >= 0");
    }
  }
}

void validate(const IntegratorConfig& cfg) {
  if (!std::isfinite(cfg.t0) || !std::isfinite(cfg.tf) || !(cfg.tf > cfg.t0)) {
    throw Error(ErrorCode::InvariantViolation, "integrator.tf must be > integrator.t0");
  }
  if (!std::isfinite(cfg.h) || !(cfg.h > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "integrator.h must be > 0");
  }
  if (cfg.h > cfg.tf - cfg.t0) {
    throw Error(ErrorCode::InvariantViolation, "integrator.h must not exceed tf - t0");
  }
}

std::vector<double> build_time_grid(const IntegratorConfig& cfg,
                                    std::span<const double> breakpoints,
                                    std::span<const double> stops) {
  validate(cfg);
  struct Point {
    double t;
    int priority;  // nominal < breakpoint/stop < endpoint
  };
  std::vector<Point> points;
  const auto n = static_cast<std::size_t>(std::floor((cfg.tf - cfg.t0) / cfg.h + 1e-9));
  points.reserve(n + 2 + breakpoints.size() + stops.size());
  points.push_back({cfg.t0, 2});
  for (std::size_t k = 1; k <= n; ++k) {
    points.push_back({cfg.t0 + static_cast<double>(k) * cfg.h, 0});
  }
  points.push_back({cfg.tf, 2});
  for (auto extra : {breakpoints, stops}) {
    for (double t : extra) {
      if (t > cfg.t0 && t < cfg.tf) points.push_back({t, 1});
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const Point& a, const Point& b) { return a.t < b.t; });

  const double merge = 1e-9 * cfg.h;
  std::vector<Point> kept;
  kept.reserve(points.size());
  for (const Point& p : points) {
    if (!kept.empty() && p.t - kept.back().t <= merge) {
      if (p.priority > kept.back().priority) kept.back() = p;
      continue;
    }
    kept.push_back(p);
  }
  std::vector<double> grid;
  grid.reserve(kept.size());
  for (const Point& p : kept) grid.push_back(p.t);
  return grid;
}

double closed_form_total(double n0, const ModelParams& params, double t) noexcept {
  const double carrying = params.lambda / params.phi;
  return carrying + (n0 - carrying) * std::exp(-params.phi * t);
}

namespace {

// Per-component arithmetic shared by the reduced and networked steppers so a
// one-region network reproduces the reduced run bit for bit.
struct Ops {
  static StateVector axpy(const StateVector& y, double a, const StateVector& k) {
    return {y.s + a * k.s, y.q + a * k.q, y.c + a * k.c, y.i + a * k.i, y.r + a * k.r};
  }
  static double blend(double y, double w, double k1, double k2, double k3, double k4) {
    return y + w * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  static StateVector blend(const StateVector& y, double w, const StateVector& k1,
                           const StateVector& k2, const StateVector& k3,
                           const StateVector& k4) {
    return {blend(y.s, w, k1.s, k2.s, k3.s, k4.s), blend(y.q, w, k1.q, k2.q, k3.q, k4.q),
            blend(y.c, w, k1.c, k2.c, k3.c, k4.c), blend(y.i, w, k1.i, k2.i, k3.i, k4.i),
            blend(y.r, w, k1.r, k2.r, k3.r, k4.r)};
  }
  static NetworkState axpy(const NetworkState& y, double a, const NetworkState& k) {
    NetworkState out;
    out.regions.reserve(y.regions.size());
    for (std::size_t i = 0; i < y.regions.size(); ++i) {
      out.regions.push_back(axpy(y.regions[i], a, k.regions[i]));
    }
    return out;
  }
  static NetworkState blend(const NetworkState& y, double w, const NetworkState& k1,
                            const NetworkState& k2, const NetworkState& k3,
                            const NetworkState& k4) {
    NetworkState out;
    out.regions.reserve(y.regions.size());
    for (std::size_t i = 0; i < y.regions.size(); ++i) {
      out.regions.push_back(
          blend(y.regions[i], w, k1.regions[i], k2.regions[i], k3.regions[i], k4.regions[i]));
    }
    return out;
  }
};

[[noreturn]] void step_failure(ErrorCode code, double t, const char* what) {
  std::ostringstream msg;
  msg << what << " in step starting at t=" << t;
  if (code == ErrorCode::StepSize) msg << "; retry with a smaller step size h";
  throw Error(code, msg.str());
}

void settle(double& v, double t) {
  if (!std::isfinite(v)) step_failure(ErrorCode::Divergence, t, "non-finite state");
  if (v < 0.0) {
    if (v < -kClampTolerance) {
      step_failure(ErrorCode::StepSize, t, "negative compartment produced");
    }
    v = 0.0;
  }
}

void settle(StateVector& x, double t) {
  settle(x.s, t);
  settle(x.q, t);
  settle(x.c, t);
  settle(x.i, t);
  settle(x.r, t);
}

void settle(NetworkState& x, double t) {
  for (auto& region : x.regions) settle(region, t);
}

void check_rates(const ModelParams& params) {
  for (ParamName name : kAllParams) {
    const double v = get(params, name);
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  std::string(to_string(name)) + " must be finite and >= 0");
    }
  }
}

template <typename State, typename Rhs>
BasicTrajectory<State> run_rk4(const State& initial, const std::vector<double>& grid,
                               const EpsilonSchedule& schedule, Rhs&& rhs) {
  BasicTrajectory<State> traj;
  traj.times = grid;
  traj.states.reserve(grid.size());
  traj.epsilon_used.reserve(grid.size());
  traj.states.push_back(initial);
  traj.epsilon_used.push_back(schedule.at(grid.front()));

  State y = initial;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
    const double t = grid[n];
    const double h = grid[n + 1] - t;
    const double eps = traj.epsilon_used[n];
    const State k1 = rhs(y, eps);
    const State k2 = rhs(Ops::axpy(y, 0.5 * h, k1), eps);
    const State k3 = rhs(Ops::axpy(y, 0.5 * h, k2), eps);
    const State k4 = rhs(Ops::axpy(y, h, k3), eps);
    y = Ops::blend(y, h / 6.0, k1, k2, k3, k4);
    settle(y, t);
    traj.states.push_back(y);
    traj.epsilon_used.push_back(schedule.at(grid[n + 1]));
  }
  return traj;
}

}  // namespace

Trajectory integrate(const StateVector& initial, const ModelParams& params,
                     const IntegratorConfig& cfg, const EpsilonSchedule& schedule,
                     std::span<const double> stops) {
  validate(initial);
  check_rates(params);
  schedule.validate();
  const auto grid = build_time_grid(cfg, schedule.breakpoints, stops);
  return run_rk4(initial, grid, schedule, [&](const StateVector& y, double eps) {
    return derivative_reduced(y, params, eps);
  });
}

NetworkTrajectory integrate_network(const NetworkState& initial, const NetworkParams& net,
                                    const IntegratorConfig& cfg,
                                    const EpsilonSchedule& schedule) {
  validate(net);
  if (initial.regions.size() != net.k) {
    throw Error(ErrorCode::InvalidInput, "initial network state must have k regions");
  }
  for (const auto& region : initial.regions) validate(region);
  for (const auto& p : net.per_region) check_rates(p);
  schedule.validate();
  const auto grid = build_time_grid(cfg, schedule.breakpoints);
  return run_rk4(initial, grid, schedule, [&](const NetworkState& y, double eps) {
    return derivative_network(y, net, eps);
  });
}

}  // namespace sqcir
