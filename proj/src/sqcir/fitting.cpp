#include "sqcir/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sqcir/parallel.hpp"
#include "sqcir/rng.hpp"

namespace sqcir {

void validate(const ObservedSeries& series) {
  if (series.times.size() != series.cumulative.size()) {
    throw Error(ErrorCode::InvalidInput, "series times and counts differ in length");
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = series.times[k];
    const double y = series.cumulative[k];
    if (!std::isfinite(t) || !std::isfinite(y) || y < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  "series row " + std::to_string(k + 1) + " must be finite with count >= 0");
    }
    if (k > 0 && !(t > series.times[k - 1])) {
      throw Error(ErrorCode::InvalidInput,
                  "series row " + std::to_string(k + 1) + ": times must increase");
    }
    if (k > 0 && y < series.cumulative[k - 1]) {
      throw Error(ErrorCode::InvalidInput,
                  "series row " + std::to_string(k + 1) + ": cumulative count decreases");
    }
  }
}

void validate(const FitConfig& cfg) {
  if (cfg.free.empty()) throw Error(ErrorCode::InvalidInput, "fit needs at least one free parameter");
  if (cfg.bounds.size() != cfg.free.size()) {
    throw Error(ErrorCode::InvalidInput, "fit needs one bounds pair per free parameter");
  }
  for (std::size_t k = 0; k < cfg.free.size(); ++k) {
    const auto& b = cfg.bounds[k];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw Error(ErrorCode::InvariantViolation,
                  "bounds for " + std::string(to_string(cfg.free[k])) + " must be finite with lo < hi");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (cfg.free[j] == cfg.free[k]) {
        throw Error(ErrorCode::InvalidInput,
                    "parameter " + std::string(to_string(cfg.free[k])) + " listed twice");
      }
    }
  }
  if (cfg.n_starts < 1 || cfg.max_evals < 1 || !(cfg.tolerance > 0.0)) {
    throw Error(ErrorCode::InvariantViolation,
                "fit needs n_starts >= 1, max_evals >= 1 and tolerance > 0");
  }
}

ParameterBounds default_bounds(ParamName name) noexcept {
  switch (name) {
    case ParamName::Lambda: return {1e-3, 100.0};
    case ParamName::Phi: return {1e-4, 1.0};
    default: return {1e-4, 1.0};
  }
}

std::vector<double> model_cumulative_incidence(const ModelParams& params,
                                               const StateVector& initial,
                                               std::span<const double> times,
                                               const IntegratorConfig& cfg) {
  validate(cfg);
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;
  for (double t : times) {
    if (!(t >= cfg.t0 && t <= cfg.tf)) {
      throw Error(ErrorCode::InvalidInput, "observation time outside the integration horizon");
    }
  }
  const double last = *std::max_element(times.begin(), times.end());
  if (!(last > cfg.t0)) return out;

  IntegratorConfig run = cfg;
  run.tf = last;
  run.h = std::min(cfg.h, last - cfg.t0);
  const auto traj =
      integrate(initial, params, run, EpsilonSchedule::constant(params.epsilon0), times);

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  double cumulative = 0.0;
  std::size_t next = 0;
  auto flux = [&](const StateVector& x) { return params.delta * x.c * x.i; };
  for (std::size_t n = 0; n < traj.size() && next < order.size(); ++n) {
    if (n > 0) {
      cumulative += 0.5 * (traj.times[n] - traj.times[n - 1]) *
                    (flux(traj.states[n - 1]) + flux(traj.states[n]));
    }
    while (next < order.size() && times[order[next]] == traj.times[n]) {
      out[order[next]] = cumulative;
      ++next;
    }
  }
  if (next != order.size()) {
    throw Error(ErrorCode::InvalidInput, "observation time missing from the integration grid");
  }
  return out;
}

ModelParams assemble(const FitConfig& cfg, std::span<const double> theta) {
  ModelParams p = cfg.fixed;
  for (std::size_t k = 0; k < cfg.free.size(); ++k) set(p, cfg.free[k], theta[k]);
  return p;
}

ObjectiveValue sse_objective(std::span<const double> theta, const ObservedSeries& observed,
                             const FitConfig& fitcfg, const IntegratorConfig& icfg) {
  if (theta.size() != fitcfg.free.size()) {
    throw Error(ErrorCode::InvalidInput, "theta length must match the free parameter list");
  }
  double violation = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const auto& b = fitcfg.bounds[k];
    if (!std::isfinite(theta[k])) return {kPenaltyBase, true};
    if (theta[k] < b.lo) violation += (b.lo - theta[k]) * (b.lo - theta[k]);
    if (theta[k] > b.hi) violation += (theta[k] - b.hi) * (theta[k] - b.hi);
  }
  if (violation > 0.0) return {kPenaltyBase + violation, true};

  std::vector<double> model;
  try {
    model = model_cumulative_incidence(assemble(fitcfg, theta), fitcfg.initial, observed.times,
                                       icfg);
  } catch (const Error&) {
    return {kPenaltyBase, true};
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double d = observed.cumulative[k] - model[k];
    sse += d * d;
  }
  if (!std::isfinite(sse)) return {kPenaltyBase, true};
  return {sse, false};
}

namespace {

struct Vertex {
  std::vector<double> u;  // normalized coordinates
  ObjectiveValue f;
};

class NelderMead {
 public:
  static constexpr double kReflect = 1.0;
  static constexpr double kExpand = 2.0;
  static constexpr double kContract = 0.5;
  static constexpr double kShrink = 0.5;
  static constexpr double kInitialStep = 0.1;

  NelderMead(const ObservedSeries& observed, const FitConfig& fitcfg,
             const IntegratorConfig& icfg)
      : observed_(observed), fitcfg_(fitcfg), icfg_(icfg) {}

  StartOutcome run(const std::vector<double>& start) {
    evals_ = 0;
    const auto [best, converged] = descend(start);
    StartOutcome out;
    out.start = to_theta(start);
    out.theta = to_theta(best.u);
    out.objective = best.f.value;
    out.penalized = best.f.penalized;
    out.n_evals = evals_;
    out.converged = converged;
    return out;
  }

  std::vector<double> to_theta(const std::vector<double>& u) const {
    std::vector<double> theta(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      const auto& b = fitcfg_.bounds[k];
      theta[k] = b.lo + u[k] * (b.hi - b.lo);
    }
    return theta;
  }

 private:
  std::pair<Vertex, bool> descend(const std::vector<double>& start) {
    const std::size_t d = start.size();
    std::vector<Vertex> simplex;
    simplex.push_back(make(start));
    for (std::size_t k = 0; k < d; ++k) {
      auto u = start;
      const bool room_above = u[k] + kInitialStep <= 1.0;
      u[k] += room_above ? kInitialStep : -kInitialStep;
      simplex.push_back(make(u));
    }

    bool converged = false;
    for (;;) {
      std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
        return a.f.value < b.f.value;
      });
      if (diameter(simplex) <= fitcfg_.tolerance) {
        converged = true;
        break;
      }
      if (evals_ >= fitcfg_.max_evals) break;

      std::vector<double> centroid(d, 0.0);
      for (std::size_t v = 0; v < d; ++v) {
        for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[v].u[k] / static_cast<double>(d);
      }
      const Vertex& best = simplex.front();
      const Vertex& worst = simplex.back();
      const double second_worst = simplex[d - 1].f.value;

      Vertex reflected = make(along(centroid, worst.u, -kReflect));
      if (reflected.f.value < best.f.value) {
        Vertex expanded = make(along(centroid, reflected.u, kExpand));
        simplex.back() = expanded.f.value < reflected.f.value ? expanded : reflected;
        continue;
      }
      if (reflected.f.value < second_worst) {
        simplex.back() = reflected;
        continue;
      }
      if (reflected.f.value < worst.f.value) {
        Vertex outside = make(along(centroid, reflected.u, kContract));
        if (outside.f.value <= reflected.f.value) {
          simplex.back() = outside;
          continue;
        }
      } else {
        Vertex inside = make(along(centroid, worst.u, kContract));
        if (inside.f.value < worst.f.value) {
          simplex.back() = inside;
          continue;
        }
      }
      for (std::size_t v = 1; v < simplex.size(); ++v) {
        simplex[v] = make(along(simplex.front().u, simplex[v].u, kShrink));
      }
    }

    return {simplex.front(), converged};
  }

  // origin + scale * (point - origin)
  static std::vector<double> along(const std::vector<double>& origin,
                                   const std::vector<double>& point, double scale) {
    std::vector<double> out(origin.size());
    for (std::size_t k = 0; k < origin.size(); ++k) {
      out[k] = origin[k] + scale * (point[k] - origin[k]);
    }
    return out;
  }

  static double diameter(const std::vector<Vertex>& simplex) {
    double d = 0.0;
    for (std::size_t v = 1; v < simplex.size(); ++v) {
      for (std::size_t k = 0; k < simplex[v].u.size(); ++k) {
        d = std::max(d, std::abs(simplex[v].u[k] - simplex.front().u[k]));
      }
    }
    return d;
  }

  Vertex make(std::vector<double> u) {
    ++evals_;
    const auto theta = to_theta(u);
    return {std::move(u), sse_objective(theta, observed_, fitcfg_, icfg_)};
  }

  const ObservedSeries& observed_;
  const FitConfig& fitcfg_;
  const IntegratorConfig& icfg_;
  int evals_ = 0;
};

}  // namespace

FitResult fit(const ObservedSeries& observed, const FitConfig& fitcfg,
              const IntegratorConfig& icfg) {
  if (observed.size() == 0) throw Error(ErrorCode::InvalidInput, "observed series is empty");
  validate(observed);
  validate(fitcfg);
  validate(icfg);

  const std::size_t d = fitcfg.free.size();
  const auto n_starts = static_cast<std::size_t>(fitcfg.n_starts);
  // Latin hypercube: along every axis each of the n_starts strata holds
  // exactly one start.
  SplitMix64 rng(fitcfg.seed);
  std::vector<std::vector<double>> starts(n_starts, std::vector<double>(d));
  std::vector<std::size_t> strata(n_starts);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    for (std::size_t i = n_starts; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(strata[i - 1], strata[j]);
    }
    for (std::size_t s = 0; s < n_starts; ++s) {
      starts[s][k] = (static_cast<double>(strata[s]) + rng.uniform()) / static_cast<double>(n_starts);
    }
  }

  FitResult result;
  result.starts.resize(n_starts);
  detail::parallel_for(n_starts, [&](std::size_t s) {
    NelderMead search(observed, fitcfg, icfg);
    result.starts[s] = search.run(starts[s]);
  });

  for (std::size_t s = 0; s < n_starts; ++s) {
    result.n_evals += result.starts[s].n_evals;
    if (result.starts[s].objective < result.starts[result.best_start].objective) {
      result.best_start = s;
    }
  }
  const StartOutcome& best = result.starts[result.best_start];
  result.theta = best.theta;
  result.objective = best.objective;
  result.converged = best.converged;
  if (best.penalized) {
    throw FitFailure("every fit start ended on a penalty value (model failure or out of bounds)",
                     result);
  }

  const auto predicted = model_cumulative_incidence(assemble(fitcfg, result.theta),
                                                    fitcfg.initial, observed.times, icfg);
  const auto metrics = error_metrics(observed.cumulative, predicted);
  result.e_rel = metrics.e_rel;
  result.mae = metrics.mae;
  return result;
}

ErrorMetrics error_metrics(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.size() != predicted.size() || observed.empty()) {
    throw Error(ErrorCode::InvalidInput, "error metrics need equal, nonzero lengths");
  }
  double l1 = 0.0;
  double l2 = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double d = observed[k] - predicted[k];
    l1 += std::abs(d);
    l2 += d * d;
    norm += predicted[k] * predicted[k];
  }
  ErrorMetrics out;
  out.mae = l1 / static_cast<double>(observed.size());
  if (norm > 0.0) out.e_rel = std::sqrt(l2) / std::sqrt(norm);
  return out;
}

std::vector<double> nondecreasing_fit(std::span<const double> y) {
  // Pool adjacent violators: blocks of (sum, count) with increasing means.
  std::vector<std::pair<double, std::size_t>> blocks;
  for (double v : y) {
    blocks.emplace_back(v, 1);
    while (blocks.size() > 1) {
      const auto& [s1, n1] = blocks[blocks.size() - 2];
      const auto& [s2, n2] = blocks.back();
      if (s1 / static_cast<double>(n1) <= s2 / static_cast<double>(n2)) break;
      const std::pair<double, std::size_t> merged{s1 + s2, n1 + n2};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& [sum, n] : blocks) out.insert(out.end(), n, sum / static_cast<double>(n));
  return out;
}

ObservedSeries generate_synthetic(const ModelParams& params, const StateVector& initial,
                                  std::span<const double> times, double noise_sd,
                                  std::uint64_t seed, const IntegratorConfig& cfg) {
  if (!std::isfinite(noise_sd) || noise_sd < 0.0) {
    throw Error(ErrorCode::InvalidInput, "noise standard deviation must be >= 0");
  }
  ObservedSeries out;
  out.times.assign(times.begin(), times.end());
  out.cumulative = model_cumulative_incidence(params, initial, times, cfg);
  if (noise_sd > 0.0) {
    SplitMix64 rng(seed);
    for (double& y : out.cumulative) y += noise_sd * rng.normal();
  }
  out.cumulative = nondecreasing_fit(out.cumulative);
  for (double& y : out.cumulative) y = std::max(y, 0.0);
  return out;
}

}  // namespace sqcir
