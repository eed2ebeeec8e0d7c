#include "sqcir/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "sqcir/error.hpp"
#include "sqcir/parallel.hpp"

namespace sqcir {

namespace {

Eigen::Matrix<double, 5, 1> as_vector(const StateVector& x) {
  Eigen::Matrix<double, 5, 1> v;
  v << x.s, x.q, x.c, x.i, x.r;
  return v;
}

StateVector as_state(const Eigen::Matrix<double, 5, 1>& v) {
  return {v(0), v(1), v(2), v(3), v(4)};
}

bool all_nonnegative(const StateVector& x) {
  for (double v : to_array(x)) {
    if (v < -kClampTolerance) return false;
  }
  return true;
}

}  // namespace

double r0_paper(const ModelParams& p) {
  const double denom = p.phi * (p.phi + p.nu);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::InvalidParameter, "R0 needs phi > 0 and phi + nu > 0");
  }
  return p.lambda * p.epsilon0 / denom;
}

double r0_next_generation(const ModelParams& p) {
  if (!(p.phi > 0.0)) throw Error(ErrorCode::InvalidParameter, "R0 needs phi > 0");
  Eigen::Matrix2d f;
  f << p.lambda * p.epsilon0 / p.phi, 0.0, 0.0, 0.0;
  Eigen::Matrix2d v;
  v << p.phi + p.mu, 0.0, 0.0, p.phi + p.nu;
  const double det = v.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::InvalidParameter, "transition matrix V is singular");
  }
  const Eigen::Matrix2d k = f * v.inverse();
  // Spectral radius of a 2x2 from its characteristic polynomial.
  const double tr = k.trace();
  const double dk = k.determinant();
  const double disc = tr * tr - 4.0 * dk;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::abs(0.5 * (tr + root)), std::abs(0.5 * (tr - root)));
  }
  return std::sqrt(dk);
}

double effective_r(const ModelParams& params, double m) {
  ModelParams scaled = params;
  scaled.epsilon0 = params.epsilon0 * (1.0 + m);
  return r0_paper(scaled);
}

StateVector mob_free_equilibrium(const ModelParams& p) {
  if (!(p.phi > 0.0)) throw Error(ErrorCode::InvalidParameter, "MFE needs phi > 0");
  return {p.lambda / p.phi, 0.0, 0.0, 0.0, 0.0};
}

EndemicClosed endemic_equilibrium_closed(const ModelParams& p) {
  if (!(p.alpha > 0.0) || !(p.delta > 0.0)) {
    throw Error(ErrorCode::DegenerateParameter, "endemic equilibrium needs alpha > 0 and delta > 0");
  }
  const double eps = p.epsilon0;
  const double a = eps * (p.nu + p.phi) + p.delta * p.phi;
  EndemicClosed out;
  StateVector& x = out.state;
  x.s = a / (p.alpha * p.delta);
  x.q = p.lambda * p.delta / a - eps * (p.nu + p.phi) / (p.alpha * p.delta) - p.phi / p.alpha;
  x.c = (p.nu + p.phi) / p.delta;
  x.i = (eps * (x.s + x.q) - p.mu - p.phi) / p.delta;
  x.r = (p.mu * x.c + p.nu * x.i) / p.phi;
  for (double v : to_array(x)) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::DegenerateParameter, "endemic equilibrium is not finite");
    }
  }
  out.feasible = all_nonnegative(x);
  return out;
}

double max_abs_residual(const StateVector& state, const ModelParams& params) {
  double worst = 0.0;
  for (double v : to_array(derivative_reduced(state, params, params.epsilon0))) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

Matrix5 jacobian(const StateVector& x, const ModelParams& p) {
  const double e = p.epsilon0;
  Matrix5 j;
  // clang-format off
  j << -x.c * e - p.phi - x.q * p.alpha, -x.s * p.alpha, -x.s * e, 0.0, 0.0,
       x.q * p.alpha, -x.c * e - p.phi + x.s * p.alpha, -x.q * e, 0.0, 0.0,
       x.c * e, x.c * e, -x.i * p.delta - p.phi + x.q * e + x.s * e - p.mu, -x.c * p.delta, 0.0,
       0.0, 0.0, x.i * p.delta, x.c * p.delta - p.phi - p.nu, 0.0,
       0.0, 0.0, p.mu, p.nu, -p.phi;
  // clang-format on
  return j;
}

NewtonResult endemic_equilibrium_numeric(const ModelParams& params, const StateVector& guess) {
  for (double v : to_array(guess)) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "Newton guess must be finite");
  }
  if (!(params.delta > 0.0)) {
    // dI/dt = -(nu + phi) I forces I = 0: no endemic point exists.
    throw Error(ErrorCode::DegenerateParameter, "endemic equilibrium needs delta > 0");
  }
  StateVector x = guess;
  double residual = max_abs_residual(x, params);
  for (int iter = 0;; ++iter) {
    if (residual <= kNewtonTolerance) {
      return {x, residual, iter, all_nonnegative(x)};
    }
    if (iter == kNewtonMaxIterations) {
      std::ostringstream msg;
      msg << "Newton iteration did not converge in " << kNewtonMaxIterations
          << " iterations; last residual " << residual;
      throw Error(ErrorCode::Convergence, msg.str());
    }
    const Eigen::FullPivLU<Matrix5> lu(jacobian(x, params));
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::DegenerateParameter, "singular Jacobian in Newton iteration");
    }
    const auto f = as_vector(derivative_reduced(x, params, params.epsilon0));
    const Eigen::Matrix<double, 5, 1> step = lu.solve(-f);

    double scale = 1.0;
    StateVector trial = as_state(as_vector(x) + step);
    double trial_residual = max_abs_residual(trial, params);
    for (int halving = 0; halving < kNewtonMaxHalvings && !(trial_residual < residual);
         ++halving) {
      scale *= 0.5;
      trial = as_state(as_vector(x) + scale * step);
      trial_residual = max_abs_residual(trial, params);
    }
    if (!std::isfinite(trial_residual)) {
      throw Error(ErrorCode::Convergence, "Newton iteration produced a non-finite state");
    }
    x = trial;
    residual = trial_residual;
  }
}

std::array<double, 5> eigenvalues_at_mfe(const ModelParams& p) {
  if (!(p.phi > 0.0)) throw Error(ErrorCode::InvalidParameter, "MFE spectrum needs phi > 0");
  const double phi2 = p.phi * p.phi;
  return {-p.phi, -p.phi, (p.lambda * p.alpha - phi2) / p.phi,
          (p.lambda * p.epsilon0 - phi2 - p.phi * p.mu) / p.phi, -p.phi - p.nu};
}

const char* to_string(Stability s) noexcept {
  return s == Stability::Stable ? "stable" : "unstable";
}

StabilityReport classify_stability(const ModelParams& params) {
  StabilityReport out;
  out.r0_paper = r0_paper(params);
  out.r0_ngm = r0_next_generation(params);
  out.eigenvalues_mfe = eigenvalues_at_mfe(params);
  const double top = *std::max_element(out.eigenvalues_mfe.begin(), out.eigenvalues_mfe.end());
  out.classification = top < 0.0 ? Stability::Stable : Stability::Unstable;
  out.criterion_agreement = (out.r0_paper < 1.0) == (out.classification == Stability::Stable);
  return out;
}

ThresholdReport critical_thresholds(const ModelParams& p) {
  if (!(p.lambda > 0.0) || !(p.epsilon0 > 0.0) || !(p.phi > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "thresholds need lambda, epsilon and phi > 0");
  }
  const double product = p.phi * (p.phi + p.nu);
  const double drive = p.epsilon0 * p.lambda;
  ThresholdReport out;
  out.epsilon_c = product / p.lambda;
  out.lambda_c = product / p.epsilon0;
  // Rationalized root of phi^2 + nu phi - drive = 0; no cancellation.
  out.phi_c = 2.0 * drive / (p.nu + std::sqrt(p.nu * p.nu + 4.0 * drive));
  return out;
}

SensitivityReport sensitivity_indices(const ModelParams& p) {
  const double sum = p.phi + p.nu;
  if (!(p.phi > 0.0) || !(sum > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "sensitivity needs phi > 0 and phi + nu > 0");
  }
  return {1.0, 1.0, -(2.0 * p.phi + p.nu) / sum, -p.nu / sum};
}

std::pair<double, double> long_run_means(const Trajectory& traj) {
  if (traj.size() < 2) {
    const auto& x = traj.states.back();
    return {x.c, x.i};
  }
  const double t0 = traj.times.front();
  const double tf = traj.times.back();
  const double start = tf - kLongRunFraction * (tf - t0);
  double area_c = 0.0;
  double area_i = 0.0;
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    double a = traj.times[n];
    const double b = traj.times[n + 1];
    if (b <= start) continue;
    double c_a = traj.states[n].c;
    double i_a = traj.states[n].i;
    const double c_b = traj.states[n + 1].c;
    const double i_b = traj.states[n + 1].i;
    if (a < start) {
      const double w = (start - a) / (b - a);
      c_a += w * (c_b - c_a);
      i_a += w * (i_b - i_a);
      a = start;
    }
    area_c += 0.5 * (b - a) * (c_a + c_b);
    area_i += 0.5 * (b - a) * (i_a + i_b);
  }
  const double span = tf - start;
  return {area_c / span, area_i / span};
}

BifurcationTable bifurcation_sweep(const ModelParams& params, const StateVector& initial,
                                   double lo, double hi, int n_steps,
                                   const IntegratorConfig& cfg, ParamName parameter) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidInput, "sweep needs 0 <= from < to");
  }
  if (n_steps < 2) throw Error(ErrorCode::InvalidInput, "sweep needs at least 2 steps");
  validate(cfg);

  BifurcationTable table;
  table.parameter = parameter;
  table.rows.resize(static_cast<std::size_t>(n_steps));
  const double width = hi - lo;
  detail::parallel_for(table.rows.size(), [&](std::size_t k) {
    BifurcationRow& row = table.rows[k];
    row.value = k + 1 == table.rows.size()
                    ? hi
                    : lo + width * static_cast<double>(k) / static_cast<double>(n_steps - 1);
    ModelParams p = params;
    set(p, parameter, row.value);
    try {
      row.r0_paper = r0_paper(p);
      const auto traj = integrate(initial, p, cfg, EpsilonSchedule::constant(p.epsilon0));
      std::tie(row.long_run_c, row.long_run_i) = long_run_means(traj);
      row.persisted = row.long_run_i > kPersistenceThreshold;
    } catch (const Error& e) {
      row.long_run_c = row.long_run_i = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
    }
  });
  return table;
}

}  // namespace sqcir
