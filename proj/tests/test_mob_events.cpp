#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "oracles.hpp"
#include "sqcir/error.hpp"
#include "sqcir/mob_events.hpp"
#include "sqcir/rng.hpp"

using namespace sqcir;

namespace {

Trajectory triangle() {
  Trajectory traj;
  for (int k = 0; k <= 4; ++k) {
    const double t = 0.5 * k;
    traj.times.push_back(t);
    traj.states.push_back({0, 0, 0, t <= 1.0 ? 10.0 * t : 10.0 * (2.0 - t), 0});
    traj.epsilon_used.push_back(0.0);
  }
  return traj;
}

StateVector fig_peak_initial() {
  const auto p = oracle::fig_peak();
  return {p.lambda / p.phi - 3.0, 1, 1, 1, 0};
}

}  // namespace

TEST_CASE("SplitMix64 reference stream") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
  SplitMix64 a(99);
  SplitMix64 b(99);
  for (int k = 0; k < 100; ++k) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("uniform and normal draws have the right moments") {
  SplitMix64 rng(5);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("derived seeds differ per stream and are stable") {
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("no arrivals means no mob") {
  MobProcessConfig cfg;
  cfg.arrival_rate = 0.0;
  const auto m = sample_mob_process(cfg, 0.0, 300.0);
  CHECK(m.breakpoints.empty());
  CHECK(m.values == std::vector<double>{0.0});
  const auto eps = epsilon_schedule(oracle::fig_peak(), m);
  CHECK(eps.breakpoints.empty());
  CHECK(eps.values == std::vector<double>{0.26});
}

TEST_CASE("mob process is a pure function of the seed") {
  MobProcessConfig cfg;
  cfg.seed = 1234;
  cfg.arrival_rate = 0.1;
  const auto a = sample_mob_process(cfg, 0.0, 300.0);
  const auto b = sample_mob_process(cfg, 0.0, 300.0);
  CHECK(a.breakpoints == b.breakpoints);
  CHECK(a.values == b.values);
  cfg.seed = 1235;
  CHECK(sample_mob_process(cfg, 0.0, 300.0).breakpoints != a.breakpoints);
}

TEST_CASE("degenerate amplitude range") {
  MobProcessConfig cfg;
  cfg.amplitude_lo = cfg.amplitude_hi = 1.5;
  cfg.arrival_rate = 0.05;
  cfg.seed = 3;
  const auto events = sample_mob_events(cfg, 0.0, 300.0);
  REQUIRE(!events.empty());
  const auto m = sample_mob_process(cfg, 0.0, 300.0);
  for (const auto& e : events) {
    for (double f : {0.0, 0.25, 0.5, 0.99}) {
      const double t = e.start + f * (e.end - e.start);
      if (t < 300.0) CHECK(m.at(t) == 1.5);
    }
  }
  for (double v : m.values) CHECK_UNARY(v == 0.0 || v == 1.5);
}

TEST_CASE("overlapping events take the larger amplitude") {
  MobProcessConfig cfg;
  cfg.arrival_rate = 0.3;
  cfg.event_duration = 10.0;
  cfg.seed = 77;
  const auto events = sample_mob_events(cfg, 0.0, 200.0);
  const auto m = sample_mob_process(cfg, 0.0, 200.0);
  for (double t = 0.05; t < 200.0; t += 0.1) {
    double want = 0.0;
    for (const auto& e : events) {
      if (e.start <= t && t < e.end) want = std::max(want, e.amplitude);
    }
    CHECK(m.at(t) == want);
  }
  for (std::size_t k = 1; k < m.values.size(); ++k) CHECK(m.values[k] != m.values[k - 1]);
}

TEST_CASE("event counts and amplitudes follow their distributions") {
  MobProcessConfig cfg;
  double count = 0.0;
  double amp = 0.0;
  double n_amp = 0.0;
  const int trials = 2000;
  for (int s = 0; s < trials; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const auto events = sample_mob_events(cfg, 0.0, 1000.0);
    count += static_cast<double>(events.size());
    for (const auto& e : events) {
      CHECK_UNARY(e.amplitude >= 0.0 && e.amplitude <= 1.5);
      CHECK(e.end - e.start == doctest::Approx(10.0));
      amp += e.amplitude;
      n_amp += 1.0;
    }
  }
  CHECK(count / trials == doctest::Approx(20.0).epsilon(0.025));
  CHECK(amp / n_amp == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("epsilon schedule scales the contact rate") {
  const MobSchedule m{{5.0, 15.0}, {0.0, 1.5, 0.0}};
  const auto eps = epsilon_schedule(oracle::fig_peak(), m);
  CHECK(eps.breakpoints == m.breakpoints);
  CHECK(eps.at(10.0) == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(eps.at(0.0) == 0.26);
  CHECK(eps.at(20.0) == 0.26);
  for (double v : eps.values) CHECK(v >= 0.26);
}

TEST_CASE("mob configuration validation") {
  MobProcessConfig cfg;
  cfg.amplitude_hi = 2.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.amplitude_lo = 1.0;
  cfg.amplitude_hi = 0.5;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.arrival_rate = -1.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.event_duration = 0.0;
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("metrics of a zero trajectory") {
  Trajectory traj;
  for (int k = 0; k < 10; ++k) {
    traj.times.push_back(3.0 + k);
    traj.states.push_back({100, 0, 0, 0, 0});
    traj.epsilon_used.push_back(0.1);
  }
  const auto m = compute_run_metrics(traj, oracle::table1());
  CHECK(m == RunMetrics{0.0, 3.0, 0.0, 0.0, 0.0});
}

TEST_CASE("metrics of a triangular infection curve") {
  ModelParams p{};
  p.nu = 1.0;
  const auto m = compute_run_metrics(triangle(), p, 1.0);
  CHECK(m.peak_infected == 10.0);
  CHECK(m.peak_time == 1.0);
  CHECK(m.duration == doctest::Approx(1.8).epsilon(1e-14));
  // nu * I averaged over {I >= 1}: the triangle from 1 to 10 and back.
  CHECK(m.avg_recovery_rate == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(m.total_infections == 0.0);
}

TEST_CASE("total infections is stable under step halving") {
  const auto p = oracle::fig_peak();
  const auto eps = EpsilonSchedule::constant(p.epsilon0);
  const auto a = compute_run_metrics(integrate(fig_peak_initial(), p, {0, 150, 0.01}, eps), p);
  const auto b = compute_run_metrics(integrate(fig_peak_initial(), p, {0, 150, 0.005}, eps), p);
  CHECK(a.total_infections == doctest::Approx(b.total_infections).epsilon(0.01));
  CHECK(a.total_infections > 0.0);
}

TEST_CASE("ensemble without arrivals reproduces the baseline") {
  MobProcessConfig mob;
  mob.arrival_rate = 0.0;
  const auto rep = run_ensemble(fig_peak_initial(), oracle::fig_peak(), mob, {0, 50, 0.01}, 3);
  REQUIRE(rep.successful == 3);
  for (const auto& run : rep.per_run) CHECK(*run.metrics == rep.baseline);
  CHECK(rep.mean.peak_infected == doctest::Approx(rep.baseline.peak_infected).epsilon(1e-15));
  CHECK(rep.stddev.peak_infected <= 1e-12 * rep.baseline.peak_infected);
  CHECK(rep.stddev.total_infections <= 1e-12 * rep.baseline.total_infections);
}

TEST_CASE("ensemble is deterministic") {
  MobProcessConfig mob;
  mob.seed = 7;
  const auto a = run_ensemble(fig_peak_initial(), oracle::fig_peak(), mob, {0, 150, 0.01}, 8);
  const auto b = run_ensemble(fig_peak_initial(), oracle::fig_peak(), mob, {0, 150, 0.01}, 8);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);
  for (std::size_t r = 0; r < 8; ++r) {
    CHECK(a.per_run[r].seed == b.per_run[r].seed);
    CHECK(a.per_run[r].metrics == b.per_run[r].metrics);
  }
}

TEST_CASE("mob events raise infections on average") {
  MobProcessConfig mob;
  mob.seed = 7;
  const auto p = oracle::fig_peak();
  const auto rep = run_ensemble(fig_peak_initial(), p, mob, {0, 150, 0.01}, 20);
  REQUIRE(rep.successful == 20);
  // Single runs can end below the baseline total, so only the mean is compared.
  for (const auto& run : rep.per_run) CHECK(run.metrics->peak_infected >= rep.baseline.peak_infected);
  CHECK(rep.mean.total_infections > rep.baseline.total_infections);
}
