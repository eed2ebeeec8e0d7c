#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "sqcir/error.hpp"
#include "sqcir/integrator.hpp"

using namespace sqcir;

namespace {

double max_total_error(const Trajectory& traj, const ModelParams& p) {
  const double n0 = total_population(traj.states.front());
  double worst = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const double want = oracle::total_closed(n0, p, traj.times[n]);
    worst = std::max(worst, oracle::rel(total_population(traj.states[n]), want));
  }
  return worst;
}

const EpsilonSchedule kTable1Eps = EpsilonSchedule::constant(0.03);

}  // namespace

TEST_CASE("closed form total") {
  const auto p = oracle::table1();
  CHECK(closed_form_total(123.0, p, 0.0) == 123.0);
  CHECK(closed_form_total(100.0, p, 1e5) == doctest::Approx(400.0).epsilon(1e-15));
  for (double t : {0.0, 1.0, 17.5, 300.0}) CHECK(closed_form_total(400.0, p, t) == 400.0);
  CHECK(closed_form_total(100.0, p, 100.0) == doctest::Approx(400.0 - 300.0 * std::exp(-1.0)));
}

TEST_CASE("mob-free point stays put") {
  const auto p = oracle::table1();
  const auto traj = integrate({400, 0, 0, 0, 0}, p, {0.0, 50.0, 0.01}, kTable1Eps);
  for (const auto& x : traj.states) CHECK(x == StateVector{400, 0, 0, 0, 0});
}

TEST_CASE("total population follows the closed form") {
  const auto p = oracle::table1();
  const auto traj = integrate({97, 1, 1, 1, 0}, p, {0.0, 300.0, 0.01}, kTable1Eps);
  const auto at100 = std::find_if(traj.times.begin(), traj.times.end(),
                                  [](double t) { return std::abs(t - 100.0) < 1e-9; });
  REQUIRE(at100 != traj.times.end());
  const auto& x = traj.states[static_cast<std::size_t>(at100 - traj.times.begin())];
  CHECK(oracle::rel(total_population(x), 289.6362) < 1e-6);
  CHECK(max_total_error(traj, p) < 1e-6);

  const auto coarse = integrate({97, 1, 1, 1, 0}, p, {0.0, 300.0, 0.05}, kTable1Eps);
  CHECK(max_total_error(coarse, p) < 1e-6);
}

TEST_CASE("RK4 converges at fourth order on I") {
  const auto p = oracle::table1();
  const StateVector x0{97, 1, 1, 1, 0};
  const double tf = 20.0;
  const auto ref = integrate(x0, p, {0.0, tf, 0.000625}, kTable1Eps).states.back().i;
  auto err = [&](double h) {
    return std::abs(integrate(x0, p, {0.0, tf, h}, kTable1Eps).states.back().i - ref);
  };
  const double e1 = err(0.04);
  const double e2 = err(0.02);
  const double e3 = err(0.01);
  MESSAGE("I(20) errors: ", e1, " ", e2, " ", e3);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e3 > 12.0);
  CHECK(e2 / e3 < 20.0);
}

TEST_CASE("trajectories started in the invariant region stay there") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    const auto p = oracle::random_params(gen);
    const double cap = p.lambda / p.phi;
    std::array<double, 5> w{};
    double sum = 0.0;
    for (auto& v : w) sum += (v = u(gen) + 1e-3);
    const double n0 = cap * (0.05 + 0.9 * u(gen));
    StateVector x0{};
    for (int k = 0; k < 5; ++k) w[k] *= n0 / sum;
    x0 = from_array(w);
    const auto traj = integrate(x0, p, {0.0, 100.0, 0.01}, EpsilonSchedule::constant(p.epsilon0));
    bool inside = true;
    for (const auto& x : traj.states) inside = inside && in_invariant_region(x, p);
    CHECK(inside);
  }
}

TEST_CASE("integration is deterministic") {
  const auto p = oracle::fig_peak();
  const EpsilonSchedule eps{{3.3, 7.0}, {0.26, 0.65, 0.26}};
  const auto a = integrate({537.5, 1, 1, 1, 0}, p, {0.0, 20.0, 0.01}, eps);
  const auto b = integrate({537.5, 1, 1, 1, 0}, p, {0.0, 20.0, 0.01}, eps);
  CHECK(a.times == b.times);
  CHECK(a.states == b.states);
  CHECK(a.epsilon_used == b.epsilon_used);
}

TEST_CASE("steps are split at breakpoints") {
  const IntegratorConfig cfg{0.0, 1.0, 0.1};
  const std::vector<double> bps{0.25, 0.3 + 1e-13, 2.0};
  const auto grid = build_time_grid(cfg, bps);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::count(grid.begin(), grid.end(), 0.25) == 1);
  // A breakpoint within rounding of a nominal point replaces it.
  CHECK(std::count(grid.begin(), grid.end(), 0.3 + 1e-13) == 1);
  CHECK(grid.size() == 12);

  const auto p = oracle::table1();
  const EpsilonSchedule eps{{0.25}, {0.03, 0.06}};
  const auto traj = integrate({97, 1, 1, 1, 0}, p, cfg, eps);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    CHECK(traj.epsilon_used[n] == (traj.times[n] < 0.25 ? 0.03 : 0.06));
  }
}

TEST_CASE("piecewise schedule equals restarting at the breakpoint") {
  const auto p = oracle::fig_sim();
  const StateVector x0{267.27, 1, 1, 1, 0};
  const auto whole = integrate(x0, p, {0.0, 2.0, 0.01}, EpsilonSchedule{{1.0}, {0.26, 0.52}});
  const auto first = integrate(x0, p, {0.0, 1.0, 0.01}, EpsilonSchedule::constant(0.26));
  const auto second =
      integrate(first.states.back(), p, {1.0, 2.0, 0.01}, EpsilonSchedule::constant(0.52));
  for (int k = 0; k < 5; ++k) {
    CHECK(to_array(whole.states.back())[k] ==
          doctest::Approx(to_array(second.states.back())[k]).epsilon(1e-12));
  }
}

TEST_CASE("oversized steps are reported, not clamped") {
  const auto p = oracle::fig_peak();
  try {
    integrate({537.5, 1, 1, 1, 0}, p, {0.0, 300.0, 2.0}, EpsilonSchedule::constant(0.26));
    FAIL("expected a step failure");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::StepSize || e.code() == ErrorCode::Divergence));
  }
}

TEST_CASE("configuration validation") {
  const auto p = oracle::table1();
  CHECK_THROWS_AS(integrate({1, 0, 0, 0, 0}, p, {0.0, 0.0, 0.01}, kTable1Eps), Error);
  CHECK_THROWS_AS(integrate({1, 0, 0, 0, 0}, p, {0.0, 1.0, 0.0}, kTable1Eps), Error);
  CHECK_THROWS_AS(integrate({1, 0, 0, 0, 0}, p, {0.0, 1.0, 2.0}, kTable1Eps), Error);
  CHECK_THROWS_AS(integrate({-1, 0, 0, 0, 0}, p, {0.0, 1.0, 0.1}, kTable1Eps), Error);
  CHECK_THROWS_AS(integrate({1, 0, 0, 0, 0}, p, {0.0, 1.0, 0.1}, EpsilonSchedule{{0.5}, {0.1}}),
                  Error);
}

TEST_CASE("one-region network is bit-identical to the reduced run") {
  const auto p = oracle::fig_peak();
  const StateVector x0{537.5, 1, 1, 1, 0};
  const IntegratorConfig cfg{0.0, 30.0, 0.01};
  const EpsilonSchedule eps{{4.0}, {0.26, 0.5}};
  const auto reduced = integrate(x0, p, cfg, eps);
  const auto net = integrate_network({{x0}}, NetworkParams{1, {}, {p}}, cfg, eps);
  REQUIRE(net.size() == reduced.size());
  for (std::size_t n = 0; n < net.size(); ++n) CHECK(net.states[n].regions[0] == reduced.states[n]);
}

TEST_CASE("three-region network conserves the aggregate population") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto base = oracle::table1();
  NetworkParams net;
  net.k = 3;
  net.mobility.assign(9, 0.0);
  NetworkState x0;
  double lambda_sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    auto p = base;
    p.lambda = 1.0 + 3.0 * u(gen);
    lambda_sum += p.lambda;
    net.per_region.push_back(p);
    x0.regions.push_back({50.0 + 100 * u(gen), u(gen), 1.0, 1.0, 0.0});
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) net.mobility[i * 3 + j] = 0.2 * u(gen);
    }
  }
  const IntegratorConfig cfg{0.0, 300.0, 0.01};
  const auto traj = integrate_network(x0, net, cfg, kTable1Eps);
  auto aggregate = base;
  aggregate.lambda = lambda_sum;
  double n0 = 0.0;
  for (const auto& r : x0.regions) n0 += total_population(r);
  double worst = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    double total = 0.0;
    for (const auto& r : traj.states[n].regions) total += total_population(r);
    worst = std::max(worst, oracle::rel(total, oracle::total_closed(n0, aggregate, traj.times[n])));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("uncoupled regions match independent runs exactly") {
  NetworkParams net{3, std::vector<double>(9, 0.0), {oracle::table1(), oracle::fig_sim(), oracle::fig_peak()}};
  NetworkState x0{{{97, 1, 1, 1, 0}, {267, 1, 1, 1, 0}, {537, 1, 1, 1, 0}}};
  const IntegratorConfig cfg{0.0, 50.0, 0.01};
  const auto eps = EpsilonSchedule::constant(0.1);
  const auto traj = integrate_network(x0, net, cfg, eps);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto solo = integrate(x0.regions[i], net.per_region[i], cfg, eps);
    REQUIRE(solo.size() == traj.size());
    bool same = true;
    for (std::size_t n = 0; n < solo.size(); ++n) same = same && solo.states[n] == traj.states[n].regions[i];
    CHECK(same);
  }
}
