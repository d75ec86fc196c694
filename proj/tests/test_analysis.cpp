#include "doctest.h"
#include "support.hpp"

#include "mag/analysis.hpp"
#include "mag/oracle.hpp"
#include "mag/potential.hpp"

#include <cmath>

using namespace mag;

namespace {

// z(theta) = a + u cosh(phi) + v sinh(phi), phi = theta + w sin(2 pi theta / T)
Trajectory free_particle(double a, double u, double v, double T, std::size_t m, double w = 0) {
  Trajectory tr(Gauge::Theta, 0, T, m, 1, 1);
  for (std::size_t k = 0; k <= m; ++k) {
    double th = tr.time(k), phi = th + w * std::sin(2 * M_PI * th / T);
    tr.set_state(k, Cloud::line({a + u * std::cosh(phi) + v * std::sinh(phi)}));
  }
  tr.sync_endpoints();
  return tr;
}

double variance(const std::vector<double>& xs) {
  double s = 0, s2 = 0, n = 0;
  for (double x : xs)
    if (std::isfinite(x)) {
      s += x;
      s2 += x * x;
      n += 1;
    }
  return s2 / n - (s / n) * (s / n);
}

}  // namespace

TEST_CASE("energy_profile") {
  SUBCASE("stuck at the lattice mean") {
    Lattice a = Lattice::line({0, 1});
    Trajectory tr = straight_line(Gauge::Theta, 0, 1, 32, Cloud::line({0.5, 0.5}), Cloud::line({0.5, 0.5}));
    EnergyProfile e = energy_profile(tr, a);
    for (double v : e.values) CHECK(v == doctest::Approx(-1).epsilon(1e-15));
    CHECK(e.max_deviation <= 1e-15);
  }
  SUBCASE("free particle is conservative") {
    EnergyProfile e = energy_profile(free_particle(0.3, 0.4, -0.7, 2, 2048), Lattice::line({0.3}));
    CHECK(e.max_deviation <= 1e-6);  // midpoint rule, O(h^2)
    CHECK(e.skipped == 0);
  }
  SUBCASE("a time wiggle breaks conservation") {
    Lattice a = Lattice::line({0.3});
    double v0 = variance(energy_profile(free_particle(0.3, 0.4, -0.7, 2, 1024), a).values);
    double v1 = variance(energy_profile(free_particle(0.3, 0.4, -0.7, 2, 1024, 0.05), a).values);
    CHECK(v1 > v0);
    CHECK(v1 > 1e-4);
  }
  SUBCASE("oracle minimizer with a stuck phase") {
    Lattice a = Lattice::line({0, 1});
    Cloud p = Cloud::line({0.45, 0.55});
    OracleResult o = oracle_minimizer_1d(a, p, p, 0, 3, 2048);
    EnergyProfile e = energy_profile(o.trajectory, a);
    CHECK(e.skipped == 2);
    CHECK(e.max_deviation <= 1e-3);
  }
}

TEST_CASE("momentum_residual") {
  SUBCASE("single particle from the oracle") {
    Lattice a = Lattice::line({0.2});
    OracleResult o = oracle_minimizer_1d(a, Cloud::line({-0.3}), Cloud::line({1.1}), 0, 1.5, 1024);
    CHECK(momentum_residual(o.trajectory, a) <= 1e-6);
  }
  SUBCASE("sticky simulation with merges") {
    Lattice a = Lattice::line({-1, 0, 2});
    StickyRun r = simulate_sticky(a, Cloud::line({-0.6, 0.1, 0.5}), Cloud::line({1.2, 0, -0.8}), 0, 2, 2048);
    CHECK(r.events.size() >= 1);
    CHECK(momentum_residual(r.trajectory, a) <= 1e-6);
  }
  SUBCASE("a straight line is not a solution") {
    Lattice a = Lattice::line({-1, 1});
    Trajectory tr = straight_line(Gauge::Theta, 0, 1, 256, Cloud::line({-3, 2}), Cloud::line({1, 4}));
    CHECK(momentum_residual(tr, a) > 0.1);
  }
}

TEST_CASE("detect_shocks") {
  SUBCASE("no clustering, no shocks") {
    Trajectory tr = straight_line(Gauge::Theta, 0, 1, 64, Cloud::line({0, 1}), Cloud::line({-1, 2}));
    CHECK(detect_shocks(tr).empty());
    CHECK(stuck_intervals(tr).empty());
  }
  SUBCASE("two-particle merge matches the event log") {
    Lattice a = Lattice::line({-1, 1});
    StickyRun r = simulate_sticky(a, Cloud::line({-0.5, 0.5}), Cloud::line({1, -1}), 0, 2, 512);
    auto shocks = detect_shocks(r.trajectory);
    REQUIRE(shocks.size() == 1);
    REQUIRE(r.events.size() == 1);
    CHECK(shocks[0].kind == ShockKind::Merge);
    CHECK(shocks[0].members == std::vector<std::size_t>{0, 1});
    CHECK(std::abs(shocks[0].time - r.events[0].time) <= 1e-4);
    CHECK(std::abs(shocks[0].location - r.events[0].position) <= 1e-4);
    CHECK(shocks[0].isolated);
    auto st = stuck_intervals(r.trajectory);
    REQUIRE(st.size() == 1);
    CHECK(st[0].end == 2);
    CHECK(st[0].begin == doctest::Approx(r.events[0].time).epsilon(0.01));
  }
  SUBCASE("two well-separated merges") {
    Lattice a = Lattice::line({-2, -1, 1, 2});
    StickyRun r = simulate_sticky(a, Cloud::line({-2.5, -1.5, 1.2, 1.8}), Cloud::line({1, -1, 0.8, -0.8}), 0, 2, 1024);
    auto shocks = detect_shocks(r.trajectory);
    REQUIRE(shocks.size() == 2);
    REQUIRE(r.events.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(shocks[i].isolated);
    CHECK(shocks[0].members.size() == 2);
    CHECK(shocks[1].members.size() == 2);
    CHECK(std::abs(shocks[0].time - shocks[1].time) > 0.05);
  }
  SUBCASE("split is recognized") {
    Lattice a = Lattice::line({0, 1});
    Cloud p = Cloud::line({0.45, 0.55});
    OracleResult o = oracle_minimizer_1d(a, p, p, 0, 3, 1024);
    auto shocks = detect_shocks(o.trajectory);
    REQUIRE(shocks.size() == 2);
    CHECK(shocks[0].kind == ShockKind::Merge);
    CHECK(shocks[1].kind == ShockKind::Split);
    CHECK(shocks[0].time == doctest::Approx(o.pattern.times[0]).epsilon(1e-6));
    CHECK(shocks[1].time == doctest::Approx(o.pattern.times[1]).epsilon(1e-6));
    CHECK(shocks[0].location == doctest::Approx(0.5));
  }
}

TEST_CASE("check_velocity_jump") {
  CHECK(delta_gap(Lattice::line({0, 1})).alpha == doctest::Approx(0.5));
  CHECK(delta_gap(Lattice::line({0, 1, 2})).alpha == doctest::Approx(std::sqrt(1.0 / 12)));

  SUBCASE("two-particle oracle minimizer with a sticking interval") {
    Lattice a = Lattice::line({0, 1});
    Cloud p = Cloud::line({0.45, 0.55});
    OracleResult o = oracle_minimizer_1d(a, p, p, 0, 3, 1024);
    for (const ShockRecord& s : detect_shocks(o.trajectory)) {
      REQUIRE(s.isolated);
      JumpCheck j = check_velocity_jump(o.trajectory, s, a, 0.2);
      CHECK_FALSE(j.inconclusive);
      CHECK(j.pass);
      CHECK(j.jump >= 0.8 * j.alpha);
    }
  }
  SUBCASE("windows that run off the grid are inconclusive") {
    Lattice a = Lattice::line({-1, 1});
    StickyRun r = simulate_sticky(a, Cloud::line({-0.01, 0.01}), Cloud::line({1, -1}), 0, 1, 512);
    auto shocks = detect_shocks(r.trajectory);
    REQUIRE(shocks.size() == 1);
    CHECK(check_velocity_jump(r.trajectory, shocks[0], a).inconclusive);
  }
  SUBCASE("non-isolated shocks are rejected") {
    ShockRecord s;
    s.members = {0, 1};
    Trajectory tr = straight_line(Gauge::Theta, 0, 1, 64, Cloud::line({0, 1}), Cloud::line({0, 1}));
    CHECK_THROWS_AS(check_velocity_jump(tr, s, Lattice::line({0, 1})), ValidationError);
  }
}

TEST_CASE("merge energy jump") {
  Lattice a = Lattice::line({-1, 1});
  auto [c, e] = merge_clusters({0, 0.3, {0}}, {0, -0.3, {1}}, 0);
  CHECK(merge_energy_jump(e, a) == doctest::Approx(2 - 2 * 0.09));
  CHECK(max_spread(straight_line(Gauge::Theta, 0, 1, 4, Cloud::line({0, 1}), Cloud::line({0, 3}))) == 3);
}
