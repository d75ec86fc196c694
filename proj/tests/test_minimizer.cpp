#include "doctest.h"

#include "mag/analysis.hpp"
#include "mag/minimizer.hpp"
#include "mag/oracle.hpp"

#include <cmath>

using namespace mag;

namespace {

ActionSpec theta_spec(const Lattice& a, const Cloud& p, const Cloud& q, double s0, double s1, double eps) {
  ActionSpec s;
  s.kind = ActionKind::LambdaEps;
  s.eps = eps;
  s.lattice = a;
  s.start = s0;
  s.end = s1;
  s.source = p;
  s.target = q;
  return s;
}

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("single particle converges to the cosh/sinh boundary value solution") {
  Lattice a = Lattice::line({0.3});
  Cloud p = Cloud::line({-0.5}), q = Cloud::line({1.2});
  const double T = 1.5;
  const std::size_t m = 512;
  SolveReport r = minimize_fixed_eps(theta_spec(a, p, q, 0, T, 0.1), straight_line(Gauge::Theta, 0, T, m, p, q));
  CHECK(r.converged);
  CHECK(r.grad_norm <= 1e-7);
  CHECK(non_increasing(r.history));
  double err = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    double th = r.final_traj.time(k);
    double z = 0.3 + (-0.8 * std::sinh(T - th) + 0.9 * std::sinh(th)) / std::sinh(T);
    err = std::max(err, std::abs(z - r.final_traj.state(k)[0]));
  }
  CHECK(err <= 1e-5);
  CHECK(r.final_traj.state(0) == p);
  CHECK(r.final_traj.state(m) == q);
}

TEST_CASE("the oracle minimizer is a fixed point of the descent") {
  Lattice a = Lattice::line({-1, 1});
  Cloud p = Cloud::line({-0.3, 0.3});
  OracleResult o = oracle_minimizer_1d(a, p, p, 0, 1, 512);
  ActionSpec s = theta_spec(a, p, p, 0, 1, 1e-3);
  double start = eval_action(s, o.trajectory).value;
  SolveReport r = minimize_fixed_eps(s, o.trajectory);
  CHECK(r.value <= start);
  CHECK(sup_distance(r.final_traj, o.trajectory) <= 1e-6);
  CHECK(r.value == doctest::Approx(o.value).epsilon(1e-5));
}

TEST_CASE("descent histories are non-increasing and endpoints never move") {
  Lattice a = Lattice::line({0, 1, 2});
  Cloud p = Cloud::line({0.2, 1.4, 1.5}), q = Cloud::line({0.9, 1.0, 2.4});
  for (double eps : {0.5, 0.05}) {
    SolveReport r = minimize_fixed_eps(theta_spec(a, p, q, 0, 1, eps), straight_line(Gauge::Theta, 0, 1, 128, p, q));
    CHECK(r.converged);
    CHECK(non_increasing(r.history));
    CHECK(r.final_traj.state(0) == p);
    CHECK(r.final_traj.state(128) == q);
    CHECK(r.value <= r.history.front());
  }
}

TEST_CASE("t-gauge and Y-scaled functionals are minimized too") {
  Lattice a = Lattice::line({-1, 1});
  Cloud p = Cloud::line({-0.4, 0.2}), q = Cloud::line({-0.6, 0.9});
  for (ActionKind kind : {ActionKind::LEps, ActionKind::KEps}) {
    ActionSpec s = theta_spec(a, p, q, 1, 2, 0.2);
    s.kind = kind;
    Gauge g = gauge_of(kind);
    SolveReport r = minimize_fixed_eps(s, straight_line(g, 1, 2, 64, p, q));
    CHECK(r.converged);
    CHECK(non_increasing(r.history));
    auto grad = grad_discretized_action(s, r.final_traj);
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("nonsmooth functionals and bad initial data are rejected") {
  Lattice a = Lattice::line({0, 1});
  Cloud p = Cloud::line({0, 1});
  ActionSpec s = theta_spec(a, p, p, 0, 1, 0.1);
  Trajectory init = straight_line(Gauge::Theta, 0, 1, 16, p, p);
  s.kind = ActionKind::LambdaPrime;
  CHECK_THROWS_AS(minimize_fixed_eps(s, init), ValidationError);
  s.kind = ActionKind::LambdaEps;
  s.target = Cloud::line({0.5, 0.5});
  CHECK_THROWS_AS(minimize_fixed_eps(s, init), ValidationError);
}

TEST_CASE("continuation sweep") {
  Lattice a = Lattice::line({-1, 1});
  Cloud p = Cloud::line({-0.3, 0.3});
  const std::size_t m = 512;
  Trajectory init = straight_line(Gauge::Theta, 0, 1, m, p, p);
  ActionSpec base = theta_spec(a, p, p, 0, 1, 1);

  SUBCASE("a one-element schedule is a single solve") {
    auto sw = continuation_sweep(base, {0.25}, init);
    ActionSpec s = base;
    s.eps = 0.25;
    SolveReport r = minimize_fixed_eps(s, init);
    REQUIRE(sw.size() == 1);
    CHECK(sw[0].report.value == r.value);
    CHECK(sw[0].report.iterations == r.iterations);
  }

  SUBCASE("gaps to the oracle shrink and minimizers approach the oracle path") {
    OracleResult o = oracle_minimizer_1d(a, p, p, 0, 1, m);
    auto sw = continuation_sweep(base, default_schedule(), init);
    REQUIRE(sw.size() == 8);
    double prev = INFINITY;
    for (auto& e : sw) {
      double gap = std::abs(e.report.value - o.value);
      CHECK(gap < prev);
      prev = gap;
      CHECK(e.report.converged);
    }
    CHECK(prev <= 0.05 * o.value);
    CHECK(sup_distance(sw.back().report.final_traj, o.trajectory) <= 0.05);
    CHECK(sw.back().limit_value == doctest::Approx(o.value).epsilon(1e-3));
  }

  SUBCASE("sup distance at eps = 0.01") {
    OracleResult o = oracle_minimizer_1d(a, p, p, 0, 1, m);
    auto sw = continuation_sweep(base, {1, 0.1, 0.03, 0.01}, init);
    CHECK(sup_distance(sw.back().report.final_traj, o.trajectory) <= 0.05);
  }

  SUBCASE("schedules must be positive and strictly decreasing") {
    CHECK_THROWS_AS(continuation_sweep(base, {}, init), ValidationError);
    CHECK_THROWS_AS(continuation_sweep(base, {0.5, 0.5}, init), ValidationError);
    CHECK_THROWS_AS(continuation_sweep(base, {0.5, -0.1}, init), ValidationError);
  }
}
