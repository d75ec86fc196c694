#include "mag/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mag/errors.hpp"

namespace mag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double class_mean(const Cloud& x, const std::vector<std::size_t>& c) {
  double s = 0;
  for (auto i : c) s += x[i];
  return s / static_cast<double>(c.size());
}

bool constant_on_classes(const Cloud& x, const Partition& p, double tol) {
  for (auto& c : p.classes())
    for (auto i : c)
      if (std::abs(x[i] - x[c[0]]) > tol) return false;
  return true;
}

// u(s) on [0, T] for u'' = u with u(0) = u0, u(T) = u1
double bvp(double u0, double u1, double T, double s) {
  return (u0 * std::sinh(T - s) + u1 * std::sinh(s)) / std::sinh(T);
}

// Smallest value of g(s) = c0 + bvp(d0, d1, T, s) over [0, T].
double min_gap(double c0, double d0, double d1, double T) {
  double lo = std::min(c0 + d0, c0 + d1);
  if (d0 != 0) {
    double th = (d0 * std::cosh(T) - d1) / (d0 * std::sinh(T));
    if (std::abs(th) < 1) {
      double s = std::atanh(th);
      if (s > 0 && s < T) lo = std::min(lo, c0 + bvp(d0, d1, T, s));
    }
  }
  return lo;
}

struct Layout {
  std::vector<Partition> joins;
  std::vector<std::size_t> offset;  // first variable of each junction
  std::size_t nvar = 0;
};

Layout make_layout(const std::vector<Partition>& phases) {
  Layout l;
  for (std::size_t j = 0; j + 1 < phases.size(); ++j) {
    l.joins.push_back(join(phases[j], phases[j + 1]));
    l.offset.push_back(l.nvar);
    l.nvar += l.joins.back().class_count();
  }
  return l;
}

// One end of a cluster segment: either a fixed position or a junction variable.
struct End {
  double fixed = 0;
  long var = -1;
};

}  // namespace

std::optional<PatternSolution> evaluate_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start,
                                                double end, const ShockPattern& pattern) {
  a.require_ordered("evaluate_pattern");
  const auto& phases = pattern.phases;
  if (phases.empty() || pattern.times.size() + 1 != phases.size())
    throw ValidationError("evaluate_pattern: need one more phase than transition times");
  const double scale = 1 + p.norm() + q.norm() + a.norm();
  const double tol = 1e-11 * scale;
  if (!constant_on_classes(p, phases.front(), tol) || !constant_on_classes(q, phases.back(), tol)) return std::nullopt;

  std::vector<double> b{start};
  for (double t : pattern.times) b.push_back(t);
  b.push_back(end);
  for (std::size_t j = 0; j + 1 < b.size(); ++j)
    if (!(b[j + 1] - b[j] > 1e-7 * (end - start))) return std::nullopt;

  Layout lay = make_layout(phases);
  auto ends_of = [&](std::size_t j, const std::vector<std::size_t>& c) {
    End e0, e1;
    if (j == 0) e0.fixed = class_mean(p, c);
    else e0.var = static_cast<long>(lay.offset[j - 1] + lay.joins[j - 1].class_of(c[0]));
    if (j + 1 == phases.size()) e1.fixed = class_mean(q, c);
    else e1.var = static_cast<long>(lay.offset[j] + lay.joins[j].class_of(c[0]));
    return std::pair{e0, e1};
  };
  auto mean_a = [&](const std::vector<std::size_t>& c) { return class_mean(a.points(), c); };

  // quadratic model: cost(x) = 1/2 x'Hx + g'x + const
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.nvar));
  if (lay.nvar > 0) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t j = 0; j < phases.size(); ++j) {
      const double T = b[j + 1] - b[j];
      const double c = 1 / std::tanh(T), s = 1 / std::sinh(T);
      for (auto& cl : phases[j].classes()) {
        const double k = static_cast<double>(cl.size()), m = mean_a(cl);
        auto [e0, e1] = ends_of(j, cl);
        // u = alpha + (var ? x_var : 0)
        const double al0 = (e0.var < 0 ? e0.fixed : 0) - m, al1 = (e1.var < 0 ? e1.fixed : 0) - m;
        auto add = [&](long r, long cc, double v) {
          if (r >= 0 && cc >= 0) h(r, cc) += v;
        };
        add(e0.var, e0.var, 2 * k * c);
        add(e1.var, e1.var, 2 * k * c);
        add(e0.var, e1.var, -2 * k * s);
        add(e1.var, e0.var, -2 * k * s);
        if (e0.var >= 0) g[e0.var] += 2 * k * (c * al0 - s * al1);
        if (e1.var >= 0) g[e1.var] += 2 * k * (c * al1 - s * al0);
      }
    }
    x = h.ldlt().solve(-g);
  }

  PatternSolution sol;
  sol.pattern = pattern;
  auto pos = [&](const End& e) { return e.var < 0 ? e.fixed : x[e.var]; };
  double total = 0;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    const double T = b[j + 1] - b[j];
    const auto& cls = phases[j].classes();
    std::vector<double> z0(cls.size()), z1(cls.size()), m(cls.size());
    for (std::size_t ci = 0; ci < cls.size(); ++ci) {
      auto [e0, e1] = ends_of(j, cls[ci]);
      z0[ci] = pos(e0);
      z1[ci] = pos(e1);
      m[ci] = mean_a(cls[ci]);
      const double u0 = z0[ci] - m[ci], u1 = z1[ci] - m[ci];
      // ((u0^2 + u1^2) cosh T - 2 u0 u1) / sinh T without the cancellation for small T
      total += static_cast<double>(cls[ci].size()) *
               ((u0 * u0 + u1 * u1) * std::tanh(T / 2) + (u0 - u1) * (u0 - u1) / std::sinh(T));
    }
    // classes are intervals listed by first member, so neighbours in the list are neighbours in space
    for (std::size_t ci = 0; ci + 1 < cls.size(); ++ci) {
      const double c0 = m[ci + 1] - m[ci];
      const double d0 = (z0[ci + 1] - m[ci + 1]) - (z0[ci] - m[ci]);
      const double d1 = (z1[ci + 1] - m[ci + 1]) - (z1[ci] - m[ci]);
      if (min_gap(c0, d0, d1, T) < -tol) return std::nullopt;
    }
  }
  sol.value = total;
  for (std::size_t j = 0; j + 1 < phases.size(); ++j) {
    std::vector<double> jv(lay.joins[j].class_count());
    for (std::size_t c = 0; c < jv.size(); ++c) jv[c] = x[static_cast<Eigen::Index>(lay.offset[j] + c)];
    sol.junction.push_back(jv);
  }
  return sol;
}

namespace {

struct Min1d {
  double x = 0, f = kInf;
};

// Grid scan over the open interval then golden section around the best cell.
Min1d minimize_1d(double lo, double hi, int cells, const std::function<double(double)>& fn) {
  Min1d best;
  std::vector<double> xs(static_cast<std::size_t>(cells) + 1), fs(xs.size(), kInf);
  for (int i = 0; i <= cells; ++i) xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / cells;
  int bi = -1;
  for (int i = 1; i < cells; ++i) {
    fs[static_cast<std::size_t>(i)] = fn(xs[static_cast<std::size_t>(i)]);
    if (fs[static_cast<std::size_t>(i)] < best.f) {
      best = {xs[static_cast<std::size_t>(i)], fs[static_cast<std::size_t>(i)]};
      bi = i;
    }
  }
  if (bi < 0) return best;
  const double margin = 1e-9 * (hi - lo);
  double a = std::max(xs[static_cast<std::size_t>(bi - 1)], lo + margin);
  double b = std::min(xs[static_cast<std::size_t>(bi + 1)], hi - margin);
  const double r = (std::sqrt(5.0) - 1) / 2;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > 1e-11 * (1 + std::abs(a))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  for (auto [x, f] : {std::pair{c, fc}, std::pair{d, fd}})
    if (f < best.f) best = {x, f};
  return best;
}

}  // namespace

std::optional<PatternSolution> optimize_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start,
                                                double end, const std::vector<Partition>& phases) {
  ShockPattern pat{phases, {}};
  auto value_at = [&](const std::vector<double>& times) {
    pat.times = times;
    auto s = evaluate_pattern(a, p, q, start, end, pat);
    return s ? s->value : kInf;
  };
  const std::size_t r = phases.size() - 1;
  std::vector<double> times;
  if (r == 1) {
    Min1d m = minimize_1d(start, end, 64, [&](double s) { return value_at({s}); });
    if (!std::isfinite(m.f)) return std::nullopt;
    times = {m.x};
  } else if (r == 2) {
    auto inner = [&](double s1) {
      return minimize_1d(s1, end, 32, [&](double s2) { return value_at({s1, s2}); });
    };
    Min1d outer = minimize_1d(start, end, 32, [&](double s1) { return inner(s1).f; });
    if (!std::isfinite(outer.f)) return std::nullopt;
    times = {outer.x, inner(outer.x).x};
  } else if (r > 2) {
    throw CapabilityError("optimize_pattern supports at most 2 transitions");
  }
  pat.times = times;
  return evaluate_pattern(a, p, q, start, end, pat);
}

Trajectory sample_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start, double end,
                          std::size_t steps, const PatternSolution& sol) {
  const auto& phases = sol.pattern.phases;
  std::vector<double> b{start};
  for (double t : sol.pattern.times) b.push_back(t);
  b.push_back(end);
  const std::size_t n = a.count();
  Trajectory tr(Gauge::Theta, start, end, steps, n, 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double th = tr.time(k);
    std::size_t j = 0;
    while (j + 1 < phases.size() && th > b[j + 1]) ++j;
    const double T = b[j + 1] - b[j];
    Cloud z(n, 1);
    for (auto& c : phases[j].classes()) {
      const double m = class_mean(a.points(), c);
      const double z0 = j == 0 ? class_mean(p, c) : sol.junction[j - 1][join(phases[j - 1], phases[j]).class_of(c[0])];
      const double z1 = j + 1 == phases.size() ? class_mean(q, c) : sol.junction[j][join(phases[j], phases[j + 1]).class_of(c[0])];
      const double v = m + bvp(z0 - m, z1 - m, T, std::clamp(th - b[j], 0.0, T));
      for (auto i : c) z[i] = v;
    }
    tr.set_state(k, z);
  }
  tr.set_state(0, p);
  tr.set_state(steps, q);
  tr.set_endpoints(p, q);
  return tr;
}

OracleResult oracle_minimizer_1d(const Lattice& a, const Cloud& p, const Cloud& q, double start, double end,
                                 std::size_t steps, std::size_t pattern_budget) {
  a.require_ordered("oracle_minimizer_1d");
  check_same_shape(p, a.points(), "oracle_minimizer_1d");
  check_same_shape(q, a.points(), "oracle_minimizer_1d");
  if (a.count() > 3) throw CapabilityError("oracle_minimizer_1d supports N <= 3");
  if (pattern_budget > 2) throw CapabilityError("oracle_minimizer_1d supports at most 2 transitions");
  if (!(start < end)) throw ValidationError("oracle_minimizer_1d: empty window");
  const Cloud ps = sort_ascending(p).first, qs = sort_ascending(q).first;
  const auto parts = ordered_partitions(a.count());

  std::optional<PatternSolution> best;
  std::vector<Partition> seq;
  std::function<void(std::size_t)> walk = [&](std::size_t len) {
    if (seq.size() == len) {
      auto s = optimize_pattern(a, ps, qs, start, end, seq);
      // shorter patterns are enumerated first and win near-ties
      if (s && (!best || s->value < best->value - 1e-9 * (1 + std::abs(best->value)))) best = s;
      return;
    }
    for (auto& part : parts) {
      if (!seq.empty() && seq.back() == part) continue;
      seq.push_back(part);
      walk(len);
      seq.pop_back();
    }
  };
  for (std::size_t len = 1; len <= pattern_budget + 1; ++len) walk(len);
  if (!best) throw NumericalError("oracle_minimizer_1d: no feasible pattern");
  OracleResult r;
  r.value = best->value;
  r.pattern = best->pattern;
  r.trajectory = sample_pattern(a, ps, qs, start, end, steps, *best);
  return r;
}

}  // namespace mag
