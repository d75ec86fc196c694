#include "mag/sticky.hpp"

#include <cmath>
#include <string>

#include "mag/errors.hpp"

namespace mag {

namespace {

// gap(s) = dm + beta cosh s + gamma sinh s between clusters i and i+1
struct Gap {
  double dm, beta, gamma;
  double at(double s) const { return dm + beta * std::cosh(s) + gamma * std::sinh(s); }
  double rate(double s) const { return beta * std::sinh(s) + gamma * std::cosh(s); }
};

Gap gap_of(const SimState& s, std::size_t i) {
  const SimCluster &l = s.clusters[i], &r = s.clusters[i + 1];
  const double ml = s.lattice_mean(l), mr = s.lattice_mean(r);
  return {mr - ml, (r.position - l.position) - (mr - ml), r.velocity - l.velocity};
}

// g(lo) > tol >= g(hi)
double bisect(const Gap& g, double lo, double hi) {
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    if (g.at(mid) <= kCollisionTol) hi = mid;
    else lo = mid;
  }
  return hi;
}

std::optional<double> earliest_root(const Gap& g, double horizon) {
  const double g0 = g.at(0), r0 = g.rate(0);
  if (g0 <= kCollisionTol && (r0 < 0 || (r0 == 0 && g.beta < 0))) return 0.0;
  if (g0 <= kCollisionTol) return std::nullopt;
  constexpr int kPanels = 64;
  // the only interior minimum of g, if any
  std::optional<double> crit;
  if (g.beta != 0 && std::abs(g.gamma / g.beta) < 1) {
    double s = std::atanh(-g.gamma / g.beta);
    if (s > 0 && s < horizon && g.beta > 0) crit = s;
  }
  for (int i = 0; i < kPanels; ++i) {
    double a = horizon * i / kPanels, b = horizon * (i + 1) / kPanels;
    if (g.at(b) <= kCollisionTol) return bisect(g, a, b);
    if (crit && *crit > a && *crit < b && g.at(*crit) <= kCollisionTol) return bisect(g, a, *crit);
  }
  return std::nullopt;
}

}  // namespace

double SimState::lattice_mean(const SimCluster& c) const {
  double s = 0;
  for (auto i : c.members) s += lattice.points()[i];
  return s / c.mass();
}

Cloud SimState::positions() const {
  Cloud z(lattice.count(), 1);
  for (auto& c : clusters)
    for (auto i : c.members) z[i] = c.position;
  return z;
}

Cloud SimState::velocities() const {
  Cloud v(lattice.count(), 1);
  for (auto& c : clusters)
    for (auto i : c.members) v[i] = c.velocity;
  return v;
}

Partition SimState::partition() const {
  std::vector<std::vector<std::size_t>> cls;
  for (auto& c : clusters) cls.push_back(c.members);
  return Partition::from_classes(cls);
}

SimState make_sim_state(const Lattice& a, const Cloud& p, const Cloud& v0, double time) {
  if (a.dim() != 1 || p.dim() != 1 || v0.dim() != 1) throw ValidationError("sticky simulation is one-dimensional");
  if (p.count() != a.count() || v0.count() != a.count())
    throw ValidationError("sticky simulation: positions, velocities and lattice differ in size");
  if (!p.is_finite() || !v0.is_finite()) throw ValidationError("sticky simulation: non-finite initial data");
  SimState s;
  s.time = time;
  s.lattice = a;
  for (std::size_t i = 0; i < p.count(); ++i) {
    if (i && p[i] < p[i - 1]) throw ValidationError("sticky simulation: initial positions must be ordered");
    if (i && p[i] - p[i - 1] <= kCollisionTol) {
      SimCluster& c = s.clusters.back();
      double k = c.mass();
      c.position = (k * c.position + p[i]) / (k + 1);
      c.velocity = (k * c.velocity + v0[i]) / (k + 1);
      c.members.push_back(i);
    } else {
      s.clusters.push_back({p[i], v0[i], {i}});
    }
  }
  return s;
}

SimState flow_free(const SimState& s, double dt) {
  SimState out = s;
  out.time = s.time + dt;
  const double ch = std::cosh(dt), sh = std::sinh(dt);
  for (auto& c : out.clusters) {
    const double m = s.lattice_mean(c), u = c.position - m, v = c.velocity;
    c.position = m + u * ch + v * sh;
    c.velocity = u * sh + v * ch;
  }
  for (std::size_t i = 1; i < out.clusters.size(); ++i)
    if (out.clusters[i].position - out.clusters[i - 1].position < -1e-9)
      throw NumericalError("flow_free: cluster order violated, a collision was missed");
  return out;
}

std::optional<Collision> first_collision_time(const SimState& s, double horizon) {
  if (!(horizon > 0)) throw ValidationError("first_collision_time: horizon must be positive");
  std::optional<Collision> best;
  for (std::size_t i = 0; i + 1 < s.clusters.size(); ++i) {
    auto r = earliest_root(gap_of(s, i), horizon);
    if (r && (!best || s.time + *r < best->time)) best = Collision{s.time + *r, i};
  }
  return best;
}

std::pair<SimCluster, MergeEvent> merge_clusters(const SimCluster& c1, const SimCluster& c2, double time) {
  if (c1.members.empty() || c2.members.empty() || c1.members.back() + 1 != c2.members.front())
    throw ValidationError("merge_clusters: clusters are not adjacent");
  const double k1 = c1.mass(), k2 = c2.mass(), k = k1 + k2;
  SimCluster c;
  c.position = (k1 * c1.position + k2 * c2.position) / k;
  c.velocity = (k1 * c1.velocity + k2 * c2.velocity) / k;
  c.members = c1.members;
  c.members.insert(c.members.end(), c2.members.begin(), c2.members.end());
  MergeEvent e;
  e.time = time;
  e.position = c.position;
  e.members = c.members;
  e.incoming = {c1.velocity, c2.velocity};
  e.masses = {k1, k2};
  e.velocity = c.velocity;
  const double dv = c1.velocity - c2.velocity;
  e.kinetic_loss = k1 * k2 / k * dv * dv;
  return {c, e};
}

StickyRun simulate_sticky(const Lattice& a, const Cloud& p, const Cloud& v0, double start, double end,
                          std::size_t steps) {
  if (!(end > start)) throw ValidationError("simulate_sticky: empty window");
  if (steps < 1) throw ValidationError("simulate_sticky: need at least one step");
  SimState s = make_sim_state(a, p, v0, start);
  std::vector<SimState> marks{s};
  StickyRun run;
  while (s.time < end) {
    auto c = first_collision_time(s, end - s.time);
    if (!c) break;
    s = flow_free(s, c->time - s.time);
    auto [merged, ev] = merge_clusters(s.clusters[c->left], s.clusters[c->left + 1], s.time);
    s.clusters[c->left] = std::move(merged);
    s.clusters.erase(s.clusters.begin() + static_cast<long>(c->left) + 1);
    run.events.push_back(std::move(ev));
    marks.push_back(s);
  }
  Trajectory tr(Gauge::Theta, start, end, steps, a.count(), 1);
  std::size_t j = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = tr.time(k);
    while (j + 1 < marks.size() && marks[j + 1].time <= t) ++j;
    tr.set_state(k, flow_free(marks[j], t - marks[j].time).positions());
  }
  tr.sync_endpoints();
  run.trajectory = std::move(tr);
  return run;
}

}  // namespace mag
