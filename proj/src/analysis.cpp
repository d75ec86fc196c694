#include "mag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mag/errors.hpp"
#include "mag/potential.hpp"

namespace mag {

namespace {

void require_line(const Trajectory& traj, const Lattice& a, const char* what) {
  if (traj.dim() != 1) throw ValidationError(std::string(what) + ": trajectory must be one-dimensional");
  if (a.count() != traj.count() || a.dim() != 1) throw ValidationError(std::string(what) + ": lattice does not match");
}

std::vector<Partition> partitions(const Trajectory& traj, double tol) {
  std::vector<Partition> out;
  for (std::size_t k = 0; k <= traj.steps(); ++k) out.push_back(partition_of(traj.state(k), tol));
  return out;
}

bool is_class(const Partition& p, const std::vector<std::size_t>& c) {
  for (auto& d : p.classes())
    if (d == c) return true;
  return false;
}

// Polynomial through the given nodes (degree nodes-1), evaluated at t; per particle.
double extrapolate(const Trajectory& traj, const std::vector<std::size_t>& nodes, std::size_t i, double t) {
  double s = 0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    double w = 1;
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (a != b) w *= (t - traj.time(nodes[b])) / (traj.time(nodes[a]) - traj.time(nodes[b]));
    s += w * traj.data()(static_cast<Eigen::Index>(nodes[a]), static_cast<Eigen::Index>(i));
  }
  return s;
}

// largest signed gap between consecutive members of C along the extrapolated paths
double class_gap(const Trajectory& traj, const std::vector<std::size_t>& nodes, const std::vector<std::size_t>& c,
                 double t) {
  double g = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < c.size(); ++j)
    g = std::max(g, extrapolate(traj, nodes, c[j + 1], t) - extrapolate(traj, nodes, c[j], t));
  return g;
}

// first t in [lo, hi] with fn(t) <= 0, given fn(lo) > 0
double bisect(const std::function<double(double)>& fn, double lo, double hi) {
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (fn(mid) <= 0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double class_mean_at(const Trajectory& traj, const std::vector<std::size_t>& c, double t) {
  const std::size_t k = std::min(traj.steps() - 1, static_cast<std::size_t>(std::floor((t - traj.start()) / traj.step())));
  const double w = std::clamp((t - traj.time(k)) / traj.step(), 0.0, 1.0);
  double s = 0;
  for (auto i : c) {
    auto col = static_cast<Eigen::Index>(i);
    s += (1 - w) * traj.data()(static_cast<Eigen::Index>(k), col) + w * traj.data()(static_cast<Eigen::Index>(k + 1), col);
  }
  return s / static_cast<double>(c.size());
}

}  // namespace

EnergyProfile energy_profile(const Trajectory& traj, const Lattice& a, double cluster_tol) {
  require_line(traj, a, "energy_profile");
  EnergyProfile e;
  const double h = traj.step();
  auto parts = partitions(traj, cluster_tol);
  std::vector<double> finite;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    if (!(parts[k] == parts[k + 1])) {
      e.values.push_back(std::numeric_limits<double>::quiet_NaN());
      ++e.skipped;
      continue;
    }
    Cloud z0 = traj.state(k), z1 = traj.state(k + 1);
    Cloud v = (1 / h) * (z1 - z0), m = 0.5 * (z0 + z1);
    double val = v.squared_norm() - (m - a.points()).squared_norm() - internal_energy(parts[k], a);
    e.values.push_back(val);
    finite.push_back(val);
  }
  if (!finite.empty()) {
    std::vector<double> s = finite;
    std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
    e.median = s[s.size() / 2];
    if (s.size() % 2 == 0) {
      double lo = *std::max_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2));
      e.median = 0.5 * (e.median + lo);
    }
    for (double v : finite) e.max_deviation = std::max(e.max_deviation, std::abs(v - e.median));
  }
  return e;
}

double momentum_residual(const Trajectory& traj, const Lattice& a) {
  if (a.count() != traj.count() || a.dim() != traj.dim())
    throw ValidationError("momentum_residual: lattice does not match");
  const double h = traj.step();
  const Eigen::VectorXd abar = a.mean();
  auto mean = [&](std::size_t k) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(traj.dim()));
    Cloud z = traj.state(k);
    for (std::size_t i = 0; i < z.count(); ++i) m += z.point(i);
    return Eigen::VectorXd(m / static_cast<double>(z.count()));
  };
  double worst = 0;
  for (std::size_t k = 1; k < traj.steps(); ++k) {
    Eigen::VectorXd mk = mean(k);
    Eigen::VectorXd r = (mean(k + 1) - 2 * mk + mean(k - 1)) / (h * h) - (mk - abar);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

double isolation_radius(const Trajectory& traj, double cluster_tol) {
  const double h = traj.step();
  double vmax = 0;
  for (std::size_t k = 0; k < traj.steps(); ++k)
    vmax = std::max(vmax, (traj.data().row(static_cast<Eigen::Index>(k + 1)) - traj.data().row(static_cast<Eigen::Index>(k)))
                              .cwiseAbs()
                              .maxCoeff() /
                              h);
  return 4 * std::max(cluster_tol, h * vmax);
}

std::vector<ShockRecord> detect_shocks(const Trajectory& traj, double cluster_tol) {
  if (traj.dim() != 1) throw ValidationError("detect_shocks: trajectory must be one-dimensional");
  auto parts = partitions(traj, cluster_tol);
  const std::size_t m = traj.steps();
  std::vector<ShockRecord> out;
  for (std::size_t k = 0; k < m; ++k) {
    if (parts[k] == parts[k + 1]) continue;
    Partition j = join(parts[k], parts[k + 1]);
    for (auto& c : j.classes()) {
      const bool before = is_class(parts[k], c), after = is_class(parts[k + 1], c);
      if (before && after) continue;
      ShockRecord r;
      r.members = c;
      r.interval = k;
      r.cluster_tol = cluster_tol;
      r.kind = after ? ShockKind::Merge : before ? ShockKind::Split : ShockKind::Regroup;
      const double t0 = traj.time(k), t1 = traj.time(k + 1);
      r.time = 0.5 * (t0 + t1);
      // extrapolate the unclustered side into the interval and find where the class closes
      std::vector<std::size_t> nodes;
      if (r.kind == ShockKind::Merge) {
        for (std::size_t b = 0; b < 3 && b <= k && parts[k - b] == parts[k]; ++b) nodes.push_back(k - b);
        if (nodes.size() >= 2) {
          auto g = [&](double t) { return class_gap(traj, nodes, c, t) - cluster_tol; };
          r.time = g(t1) > 0 ? t1 : bisect(g, t0, t1);
        }
      } else if (r.kind == ShockKind::Split) {
        for (std::size_t b = 1; b <= 3 && k + b <= m && parts[k + b] == parts[k + 1]; ++b) nodes.push_back(k + b);
        if (nodes.size() >= 2) {
          // gap > 0 on the right; walk from t1 backwards
          auto g = [&](double t) { return class_gap(traj, nodes, c, t1 + t0 - t) - cluster_tol; };
          r.time = g(t1) > 0 ? t0 : t1 + t0 - bisect(g, t0, t1);
        }
      }
      r.location = class_mean_at(traj, c, r.time);
      out.push_back(std::move(r));
    }
  }
  const double radius = isolation_radius(traj, cluster_tol), dt = 4 * traj.step();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].isolated = true;
    for (std::size_t j = 0; j < out.size(); ++j)
      if (i != j && std::abs(out[i].time - out[j].time) <= dt && std::abs(out[i].location - out[j].location) <= radius)
        out[i].isolated = false;
  }
  return out;
}

JumpCheck check_velocity_jump(const Trajectory& traj, const ShockRecord& shock, const Lattice& a, double tolerance) {
  require_line(traj, a, "check_velocity_jump");
  if (!shock.isolated) throw ValidationError("check_velocity_jump: shock is not isolated");
  if (shock.members.empty()) throw ValidationError("check_velocity_jump: empty class");
  JumpCheck r;
  r.alpha = delta_gap(a).alpha;
  const std::size_t k = shock.interval, w = kJumpWindow;
  if (k < w || k + 1 + w > traj.steps()) {
    r.inconclusive = true;
    return r;
  }
  const std::size_t i = shock.members.front();
  auto fit = [&](std::size_t first) -> std::optional<double> {
    Partition p0 = partition_of(traj.state(first), shock.cluster_tol);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(w + 1), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(w + 1));
    for (std::size_t n = 0; n <= w; ++n) {
      if (!(partition_of(traj.state(first + n), shock.cluster_tol) == p0)) return std::nullopt;
      const double s = traj.time(first + n) - shock.time;
      x.row(static_cast<Eigen::Index>(n)) << 1, s, s * s;
      y[static_cast<Eigen::Index>(n)] = traj.state(first + n)[i];
    }
    return Eigen::VectorXd(x.colPivHouseholderQr().solve(y))[1];
  };
  auto before = fit(k - w), after = fit(k + 1);
  if (!before || !after) {
    r.inconclusive = true;
    return r;
  }
  r.v_before = *before;
  r.v_after = *after;
  r.jump = r.v_before - r.v_after;
  r.pass = r.jump >= r.alpha * (1 - tolerance);
  return r;
}

std::vector<Interval> stuck_intervals(const Trajectory& traj, double cluster_tol) {
  if (traj.dim() != 1) throw ValidationError("stuck_intervals: trajectory must be one-dimensional");
  std::vector<Interval> out;
  bool open = false;
  for (std::size_t k = 0; k <= traj.steps(); ++k) {
    bool stuck = !partition_of(traj.state(k), cluster_tol).is_trivial();
    if (stuck && !open) out.push_back({traj.time(k), traj.time(k)});
    if (stuck) out.back().end = traj.time(k);
    open = stuck;
  }
  return out;
}

double max_spread(const Trajectory& traj) {
  if (traj.dim() != 1) throw ValidationError("max_spread: trajectory must be one-dimensional");
  double s = 0;
  for (std::size_t k = 0; k <= traj.steps(); ++k) {
    auto row = traj.data().row(static_cast<Eigen::Index>(k));
    s = std::max(s, row.maxCoeff() - row.minCoeff());
  }
  return s;
}

double sup_distance(const Trajectory& x, const Trajectory& y) {
  if (x.steps() != y.steps() || x.count() != y.count() || x.dim() != y.dim())
    throw ValidationError("sup_distance: trajectories live on different grids");
  return (x.data() - y.data()).cwiseAbs().maxCoeff();
}

double merge_energy_jump(const MergeEvent& e, const Lattice& a) {
  if (e.masses.size() != 2) throw ValidationError("merge_energy_jump: expected a two-cluster merge");
  const auto k1 = static_cast<std::size_t>(e.masses[0]);
  double s1 = 0, s2 = 0;
  for (std::size_t n = 0; n < e.members.size(); ++n) (n < k1 ? s1 : s2) += a.points()[e.members[n]];
  const double k = static_cast<double>(e.members.size());
  const double gap = s1 * s1 / e.masses[0] + s2 * s2 / e.masses[1] - (s1 + s2) * (s1 + s2) / k;
  return gap - e.kinetic_loss;
}

}  // namespace mag
