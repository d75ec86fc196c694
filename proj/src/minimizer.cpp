#include "mag/minimizer.hpp"

#include <cmath>
#include <deque>
#include <string>

#include <fmt/format.h>

#include "mag/errors.hpp"

namespace mag {

namespace {

using Mat = Trajectory::Matrix;

// Weighted H1 matrix on the interior nodes: sum_k c_k (|dz_k|^2 / h + h |z_k|^2), c_k the kinetic
// coefficient of interval k. Factored once (Thomas).
class H1Precond {
 public:
  H1Precond(const std::vector<double>& c, double h) : up_(c.size() - 2), inv_(c.size() - 1), off_(c.size() - 2) {
    const std::size_t n = c.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      double diag = (c[i] + c[i + 1]) * (1 / h + h / 2);
      if (i) diag -= off_[i - 1] * up_[i - 1];
      inv_[i] = 1 / diag;
      if (i + 1 < n) {
        off_[i] = -c[i + 1] / h;
        up_[i] = off_[i] * inv_[i];
      }
    }
  }

  // Solves in place for every column; rows 0 and M stay zero.
  void solve(Mat& g) const {
    const std::size_t n = inv_.size();
    for (Eigen::Index col = 0; col < g.cols(); ++col) {
      auto at = [&](std::size_t i) -> double& { return g(static_cast<Eigen::Index>(i + 1), col); };
      for (std::size_t i = 1; i < n; ++i) at(i) -= off_[i - 1] * inv_[i - 1] * at(i - 1);
      at(n - 1) *= inv_[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) at(i) = (at(i) - off_[i] * at(i + 1)) * inv_[i];
    }
  }

 private:
  std::vector<double> up_, inv_, off_;
};

double kinetic_weight(const ActionSpec& spec, double tau) {
  switch (spec.kind) {
    case ActionKind::LEps: return beta(spec.weight, tau);
    case ActionKind::KEps: return 0.5 * eta(spec.weight, tau);
    default: return 1;
  }
}

double dot(const Mat& a, const Mat& b) { return (a.array() * b.array()).sum(); }

double value_of(const ActionSpec& spec, const Trajectory& tr) {
  ActionValue v = eval_action(spec, tr);
  if (!v.finite()) throw ValidationError("minimize_fixed_eps: initial trajectory violates the endpoints");
  if (!std::isfinite(v.value)) throw NumericalError("minimize_fixed_eps: non-finite action value");
  return v.value;
}

}  // namespace

SolveReport minimize_fixed_eps(const ActionSpec& spec, const Trajectory& init, const SolveOptions& opts) {
  if (!is_smooth(spec.kind))
    throw ValidationError(std::string("minimize_fixed_eps: nonsmooth functional ") + to_string(spec.kind));
  const std::size_t m = init.steps();
  if (m < 2) throw ValidationError("minimize_fixed_eps: need at least one interior node");

  SolveReport rep;
  Trajectory x = init;
  double f = value_of(spec, x);
  Mat g = grad_discretized_action(spec, x);
  rep.history.push_back(f);
  std::vector<double> cw(m);
  for (std::size_t k = 0; k < m; ++k) cw[k] = kinetic_weight(spec, 0.5 * (x.time(k) + x.time(k + 1)));
  const H1Precond pre(cw, x.step());
  std::deque<std::pair<Mat, Mat>> mem;  // (s, y)

  auto apply_model = [&](Mat q) {
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
      alpha[i] = dot(mem[i].first, q) / dot(mem[i].second, mem[i].first);
      q -= alpha[i] * mem[i].second;
    }
    pre.solve(q);
    if (!mem.empty()) {
      Mat py = mem.back().second;
      pre.solve(py);
      q *= dot(mem.back().first, mem.back().second) / dot(mem.back().second, py);
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      double b = dot(mem[i].second, q) / dot(mem[i].second, mem[i].first);
      q += (alpha[i] - b) * mem[i].first;
    }
    return q;
  };

  std::size_t it = 0;
  for (; it < opts.max_iter; ++it) {
    rep.grad_norm = g.cwiseAbs().maxCoeff();
    if (rep.grad_norm <= opts.grad_tol) {
      rep.converged = true;
      break;
    }
    Mat d = -apply_model(g);
    double slope = dot(g, d);
    if (!(slope < 0)) {
      mem.clear();
      d = g;
      pre.solve(d);
      d = -d;
      slope = dot(g, d);
    }
    double step = 1;
    Trajectory trial = x;
    double ft = 0;
    Mat gt;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      trial.data() = x.data() + step * d;
      ft = value_of(spec, trial);
      if (ft <= f + opts.armijo * step * slope) {
        accepted = true;
        gt = grad_discretized_action(spec, trial);
        break;
      }
      // Decrease below the rounding level of f: approximate Wolfe test on the directional derivative.
      if (ft <= f && f - ft <= 1e-13 * (1 + std::abs(f))) {
        gt = grad_discretized_action(spec, trial);
        if (dot(gt, d) <= (1 - 2 * opts.armijo) * -slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (mem.empty()) break;  // no descent left at working precision
      mem.clear();
      continue;
    }
    Mat s = trial.data() - x.data(), y = gt - g;
    if (dot(s, y) > 1e-14 * std::sqrt(dot(s, s) * dot(y, y))) {
      mem.emplace_back(std::move(s), std::move(y));
      if (mem.size() > opts.memory) mem.pop_front();
    }
    x = std::move(trial);
    f = ft;
    g = std::move(gt);
    rep.history.push_back(f);
  }
  rep.grad_norm = g.cwiseAbs().maxCoeff();
  rep.converged = rep.grad_norm <= opts.grad_tol;
  rep.iterations = it;
  rep.value = f;
  rep.final_traj = std::move(x);
  return rep;
}

std::vector<double> default_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 7; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

std::vector<SweepEntry> continuation_sweep(const ActionSpec& base, const std::vector<double>& schedule,
                                           const Trajectory& init, const SolveOptions& opts) {
  if (schedule.empty()) throw ValidationError("continuation_sweep: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0)) throw ValidationError("continuation_sweep: eps must be positive");
    if (i && !(schedule[i] < schedule[i - 1])) throw ValidationError("continuation_sweep: schedule must strictly decrease");
  }
  std::vector<SweepEntry> out;
  Trajectory warm = init;
  ActionSpec lim = base;
  lim.kind = limit_kind(base.kind);
  for (double eps : schedule) {
    ActionSpec s = base;
    s.eps = eps;
    SweepEntry e;
    e.eps = eps;
    try {
      e.report = minimize_fixed_eps(s, warm, opts);
    } catch (const NumericalError& err) {
      throw NumericalError(fmt::format("eps={:.17g}: {}", eps, err.what()));
    }
    e.limit_value = eval_action(lim, e.report.final_traj).value;
    warm = e.report.final_traj;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace mag
