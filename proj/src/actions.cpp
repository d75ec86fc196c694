#include "mag/actions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mag/assignment.hpp"
#include "mag/potential.hpp"

namespace mag {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::LEps: return "L_eps";
    case ActionKind::L: return "L";
    case ActionKind::KEps: return "K_eps";
    case ActionKind::K: return "K";
    case ActionKind::Lambda: return "Lambda";
    case ActionKind::LambdaPrime: return "LambdaPrime";
    case ActionKind::LambdaDoublePrime: return "LambdaDoublePrime";
    case ActionKind::LambdaPlus: return "LambdaPlus";
    case ActionKind::LambdaEps: return "Lambda_eps";
  }
  return "?";
}

ActionKind action_kind_from_string(const std::string& s) {
  for (auto k : {ActionKind::LEps, ActionKind::L, ActionKind::KEps, ActionKind::K, ActionKind::Lambda,
                 ActionKind::LambdaPrime, ActionKind::LambdaDoublePrime, ActionKind::LambdaPlus, ActionKind::LambdaEps})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown functional \"" + s + "\"");
}

bool is_smooth(ActionKind k) { return k == ActionKind::LEps || k == ActionKind::KEps || k == ActionKind::LambdaEps; }

Gauge gauge_of(ActionKind k) { return (k == ActionKind::LEps || k == ActionKind::L) ? Gauge::Time : Gauge::Theta; }

ActionKind limit_kind(ActionKind k) {
  switch (k) {
    case ActionKind::LEps: return ActionKind::L;
    case ActionKind::KEps: return ActionKind::K;
    case ActionKind::LambdaEps: return ActionKind::Lambda;
    default: throw ValidationError(std::string("no limit functional for ") + to_string(k));
  }
}

double beta(WeightKind w, double t) { return w == WeightKind::Linear ? t : 1.0; }
double eta(WeightKind w, double theta) { return beta(w, std::exp(2 * theta)); }

// ---------------------------------------------------------------- g functions

double g_eps(double eps, double theta, const Cloud& y, const Lattice& a) {
  if (!(eps > 0)) throw ValidationError("g_eps needs eps > 0");
  const double s = eps * std::exp(theta);
  return eps * h_logsumexp((1.0 / s) * y, a);
}

double g_limit(double theta, const Cloud& y, const Lattice& a) { return f_max(y, a) * std::exp(-theta); }

Cloud grad_g_eps(double eps, double theta, const Cloud& y, const Lattice& a) {
  if (!(eps > 0)) throw ValidationError("grad_g_eps needs eps > 0");
  return std::exp(-theta) * grad_h((1.0 / (eps * std::exp(theta))) * y, a);
}

Cloud ext_grad_g(double theta, const Cloud& y, const Lattice& a) {
  return std::exp(-theta) * extended_gradient(y, a);
}

Cloud dtheta_grad_g_eps(double eps, double theta, const Cloud& y, const Lattice& a) {
  if (!(eps > 0)) throw ValidationError("dtheta_grad_g_eps needs eps > 0");
  Cloud u = (1.0 / (eps * std::exp(theta))) * y;
  return -std::exp(-theta) * (grad_h(u, a) + hess_h_apply(u, u, a));
}

double g_theta_bound(const Lattice& a, double theta_min) {
  // sup_x x / (e^x + e^-x), attained where x tanh x = 1
  double x = 1.2;
  for (int i = 0; i < 50; ++i) x -= (x * std::tanh(x) - 1) / (std::tanh(x) + x / (std::cosh(x) * std::cosh(x)));
  const double peak = x / (2 * std::cosh(x));
  const double nf = std::exp(std::lgamma(static_cast<double>(a.count()) + 1));
  return std::exp(-theta_min) * a.norm() * (1 + nf * nf * peak);
}

std::variant<double, Cloud> eval_g(double eps, double theta, const Cloud& y, GQuantity which, const Lattice& a) {
  switch (which) {
    case GQuantity::GEps: return g_eps(eps, theta, y, a);
    case GQuantity::G: return g_limit(theta, y, a);
    case GQuantity::GradGEps: return grad_g_eps(eps, theta, y, a);
    case GQuantity::ExtGradG: return ext_grad_g(theta, y, a);
  }
  throw ValidationError("eval_g: unknown quantity");
}

// ---------------------------------------------------------------- endpoints

namespace {

bool matches_up_to_permutation(const Cloud& x, const Cloud& p, double tol) {
  check_same_shape(x, p, "endpoint check");
  if (x.dim() == 1) return max_abs_diff(sort_ascending(x).first, sort_ascending(p).first) <= tol;
  if (x.count() <= 6) {
    for (auto& s : all_permutations(x.count()))
      if (max_abs_diff(x, permute(p, s)) <= tol) return true;
    return false;
  }
  Perm s = optimal_assignment(x, Lattice(p)).perm;
  return max_abs_diff(x, permute(p, s)) <= tol;
}

void validate(const ActionSpec& spec, const Trajectory& traj) {
  if (traj.gauge() != gauge_of(spec.kind))
    throw ValidationError(std::string("gauge mismatch: ") + to_string(spec.kind) + " needs a " +
                          (gauge_of(spec.kind) == Gauge::Time ? "t" : "theta") + "-gauge trajectory");
  const double scale = 1e-12 * (1 + std::abs(spec.start) + std::abs(spec.end));
  if (std::abs(traj.start() - spec.start) > scale || std::abs(traj.end() - spec.end) > scale)
    throw ValidationError("trajectory window does not match the action window");
  if (traj.count() != spec.lattice.count() || traj.dim() != spec.lattice.dim())
    throw ValidationError("trajectory shape does not match the lattice");
  if (is_smooth(spec.kind) && !(spec.eps > 0)) throw ValidationError("smooth functionals need eps > 0");
  if (spec.kind == ActionKind::LambdaDoublePrime) spec.lattice.require_ordered("LambdaDoublePrime");
}

bool endpoints_ok(const ActionSpec& spec, const Trajectory& traj) {
  const Cloud z0 = traj.state(0), z1 = traj.state(traj.steps());
  if (spec.endpoint_mode == EndpointMode::Fixed)
    return max_abs_diff(z0, spec.source) <= spec.endpoint_tol && max_abs_diff(z1, spec.target) <= spec.endpoint_tol;
  return matches_up_to_permutation(z0, spec.source, spec.endpoint_tol) &&
         matches_up_to_permutation(z1, spec.target, spec.endpoint_tol);
}

}  // namespace

ActionSpec resolve_endpoints(const ActionSpec& spec) {
  ActionSpec r = spec;
  if (spec.endpoint_mode == EndpointMode::Fixed) return r;
  if (spec.source.dim() == 1) {
    r.source = sort_ascending(spec.source).first;
    r.target = sort_ascending(spec.target).first;
  } else {
    r.target = permute(spec.target, optimal_assignment(spec.source, Lattice(spec.target)).perm);
  }
  r.endpoint_mode = EndpointMode::Fixed;
  return r;
}

// ---------------------------------------------------------------- quadrature

ActionValue eval_action(const ActionSpec& spec, const Trajectory& traj) {
  validate(spec, traj);
  if (!endpoints_ok(spec, traj)) return ActionValue::infinite(InfiniteReason::EndpointViolation);
  const Lattice& a = spec.lattice;
  const double dt = traj.step();
  const double a2 = a.points().squared_norm();
  double total = 0;
  Cloud prev = traj.state(0);
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    Cloud next = traj.state(k + 1);
    const Cloud v = (1.0 / dt) * (next - prev);
    const Cloud m = 0.5 * (prev + next);
    const double tau = 0.5 * (traj.time(k) + traj.time(k + 1));
    double val = 0;
    switch (spec.kind) {
      case ActionKind::LEps:
        val = (v - (1.0 / (2 * tau)) * (m - grad_f_eps(tau, m, spec.eps, a))).squared_norm() * beta(spec.weight, tau);
        break;
      case ActionKind::L:
        val = (v - (1.0 / (2 * tau)) * (m - extended_gradient(m, a))).squared_norm() * beta(spec.weight, tau);
        break;
      case ActionKind::KEps:
        val = 0.5 * (v.squared_norm() + grad_g_eps(spec.eps, tau, m, a).squared_norm()) * eta(spec.weight, tau);
        break;
      case ActionKind::K:
        val = 0.5 * (v.squared_norm() + ext_grad_g(tau, m, a).squared_norm()) * eta(spec.weight, tau);
        break;
      case ActionKind::Lambda:
        val = (v - (m - extended_gradient(m, a))).squared_norm();
        break;
      case ActionKind::LambdaEps:
        val = (v - (m - grad_f_eps(std::exp(2 * tau), m, spec.eps, a))).squared_norm();
        break;
      case ActionKind::LambdaPrime:
        val = v.squared_norm() + (m - extended_gradient(m, a)).squared_norm();
        break;
      case ActionKind::LambdaDoublePrime:
        val = v.squared_norm() + (m - a.points()).squared_norm() + internal_energy(partition_of(m, spec.partition_tol), a);
        break;
      case ActionKind::LambdaPlus:
        // twice the bracket (|Z|^2 + |A|^2)/2 - f(Z), i.e. |Z - A^opt|^2
        val = v.squared_norm() + m.squared_norm() + a2 - 2 * f_max(m, a);
        break;
    }
    total += dt * val;
    prev = std::move(next);
  }
  return {total, InfiniteReason::None};
}

// ---------------------------------------------------------------- gradient

Trajectory::Matrix grad_discretized_action(const ActionSpec& spec, const Trajectory& traj) {
  if (!is_smooth(spec.kind))
    throw ValidationError(std::string("grad_discretized_action: unsupported for nonsmooth functional ") +
                          to_string(spec.kind));
  validate(spec, traj);
  const Lattice& a = spec.lattice;
  const std::size_t mm = traj.steps();
  const double dt = traj.step();
  const auto cols = traj.data().cols();
  // per-interval partial derivatives of the integrand in v and in the midpoint
  Trajectory::Matrix fv(static_cast<Eigen::Index>(mm), cols), fm(static_cast<Eigen::Index>(mm), cols);
  Cloud prev = traj.state(0);
  for (std::size_t k = 0; k < mm; ++k) {
    Cloud next = traj.state(k + 1);
    const Cloud v = (1.0 / dt) * (next - prev);
    const Cloud m = 0.5 * (prev + next);
    const double tau = 0.5 * (traj.time(k) + traj.time(k + 1));
    Cloud dv, dm;
    switch (spec.kind) {
      case ActionKind::LambdaEps: {
        const double t = std::exp(2 * tau);
        Cloud r = v - (m - grad_f_eps(t, m, spec.eps, a));
        dv = 2.0 * r;
        dm = -2.0 * r + 2.0 * hess_f_eps_apply(t, m, r, spec.eps, a);
        break;
      }
      case ActionKind::LEps: {
        const double b = beta(spec.weight, tau);
        Cloud r = v - (1.0 / (2 * tau)) * (m - grad_f_eps(tau, m, spec.eps, a));
        dv = (2 * b) * r;
        dm = (-b / tau) * (r - hess_f_eps_apply(tau, m, r, spec.eps, a));
        break;
      }
      case ActionKind::KEps: {
        const double e = eta(spec.weight, tau);
        const double s = spec.eps * std::exp(tau);
        Cloud u = (1.0 / s) * m;
        Cloud g = std::exp(-tau) * grad_h(u, a);
        dv = e * v;
        dm = (e * std::exp(-tau) / s) * hess_h_apply(u, g, a);
        break;
      }
      default:
        break;
    }
    fv.row(static_cast<Eigen::Index>(k)) = dv.flat().transpose();
    fm.row(static_cast<Eigen::Index>(k)) = dm.flat().transpose();
    prev = std::move(next);
  }
  Trajectory::Matrix g = Trajectory::Matrix::Zero(traj.data().rows(), cols);
  for (std::size_t j = 1; j < mm; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    g.row(jj) = fv.row(jj - 1) - fv.row(jj) + (0.5 * dt) * (fm.row(jj - 1) + fm.row(jj));
  }
  return g;
}

// ---------------------------------------------------------------- gauges

namespace {

// Four-point Lagrange interpolation of the state at time s.
Eigen::VectorXd sample(const Trajectory& tr, double s) {
  const double h = tr.step();
  const auto m = static_cast<long>(tr.steps());
  double pos = (s - tr.start()) / h;
  long k = static_cast<long>(std::floor(pos));
  k = std::clamp(k, 0L, m - 1);
  if (std::abs(pos - std::round(pos)) < 1e-12) {
    long r = std::clamp(static_cast<long>(std::round(pos)), 0L, m);
    return tr.data().row(r).transpose();
  }
  if (m < 3) {
    double w = pos - static_cast<double>(k);
    return ((1 - w) * tr.data().row(k) + w * tr.data().row(k + 1)).transpose();
  }
  long first = std::clamp(k - 1, 0L, m - 3);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(tr.data().cols());
  for (long i = 0; i < 4; ++i) {
    double w = 1;
    for (long j = 0; j < 4; ++j)
      if (j != i) w *= (pos - static_cast<double>(first + j)) / static_cast<double>(i - j);
    out += w * tr.data().row(first + i).transpose();
  }
  return out;
}

}  // namespace

Trajectory change_gauge(const Trajectory& traj, Gauge target, GaugeVariant variant) {
  if (traj.gauge() == target) return traj;
  const bool scale = variant == GaugeVariant::YScaling;
  if (target == Gauge::Theta) {
    if (!(traj.start() > 0)) throw ValidationError("heat kernel requires t>0");
    Trajectory out(Gauge::Theta, 0.5 * std::log(traj.start()), 0.5 * std::log(traj.end()), traj.steps(), traj.count(),
                   traj.dim());
    for (std::size_t k = 0; k <= out.steps(); ++k) {
      double th = out.time(k);
      double t = k == 0 ? traj.start() : (k == out.steps() ? traj.end() : std::exp(2 * th));
      Eigen::VectorXd x = sample(traj, t);
      if (scale) x *= std::exp(-th);
      out.data().row(static_cast<Eigen::Index>(k)) = x.transpose();
    }
    const double s0 = scale ? std::exp(-out.start()) : 1.0, s1 = scale ? std::exp(-out.end()) : 1.0;
    out.set_endpoints(s0 * traj.source(), s1 * traj.target());
    return out;
  }
  Trajectory out(Gauge::Time, std::exp(2 * traj.start()), std::exp(2 * traj.end()), traj.steps(), traj.count(),
                 traj.dim());
  for (std::size_t k = 0; k <= out.steps(); ++k) {
    double t = out.time(k);
    double th = k == 0 ? traj.start() : (k == out.steps() ? traj.end() : 0.5 * std::log(t));
    Eigen::VectorXd y = sample(traj, th);
    if (scale) y *= std::exp(th);
    out.data().row(static_cast<Eigen::Index>(k)) = y.transpose();
  }
  const double s0 = scale ? std::exp(traj.start()) : 1.0, s1 = scale ? std::exp(traj.end()) : 1.0;
  out.set_endpoints(s0 * traj.source(), s1 * traj.target());
  return out;
}

}  // namespace mag
