#pragma once

#include <limits>
#include <string>
#include <variant>

#include "mag/cloud.hpp"

namespace mag {

enum class ActionKind {
  LEps,               // t-gauge, smoothed rate function
  L,                  // t-gauge, limit functional
  KEps,               // theta-gauge, Y = X / e^theta
  K,
  Lambda,             // theta-gauge, Z = X
  LambdaPrime,
  LambdaDoublePrime,
  LambdaPlus,
  LambdaEps,          // theta-gauge smooth companion of Lambda
};

const char* to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);
bool is_smooth(ActionKind k);
Gauge gauge_of(ActionKind k);
// Gamma-limit of a smooth kind.
ActionKind limit_kind(ActionKind k);

enum class WeightKind { Linear, Unit };  // beta(t) = t or beta = 1
enum class EndpointMode { Fixed, UpToPermutation };

double beta(WeightKind w, double t);
// eta(theta) = beta(e^{2 theta})
double eta(WeightKind w, double theta);

struct ActionSpec {
  ActionKind kind = ActionKind::LambdaEps;
  double eps = 0;
  WeightKind weight = WeightKind::Linear;
  double start = 0, end = 1;
  Cloud source, target;
  EndpointMode endpoint_mode = EndpointMode::Fixed;
  Lattice lattice;
  double endpoint_tol = 1e-9;
  double partition_tol = 1e-9;  // LambdaDoublePrime only
};

enum class InfiniteReason { None, EndpointViolation };

struct ActionValue {
  double value = 0;
  InfiniteReason reason = InfiniteReason::None;
  bool finite() const { return reason == InfiniteReason::None; }
  static ActionValue infinite(InfiniteReason r) { return {std::numeric_limits<double>::infinity(), r}; }
};

ActionValue eval_action(const ActionSpec& spec, const Trajectory& traj);

// g_eps(theta, Y) = eps h(Y / (eps e^theta)),  g(theta, Y) = f(e^theta Y) / e^{2 theta}
enum class GQuantity { GEps, G, GradGEps, ExtGradG };
std::variant<double, Cloud> eval_g(double eps, double theta, const Cloud& y, GQuantity which, const Lattice& a);
double g_eps(double eps, double theta, const Cloud& y, const Lattice& a);
double g_limit(double theta, const Cloud& y, const Lattice& a);
Cloud grad_g_eps(double eps, double theta, const Cloud& y, const Lattice& a);
Cloud ext_grad_g(double theta, const Cloud& y, const Lattice& a);
// d/dtheta of grad_y g_eps
Cloud dtheta_grad_g_eps(double eps, double theta, const Cloud& y, const Lattice& a);
// Bound on |d/dtheta grad g_eps| valid for all eps, Y and theta >= theta_min.
double g_theta_bound(const Lattice& a, double theta_min);

enum class GaugeVariant { YScaling, ZPlain };
Trajectory change_gauge(const Trajectory& traj, Gauge target, GaugeVariant variant);

// Gradient of the discretized smooth action with respect to the nodes; endpoint rows are zero.
Trajectory::Matrix grad_discretized_action(const ActionSpec& spec, const Trajectory& traj);

// Reorders the endpoints of a spec for up_to_permutation mode (sorting in d=1, search otherwise).
ActionSpec resolve_endpoints(const ActionSpec& spec);

}  // namespace mag
