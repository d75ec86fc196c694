#pragma once

#include <vector>

#include "mag/cloud.hpp"
#include "mag/sticky.hpp"

namespace mag {

struct EnergyProfile {
  // E = |Z'|^2 - |Z - A|^2 - h(partition of Z) per grid interval (forward-difference velocity, midpoint state);
  // NaN on intervals whose two end states have different partitions.
  std::vector<double> values;
  double median = 0;
  double max_deviation = 0;  // over the finite values
  std::size_t skipped = 0;
};

EnergyProfile energy_profile(const Trajectory& traj, const Lattice& a, double cluster_tol = 1e-9);

// max over interior nodes of |M'' - (M - abar)|, M the mean coordinate
double momentum_residual(const Trajectory& traj, const Lattice& a);

enum class ShockKind { Merge, Split, Regroup };

struct ShockRecord {
  double time = 0;
  double location = 0;
  std::vector<std::size_t> members;  // class C, consecutive indices
  ShockKind kind = ShockKind::Merge;
  std::size_t interval = 0;          // grid interval (k, k+1) containing the shock
  double cluster_tol = 0;
  bool isolated = false;
};

// Space window used by the isolation test: 4 max(cluster_tol, dtheta vmax). The time window is 4 dtheta.
double isolation_radius(const Trajectory& traj, double cluster_tol);

std::vector<ShockRecord> detect_shocks(const Trajectory& traj, double cluster_tol = 1e-9);

struct JumpCheck {
  double jump = 0;    // z'_{min C}(t-) - z'_{min C}(t+)
  double alpha = 0;
  double v_before = 0, v_after = 0;
  bool pass = false;
  bool inconclusive = false;
};

// One-sided velocities from quadratic least-squares fits over 8 grid steps on each side.
constexpr std::size_t kJumpWindow = 8;
JumpCheck check_velocity_jump(const Trajectory& traj, const ShockRecord& shock, const Lattice& a,
                              double tolerance = 0.01);

// Time intervals on which at least two particles share a cluster.
struct Interval {
  double begin = 0, end = 0;
};
std::vector<Interval> stuck_intervals(const Trajectory& traj, double cluster_tol = 1e-9);

// max over grid states of (max z - min z)
double max_spread(const Trajectory& traj);

// max over nodes and coordinates of |x - y|; grids must match
double sup_distance(const Trajectory& x, const Trajectory& y);

// Energy change of a forward merge: internal-energy drop minus kinetic loss.
double merge_energy_jump(const MergeEvent& e, const Lattice& a);

}  // namespace mag
