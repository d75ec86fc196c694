#pragma once

#include <optional>
#include <vector>

#include "mag/cloud.hpp"

namespace mag {

// Forward sticky dynamics in the theta gauge: each cluster obeys z'' = z - m, m the mean of a over its members.

struct SimCluster {
  double position = 0;
  double velocity = 0;
  std::vector<std::size_t> members;  // consecutive indices
  double mass() const { return static_cast<double>(members.size()); }
};

struct SimState {
  double time = 0;
  std::vector<SimCluster> clusters;  // left to right
  Lattice lattice;

  double lattice_mean(const SimCluster& c) const;
  Cloud positions() const;
  Cloud velocities() const;
  Partition partition() const;
};

struct MergeEvent {
  double time = 0;
  double position = 0;
  std::vector<std::size_t> members;  // merged class
  std::vector<double> incoming;      // velocities of the colliding clusters, left first
  std::vector<double> masses;        // their member counts
  double velocity = 0;               // outgoing, mass-weighted mean
  double kinetic_loss = 0;
};

struct Collision {
  double time = 0;   // absolute
  std::size_t left = 0;  // clusters left and left + 1 touch
};

constexpr double kCollisionTol = 1e-12;

// Builds a state from ordered positions; coinciding particles (gap <= kCollisionTol) start merged
// with the mean velocity of their members.
SimState make_sim_state(const Lattice& a, const Cloud& p, const Cloud& v0, double time = 0);

SimState flow_free(const SimState& s, double dt);

std::optional<Collision> first_collision_time(const SimState& s, double horizon);

// c1 must be immediately left of c2.
std::pair<SimCluster, MergeEvent> merge_clusters(const SimCluster& c1, const SimCluster& c2, double time);

struct StickyRun {
  Trajectory trajectory;
  std::vector<MergeEvent> events;
};

StickyRun simulate_sticky(const Lattice& a, const Cloud& p, const Cloud& v0, double start, double end,
                          std::size_t steps = 512);

}  // namespace mag
