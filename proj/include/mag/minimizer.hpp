#pragma once

#include <vector>

#include "mag/actions.hpp"

namespace mag {

struct SolveOptions {
  double grad_tol = 1e-7;          // on the sup norm of the interior gradient
  std::size_t max_iter = 100000;
  double armijo = 1e-4;
  std::size_t memory = 10;         // quasi-Newton pairs; 0 gives plain preconditioned descent
};

struct SolveReport {
  Trajectory final_traj;
  double value = 0;
  double grad_norm = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;  // value after each accepted step, starting with the initial value
};

// Descent on a smooth discretized action with clamped endpoints. Directions come from an
// H1-preconditioned limited-memory quasi-Newton model; each step is accepted by Armijo backtracking.
SolveReport minimize_fixed_eps(const ActionSpec& spec, const Trajectory& init, const SolveOptions& opts = {});

struct SweepEntry {
  double eps = 0;
  SolveReport report;
  double limit_value = 0;  // Gamma-limit functional evaluated on the minimizer
};

// eps_k = 2^-k, k = 0..7
std::vector<double> default_schedule();

// Warm-started continuation over a strictly decreasing schedule.
std::vector<SweepEntry> continuation_sweep(const ActionSpec& base, const std::vector<double>& schedule,
                                           const Trajectory& init, const SolveOptions& opts = {});

}  // namespace mag
