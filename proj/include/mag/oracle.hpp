#pragma once

#include <optional>
#include <vector>

#include "mag/cloud.hpp"

namespace mag {

// Piecewise structure of a 1-d path: phases[j] holds on (times[j-1], times[j]).
struct ShockPattern {
  std::vector<Partition> phases;
  std::vector<double> times;  // interior transition times, strictly increasing
};

struct PatternSolution {
  double value = 0;  // exact Lambda'
  ShockPattern pattern;
  // cluster positions at each junction: junction[j][c] for class c of join(phases[j], phases[j+1])
  std::vector<std::vector<double>> junction;
};

struct OracleResult {
  Trajectory trajectory;
  double value = 0;
  ShockPattern pattern;
};

// Exact Lambda' of the best path following `pattern` with the given transition times; nullopt if the
// resulting path leaves the ordered cone or the endpoints are incompatible with the first/last phase.
std::optional<PatternSolution> evaluate_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start,
                                                double end, const ShockPattern& pattern);

// Same with the transition times optimized (grid scan then golden section).
std::optional<PatternSolution> optimize_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start,
                                                double end, const std::vector<Partition>& phases);

// Samples a solved pattern on a uniform theta grid.
Trajectory sample_pattern(const Lattice& a, const Cloud& p, const Cloud& q, double start, double end,
                          std::size_t steps, const PatternSolution& sol);

// Minimizer of Lambda' over ordered paths with at most pattern_budget transitions (d = 1, N <= 3).
// Endpoints are sorted first.
OracleResult oracle_minimizer_1d(const Lattice& a, const Cloud& p, const Cloud& q, double start, double end,
                                 std::size_t steps, std::size_t pattern_budget = 2);

}  // namespace mag
