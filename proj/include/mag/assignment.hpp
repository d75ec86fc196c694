#pragma once

#include "mag/cloud.hpp"

namespace mag {

struct Assignment {
  Perm perm;
  double cost = 0;  // sum_i |x_i - a_perm(i)|^2
};

double assignment_cost(const Cloud& x, const Lattice& a, const Perm& s);
// X . A^s
double assignment_score(const Cloud& x, const Lattice& a, const Perm& s);

// Minimizes sum_i |x_i - a_s(i)|^2 (Hungarian method, O(N^3)).
// Among optimal permutations the lexicographically smallest is returned.
Assignment optimal_assignment(const Cloud& x, const Lattice& a);

}  // namespace mag
