#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mag/assignment.hpp"
#include "mag/cloud.hpp"

namespace mag {

// Largest N for which routines enumerate all N! permutations.
inline constexpr std::size_t kPermutationCap = 8;

void require_enumerable(std::size_t n, const char* what);

struct SoftmaxStats {
  double value = 0;        // log mean_s exp(U . A^s)
  Cloud mean_vertex;       // softmax average of A^s
  std::vector<Perm> argmax_set;
};

double default_tie_tol(const Cloud& x, const Lattice& a);

SoftmaxStats softmax_stats(const Cloud& u, const Lattice& a, std::optional<double> tie_tol = {});
double h_logsumexp(const Cloud& u, const Lattice& a);
Cloud grad_h(const Cloud& u, const Lattice& a);
// D^2 h(u) v
Cloud hess_h_apply(const Cloud& u, const Cloud& v, const Lattice& a);

// max_s X . A^s via the assignment solver
double f_max(const Cloud& x, const Lattice& a);
double f_eps(double t, const Cloud& x, double eps, const Lattice& a);
Cloud grad_f_eps(double t, const Cloud& x, double eps, const Lattice& a);
// D^2 f_eps(t, x) v
Cloud hess_f_eps_apply(double t, const Cloud& x, const Cloud& v, double eps, const Lattice& a);

// Minimal-norm element of the subdifferential of f.
Cloud extended_gradient(const Cloud& x, const Lattice& a, std::optional<double> tie_tol = {});

// sum_C (sum_{j in C} a_j)^2 / #C
double internal_energy(const Partition& p, const Lattice& a);

struct GapInfo {
  double delta = 0;
  double alpha = 0;
};
// Smallest internal-energy drop over strict refinements of ordered partitions.
GapInfo delta_gap(const Lattice& a);

// argmin_Y f(Y) + |Y - X|^2 / (2 tau)
Cloud resolvent_f(const Cloud& x, double tau, const Lattice& a);
// Same with f replaced by f_eps(t, .)
Cloud resolvent_f_eps(const Cloud& x, double tau, double t, double eps, const Lattice& a);

}  // namespace mag
