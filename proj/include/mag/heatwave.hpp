#pragma once

#include <cstdint>

#include "mag/cloud.hpp"

namespace mag {

// Symmetrized Gaussian mixture centered at the permuted lattices, variance eps t.
double log_rho_eps(double t, const Cloud& x, double eps, const Lattice& a);
double rho_eps(double t, const Cloud& x, double eps, const Lattice& a);

// Companion velocity (X - <A^s>) / (2t), weights from the Gaussian kernel.
Cloud v_eps(double t, const Cloud& x, double eps, const Lattice& a);

// RK4 for X' = v_eps(t, X) on a uniform t grid.
Trajectory integrate_companion(const Cloud& x0, double t0, double t1, std::size_t steps, double eps,
                               const Lattice& a);

enum class NoiseProfile { InvSqrt, Unit };  // alpha(t) = 1/sqrt(t) or 1

struct NoiseSpec {
  double eta = 0;
  NoiseProfile alpha = NoiseProfile::InvSqrt;
  std::uint64_t seed = 0;
  std::size_t steps = 1000;
};

double noise_alpha(NoiseProfile p, double t);

// Standard normal draw that depends only on the key.
double counter_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t step, std::uint64_t coord);

// Euler-Maruyama with increments sqrt(eta) alpha(t) sqrt(dt) xi; `sample` selects an independent path.
Trajectory sample_sde(const Cloud& x0, double t0, double t1, const NoiseSpec& noise, double eps, const Lattice& a,
                      std::uint64_t sample = 0);

}  // namespace mag
