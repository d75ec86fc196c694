#pragma once

#include <random>
#include <vector>

#include "mag/cloud.hpp"

namespace testing_support {

inline mag::Cloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  mag::Cloud c(n, d);
  for (Eigen::Index i = 0; i < c.flat().size(); ++i) c.flat()[i] = u(rng);
  return c;
}

inline mag::Lattice random_ordered_lattice(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> gap(0.2, 1.5), start(-2, 0);
  std::vector<double> a(n);
  double x = start(rng);
  for (auto& v : a) {
    v = x;
    x += gap(rng);
  }
  return mag::Lattice::line(a);
}

inline mag::Lattice random_lattice(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  if (d == 1) return random_ordered_lattice(rng, n);
  return mag::Lattice(random_cloud(rng, n, d, 2.0));
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace testing_support
