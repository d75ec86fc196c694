#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "mag/cloud.hpp"

namespace mag {

struct MinNormResult {
  Eigen::VectorXd point;
  std::vector<Eigen::VectorXd> support;
  Eigen::VectorXd weights;  // convex weights on support
  int iterations = 0;
  double gap = 0;  // |x|^2 - min_v <x, v> at exit
  bool converged = false;
};

// Returns a vertex v of the polytope minimizing <direction, v>.
using LinearOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Wolfe's min-norm-point algorithm driven by a linear minimization oracle.
MinNormResult wolfe_min_norm_point(const LinearOracle& lmo, const Eigen::VectorXd& start, int max_iter = 10000,
                                   double rel_tol = 1e-13);

// Minimal-norm point of conv(vertices). Throws ValidationError on an empty list.
Cloud min_norm_point(const std::vector<Cloud>& vertices);

}  // namespace mag
