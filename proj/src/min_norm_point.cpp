#include "mag/min_norm_point.hpp"

#include <algorithm>
#include <cmath>

namespace mag {

namespace {

// Weights (summing to 1) of the min-norm point of the affine hull of the columns of s.
Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& s) {
  const Eigen::Index k = s.cols();
  Eigen::VectorXd mu(k);
  if (k == 1) {
    mu[0] = 1;
    return mu;
  }
  Eigen::MatrixXd d = s.rightCols(k - 1).colwise() - s.col(0);
  Eigen::VectorXd c = d.completeOrthogonalDecomposition().solve(-s.col(0));
  mu[0] = 1 - c.sum();
  mu.tail(k - 1) = c;
  return mu;
}

}  // namespace

MinNormResult wolfe_min_norm_point(const LinearOracle& lmo, const Eigen::VectorXd& start, int max_iter,
                                   double rel_tol) {
  MinNormResult r;
  std::vector<Eigen::VectorXd> pts{start};
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd x = start;
  double radius2 = start.squaredNorm();
  auto as_matrix = [&] {
    Eigen::MatrixXd m(x.size(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
    return m;
  };

  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    Eigen::VectorXd v = lmo(x);
    radius2 = std::max(radius2, v.squaredNorm());
    r.gap = x.squaredNorm() - x.dot(v);
    if (r.gap <= rel_tol * std::max(1.0, radius2)) {
      r.converged = true;
      break;
    }
    bool repeated = false;
    for (auto& p : pts)
      if ((p - v).squaredNorm() <= 1e-28 * std::max(1.0, radius2)) repeated = true;
    if (repeated) {
      // no new vertex improves on the current corral: x is optimal up to rounding
      r.converged = r.gap <= 1e-9 * std::max(1.0, radius2);
      break;
    }
    pts.push_back(v);
    lam.conservativeResize(lam.size() + 1);
    lam[lam.size() - 1] = 0;

    for (int minor = 0; minor < 4 * static_cast<int>(x.size()) + 16; ++minor) {
      Eigen::MatrixXd s = as_matrix();
      Eigen::VectorXd mu = affine_minimizer(s);
      const double eps = 1e-14;
      if ((mu.array() > eps).all()) {
        lam = mu;
        x = s * lam;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (mu[i] <= eps) theta = std::min(theta, lam[i] / (lam[i] - mu[i]));
      lam = lam + theta * (mu - lam);
      std::vector<Eigen::VectorXd> keep_p;
      std::vector<double> keep_l;
      Eigen::Index drop = 0;
      double drop_val = 1e300;
      for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] < drop_val) {
          drop_val = lam[i];
          drop = i;
        }
      for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (i != drop && lam[i] > eps) {
          keep_p.push_back(pts[static_cast<std::size_t>(i)]);
          keep_l.push_back(lam[i]);
        }
      pts = std::move(keep_p);
      lam = Eigen::Map<Eigen::VectorXd>(keep_l.data(), static_cast<Eigen::Index>(keep_l.size()));
      lam /= lam.sum();
      x = as_matrix() * lam;
    }
  }
  r.point = x;
  r.support = pts;
  r.weights = lam;
  return r;
}

Cloud min_norm_point(const std::vector<Cloud>& vertices) {
  if (vertices.empty()) throw ValidationError("min_norm_point: empty vertex list");
  for (auto& v : vertices) check_same_shape(v, vertices.front(), "min_norm_point");
  auto lmo = [&](const Eigen::VectorXd& dir) -> Eigen::VectorXd {
    std::size_t best = 0;
    double bv = dir.dot(vertices[0].flat());
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      double s = dir.dot(vertices[i].flat());
      if (s < bv) {
        bv = s;
        best = i;
      }
    }
    return vertices[best].flat();
  };
  // start from the shortest vertex
  std::size_t s0 = 0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if (vertices[i].squared_norm() < vertices[s0].squared_norm()) s0 = i;
  MinNormResult r = wolfe_min_norm_point(lmo, vertices[s0].flat());
  if (!r.converged)
    throw NumericalError("min_norm_point did not converge (gap " + std::to_string(r.gap) + ")");
  return Cloud(vertices[0].count(), vertices[0].dim(), r.point);
}

}  // namespace mag
