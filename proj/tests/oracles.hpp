#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "mag/assignment.hpp"
#include "mag/cloud.hpp"

namespace oracle {

struct Brute {
  mag::Perm perm;
  double cost;
};

// Lexicographically first permutation of minimal cost over all N!.
inline Brute brute_force_assignment(const mag::Cloud& x, const mag::Lattice& a) {
  Brute best{mag::Perm::identity(x.count()), std::numeric_limits<double>::infinity()};
  for (auto& p : mag::all_permutations(x.count())) {
    double c = mag::assignment_cost(x, a, p);
    if (c < best.cost) best = {p, c};
  }
  return best;
}

inline double brute_force_fmax(const mag::Cloud& x, const mag::Lattice& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (auto& p : mag::all_permutations(x.count())) best = std::max(best, mag::assignment_score(x, a, p));
  return best;
}

// Min-norm point of conv(vertices) by projected gradient on simplex weights.
inline Eigen::VectorXd qp_min_norm(const std::vector<Eigen::VectorXd>& v, int iters = 200000) {
  const std::size_t k = v.size();
  Eigen::MatrixXd m(v[0].size(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) m.col(static_cast<Eigen::Index>(i)) = v[i];
  Eigen::MatrixXd g = m.transpose() * m;
  double lip = g.eigenvalues().real().maxCoeff() + 1e-12;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
  auto project_simplex = [](Eigen::VectorXd y) {
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.rbegin(), u.rend());
    double css = 0, theta = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      css += u[j];
      double t = (css - 1) / static_cast<double>(j + 1);
      if (u[j] - t > 0) theta = t;
    }
    return Eigen::VectorXd((y.array() - theta).max(0.0));
  };
  // accelerated projected gradient
  Eigen::VectorXd z = w, prev = w;
  double tk = 1;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd wn = project_simplex(z - (g * z) / lip);
    double tn = (1 + std::sqrt(1 + 4 * tk * tk)) / 2;
    z = wn + ((tk - 1) / tn) * (wn - prev);
    prev = wn;
    tk = tn;
  }
  return m * prev;
}

// Isotonic (non-decreasing) least-squares fit, pool adjacent violators.
inline std::vector<double> pav(const std::vector<double>& y) {
  std::vector<double> val;
  std::vector<std::size_t> len;
  for (double v : y) {
    val.push_back(v);
    len.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] > val.back()) {
      double w1 = static_cast<double>(len[len.size() - 2]), w2 = static_cast<double>(len.back());
      double m = (w1 * val[val.size() - 2] + w2 * val.back()) / (w1 + w2);
      len[len.size() - 2] += len.back();
      val[val.size() - 2] = m;
      val.pop_back();
      len.pop_back();
    }
  }
  std::vector<double> out;
  for (std::size_t b = 0; b < val.size(); ++b) out.insert(out.end(), len[b], val[b]);
  return out;
}

// Prox of f in d = 1: sort, isotonic regression of x - tau * a_sorted, unsort.
inline mag::Cloud prox_1d(const mag::Cloud& x, double tau, const mag::Lattice& a) {
  const std::size_t n = x.count();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j]; });
  std::vector<double> as(a.points().flat().data(), a.points().flat().data() + n);
  std::sort(as.begin(), as.end());
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = x[idx[r]] - tau * as[r];
  auto fit = pav(y);
  mag::Cloud out(n, 1);
  for (std::size_t r = 0; r < n; ++r) out[idx[r]] = fit[r];
  return out;
}

// Central difference gradient of a scalar function of a flat vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double xi = x[i];
    x[i] = xi + h;
    double fp = f(x);
    x[i] = xi - h;
    double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

// Classical fourth-order Runge-Kutta on a uniform grid.
inline Eigen::VectorXd rk4(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                           Eigen::VectorXd y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  for (int k = 0; k < steps; ++k) {
    double t = t0 + k * h;
    Eigen::VectorXd k1 = rhs(t, y), k2 = rhs(t + h / 2, y + h / 2 * k1), k3 = rhs(t + h / 2, y + h / 2 * k2),
                    k4 = rhs(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

}  // namespace oracle
