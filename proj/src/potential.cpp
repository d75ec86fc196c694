#include "mag/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mag/min_norm_point.hpp"

namespace mag {

namespace {

// Calls fn(p, score) for every permutation p in lexicographic order, score = X . A^p.
template <class Fn>
void for_each_vertex(const Cloud& x, const Lattice& a, Fn&& fn) {
  const std::size_t n = x.count();
  // gram[i][j] = x_i . a_j
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = x.point(i).dot(a.points().point(j));
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += gram[i * n + p[i]];
    fn(p, s);
  } while (std::next_permutation(p.begin(), p.end()));
}

void add_vertex(Eigen::VectorXd& acc, double w, const std::vector<std::size_t>& p, const Lattice& a) {
  const std::size_t d = a.dim();
  const Eigen::VectorXd& av = a.points().flat();
  for (std::size_t i = 0; i < p.size(); ++i) acc.segment(i * d, d) += w * av.segment(p[i] * d, d);
}

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

struct Weights {
  std::vector<double> w;
  double max = 0, total = 0;
};

Weights softmax_weights(const Cloud& u, const Lattice& a) {
  Weights r;
  std::vector<double> s;
  for_each_vertex(u, a, [&](const std::vector<std::size_t>&, double sc) { s.push_back(sc); });
  r.max = *std::max_element(s.begin(), s.end());
  r.w.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    r.w[k] = std::exp(s[k] - r.max);
    r.total += r.w[k];
  }
  return r;
}

void check_args(const Cloud& x, const Lattice& a, const char* what) {
  check_same_shape(x, a.points(), what);
  if (!x.is_finite()) throw ValidationError(std::string(what) + ": non-finite input");
}

void check_t_eps(double t, double eps, const char* what) {
  if (!(t > 0) || !(eps > 0)) throw ValidationError(std::string(what) + " needs t > 0 and eps > 0");
}

}  // namespace

void require_enumerable(std::size_t n, const char* what) {
  if (n > kPermutationCap)
    throw CapabilityError(std::string(what) + ": N = " + std::to_string(n) + " exceeds the permutation cap " +
                          std::to_string(kPermutationCap));
}

double default_tie_tol(const Cloud& x, const Lattice& a) { return 1e-9 * (1.0 + x.norm() * a.norm()); }

SoftmaxStats softmax_stats(const Cloud& u, const Lattice& a, std::optional<double> tie_tol) {
  check_args(u, a, "softmax_stats");
  require_enumerable(u.count(), "softmax_stats");
  Weights w = softmax_weights(u, a);
  const double tol = tie_tol.value_or(default_tie_tol(u, a));
  SoftmaxStats r;
  r.value = w.max + std::log(w.total) - log_factorial(u.count());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(u.flat().size());
  std::size_t k = 0;
  for_each_vertex(u, a, [&](const std::vector<std::size_t>& p, double sc) {
    add_vertex(acc, w.w[k++] / w.total, p, a);
    if (sc >= w.max - tol) r.argmax_set.emplace_back(p);
  });
  r.mean_vertex = Cloud(u.count(), u.dim(), acc);
  return r;
}

double h_logsumexp(const Cloud& u, const Lattice& a) {
  check_args(u, a, "h_logsumexp");
  require_enumerable(u.count(), "h_logsumexp");
  Weights w = softmax_weights(u, a);
  return w.max + std::log(w.total) - log_factorial(u.count());
}

Cloud grad_h(const Cloud& u, const Lattice& a) {
  check_args(u, a, "grad_h");
  require_enumerable(u.count(), "grad_h");
  Weights w = softmax_weights(u, a);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(u.flat().size());
  std::size_t k = 0;
  for_each_vertex(u, a, [&](const std::vector<std::size_t>& p, double) { add_vertex(acc, w.w[k++] / w.total, p, a); });
  return Cloud(u.count(), u.dim(), acc);
}

Cloud hess_h_apply(const Cloud& u, const Cloud& v, const Lattice& a) {
  check_args(u, a, "hess_h_apply");
  check_same_shape(u, v, "hess_h_apply");
  require_enumerable(u.count(), "hess_h_apply");
  Weights w = softmax_weights(u, a);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(u.flat().size());
  std::size_t k = 0;
  for_each_vertex(u, a, [&](const std::vector<std::size_t>& p, double) { add_vertex(mean, w.w[k++] / w.total, p, a); });
  // centered second moment: <((A^s - m) . v)(A^s - m)>
  const std::size_t d = a.dim();
  const Eigen::VectorXd& av = a.points().flat();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(u.flat().size());
  Eigen::VectorXd c(u.flat().size());
  k = 0;
  for_each_vertex(u, a, [&](const std::vector<std::size_t>& p, double) {
    for (std::size_t i = 0; i < p.size(); ++i) c.segment(i * d, d) = av.segment(p[i] * d, d);
    c -= mean;
    acc += (w.w[k++] / w.total) * c.dot(v.flat()) * c;
  });
  return Cloud(u.count(), u.dim(), acc);
}

double f_max(const Cloud& x, const Lattice& a) {
  check_args(x, a, "f_max");
  return assignment_score(x, a, optimal_assignment(x, a).perm);
}

double f_eps(double t, const Cloud& x, double eps, const Lattice& a) {
  check_t_eps(t, eps, "f_eps");
  const double s = eps * t;
  return s * h_logsumexp((1.0 / s) * x, a);
}

Cloud grad_f_eps(double t, const Cloud& x, double eps, const Lattice& a) {
  check_t_eps(t, eps, "grad_f_eps");
  return grad_h((1.0 / (eps * t)) * x, a);
}

Cloud hess_f_eps_apply(double t, const Cloud& x, const Cloud& v, double eps, const Lattice& a) {
  check_t_eps(t, eps, "hess_f_eps_apply");
  const double s = eps * t;
  return (1.0 / s) * hess_h_apply((1.0 / s) * x, v, a);
}

Cloud extended_gradient(const Cloud& x, const Lattice& a, std::optional<double> tie_tol) {
  check_args(x, a, "extended_gradient");
  const double tol = tie_tol.value_or(default_tie_tol(x, a));
  if (tol < 0) throw ValidationError("extended_gradient: tie_tol must be >= 0");
  const std::size_t n = x.count();
  if (x.dim() == 1) {
    auto [xs, s] = sort_ascending(x);
    std::vector<double> as(a.points().flat().data(), a.points().flat().data() + n);
    std::sort(as.begin(), as.end());
    const double spread = as.back() - as.front();
    // coordinates i<j are tied when swapping them changes X . A^s by at most tol
    const double ctol = spread > 0 ? tol / spread : std::numeric_limits<double>::infinity();
    Cloud g(n, 1);
    std::size_t lo = 0;
    while (lo < n) {
      std::size_t hi = lo + 1;
      while (hi < n && xs[hi] - xs[hi - 1] <= ctol) ++hi;
      double m = 0;
      for (std::size_t r = lo; r < hi; ++r) m += as[r];
      m /= static_cast<double>(hi - lo);
      for (std::size_t r = lo; r < hi; ++r) g[s[r]] = m;
      lo = hi;
    }
    return g;
  }
  require_enumerable(n, "extended_gradient");
  double best = -std::numeric_limits<double>::infinity();
  for_each_vertex(x, a, [&](const std::vector<std::size_t>&, double sc) { best = std::max(best, sc); });
  std::vector<Cloud> verts;
  for_each_vertex(x, a, [&](const std::vector<std::size_t>& p, double sc) {
    if (sc >= best - tol) verts.push_back(permute(a.points(), Perm(p)));
  });
  return min_norm_point(verts);
}

double internal_energy(const Partition& p, const Lattice& a) {
  if (a.dim() != 1) throw ValidationError("internal_energy is defined for d = 1");
  if (p.size() != a.count()) throw ValidationError("internal_energy: partition size does not match lattice");
  double h = 0;
  for (auto& c : p.classes()) {
    double s = 0;
    for (auto j : c) s += a.points()[j];
    h += s * s / static_cast<double>(c.size());
  }
  return h;
}

GapInfo delta_gap(const Lattice& a) {
  a.require_ordered("delta_gap");
  const std::size_t n = a.count();
  if (n < 2) throw ValidationError("delta_gap needs N >= 2");
  if (n > 12) throw CapabilityError("delta_gap enumerates ordered partitions only for N <= 12");
  auto parts = ordered_partitions(n);
  std::vector<double> h(parts.size());
  for (std::size_t m = 0; m < parts.size(); ++m) h[m] = internal_energy(parts[m], a);
  // index bits are cuts; coarse refines-into fine iff coarse cuts are a proper subset of fine cuts
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t fine = 1; fine < parts.size(); ++fine) {
    for (std::size_t sub = (fine - 1) & fine;; sub = (sub - 1) & fine) {
      delta = std::min(delta, h[fine] - h[sub]);
      if (sub == 0) break;
    }
  }
  return {delta, std::sqrt(delta / static_cast<double>(n * n - n))};
}

Cloud resolvent_f(const Cloud& x, double tau, const Lattice& a) {
  check_args(x, a, "resolvent_f");
  if (!(tau > 0)) throw ValidationError("resolvent_f needs tau > 0");
  const Cloud c = (1.0 / tau) * x;
  // prox of the support function of conv{A^s}: X - tau * proj(X / tau)
  auto lmo = [&](const Eigen::VectorXd& dir) -> Eigen::VectorXd {
    Cloud neg(x.count(), x.dim(), -dir);
    Perm s = optimal_assignment(neg, a).perm;
    return permute(a.points(), s).flat() - c.flat();
  };
  Eigen::VectorXd start = permute(a.points(), optimal_assignment(c, a).perm).flat() - c.flat();
  MinNormResult r = wolfe_min_norm_point(lmo, start);
  if (!r.converged)
    throw NumericalError("resolvent_f: inner min-norm solver did not converge after " +
                         std::to_string(r.iterations) + " iterations, residual gap " + std::to_string(r.gap));
  Cloud proj(x.count(), x.dim(), r.point + c.flat());
  return x - tau * proj;
}

Cloud resolvent_f_eps(const Cloud& x, double tau, double t, double eps, const Lattice& a) {
  check_args(x, a, "resolvent_f_eps");
  if (!(tau > 0)) throw ValidationError("resolvent_f_eps needs tau > 0");
  check_t_eps(t, eps, "resolvent_f_eps");
  const std::size_t p = static_cast<std::size_t>(x.flat().size());
  auto phi = [&](const Cloud& y) { return f_eps(t, y, eps, a) + (y - x).squared_norm() / (2 * tau); };
  Cloud y = resolvent_f(x, tau, a);
  double val = phi(y);
  for (int it = 0; it < 200; ++it) {
    Cloud g = grad_f_eps(t, y, eps, a) + (1.0 / tau) * (y - x);
    if (g.norm() <= 1e-13 * (1.0 + x.norm() / tau)) return y;
    Eigen::MatrixXd hm(p, p);
    for (std::size_t j = 0; j < p; ++j) {
      Cloud e(x.count(), x.dim());
      e.flat()[static_cast<Eigen::Index>(j)] = 1;
      hm.col(static_cast<Eigen::Index>(j)) = hess_f_eps_apply(t, y, e, eps, a).flat();
    }
    hm.diagonal().array() += 1.0 / tau;
    Eigen::VectorXd step = hm.ldlt().solve(-g.flat());
    double lam = 1.0;
    for (int ls = 0; ls < 60; ++ls, lam *= 0.5) {
      Cloud yn(x.count(), x.dim(), y.flat() + lam * step);
      double vn = phi(yn);
      if (vn <= val + 1e-4 * lam * g.flat().dot(step) || lam * step.norm() < 1e-16 * (1 + y.norm())) {
        y = yn;
        val = vn;
        break;
      }
    }
  }
  Cloud g = grad_f_eps(t, y, eps, a) + (1.0 / tau) * (y - x);
  if (g.norm() <= 1e-9 * (1.0 + x.norm() / tau)) return y;
  throw NumericalError("resolvent_f_eps: Newton iteration did not converge, residual " + std::to_string(g.norm()));
}

}  // namespace mag
