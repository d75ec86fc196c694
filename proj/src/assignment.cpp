#include "mag/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mag {

namespace {

using Mat = std::vector<std::vector<double>>;

// Rows to columns, e-maxx formulation with 1-based padding. Returns row -> col and the column potentials.
void hungarian(const Mat& c, std::vector<std::size_t>& row_to_col, std::vector<double>& u,
               std::vector<double>& v) {
  const std::size_t n = c.size();
  const double inf = std::numeric_limits<double>::infinity();
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = c[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
}

// Kuhn augmenting path on the allowed-edge graph restricted to free rows/cols.
bool augment(std::size_t r, const std::vector<std::vector<char>>& ok, const std::vector<char>& col_free,
             std::vector<long>& match_col, std::vector<char>& seen) {
  for (std::size_t j = 0; j < ok[r].size(); ++j) {
    if (!ok[r][j] || !col_free[j] || seen[j]) continue;
    seen[j] = 1;
    if (match_col[j] < 0 || augment(static_cast<std::size_t>(match_col[j]), ok, col_free, match_col, seen)) {
      match_col[j] = static_cast<long>(r);
      return true;
    }
  }
  return false;
}

bool has_perfect_matching(std::size_t first_row, const std::vector<std::vector<char>>& ok,
                          const std::vector<char>& col_free) {
  const std::size_t n = ok.size();
  std::vector<long> match_col(n, -1);
  for (std::size_t r = first_row; r < n; ++r) {
    std::vector<char> seen(n, 0);
    if (!augment(r, ok, col_free, match_col, seen)) return false;
  }
  return true;
}

}  // namespace

double assignment_cost(const Cloud& x, const Lattice& a, const Perm& s) {
  check_same_shape(x, a.points(), "assignment_cost");
  double total = 0;
  for (std::size_t i = 0; i < x.count(); ++i) total += (x.point(i) - a.points().point(s[i])).squaredNorm();
  return total;
}

double assignment_score(const Cloud& x, const Lattice& a, const Perm& s) {
  check_same_shape(x, a.points(), "assignment_score");
  double total = 0;
  for (std::size_t i = 0; i < x.count(); ++i) total += x.point(i).dot(a.points().point(s[i]));
  return total;
}

Assignment optimal_assignment(const Cloud& x, const Lattice& a) {
  check_same_shape(x, a.points(), "optimal_assignment");
  const std::size_t n = x.count();
  // -x_i . a_j has the same minimizers as the squared distance and no cancellation.
  Mat c(n, std::vector<double>(n));
  double scale = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      c[i][j] = -x.point(i).dot(a.points().point(j));
      scale = std::max(scale, std::abs(c[i][j]));
    }
  std::vector<std::size_t> r2c;
  std::vector<double> u, v;
  hungarian(c, r2c, u, v);

  const double tol = 1e-11 * (1.0 + scale) * static_cast<double>(n);
  std::vector<std::vector<char>> ok(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ok[i][j] = c[i][j] - u[i + 1] - v[j + 1] <= tol;
  for (std::size_t i = 0; i < n; ++i) ok[i][r2c[i]] = 1;

  // greedy lexicographic choice among perfect matchings of tight edges
  std::vector<char> col_free(n, 1);
  std::vector<std::size_t> best(n);
  std::vector<std::vector<char>> work = ok;
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (std::size_t j = 0; j < n && !placed; ++j) {
      if (!ok[i][j] || !col_free[j]) continue;
      col_free[j] = 0;
      if (has_perfect_matching(i + 1, work, col_free)) {
        best[i] = j;
        placed = true;
      } else {
        col_free[j] = 1;
      }
    }
    if (!placed) {
      // numerical corner: fall back to the solver's own matching
      best = r2c;
      break;
    }
  }
  Perm s(best);
  if (assignment_score(x, a, s) < assignment_score(x, a, Perm(r2c))) s = Perm(r2c);
  return {s, assignment_cost(x, a, s)};
}

}  // namespace mag
