#include "mag/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mag {

Cloud::Cloud(std::size_t count, std::size_t dim) : n_(count), d_(dim), v_(Eigen::VectorXd::Zero(count * dim)) {
  if (dim == 0) throw ValidationError("cloud dimension must be >= 1");
}

Cloud::Cloud(std::size_t count, std::size_t dim, Eigen::VectorXd coords)
    : n_(count), d_(dim), v_(std::move(coords)) {
  if (dim == 0) throw ValidationError("cloud dimension must be >= 1");
  if (static_cast<std::size_t>(v_.size()) != count * dim)
    throw ValidationError("cloud coordinate count does not match N*d");
}

Cloud Cloud::line(const std::vector<double>& xs) {
  Eigen::VectorXd v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = xs[i];
  return Cloud(xs.size(), 1, std::move(v));
}

void check_same_shape(const Cloud& a, const Cloud& b, const char* what) {
  if (a.count() != b.count() || a.dim() != b.dim())
    throw ValidationError(std::string(what) + ": shape mismatch (" + std::to_string(a.count()) + "x" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.count()) + "x" +
                          std::to_string(b.dim()) + ")");
}

double Cloud::dot(const Cloud& o) const {
  check_same_shape(*this, o, "dot");
  return v_.dot(o.v_);
}

Cloud& Cloud::operator+=(const Cloud& o) {
  check_same_shape(*this, o, "add");
  v_ += o.v_;
  return *this;
}

Cloud& Cloud::operator-=(const Cloud& o) {
  check_same_shape(*this, o, "subtract");
  v_ -= o.v_;
  return *this;
}

Cloud operator+(Cloud a, const Cloud& b) { return a += b; }
Cloud operator-(Cloud a, const Cloud& b) { return a -= b; }
Cloud operator*(double s, Cloud a) { return a *= s; }
Cloud operator*(Cloud a, double s) { return a *= s; }

double max_abs_diff(const Cloud& a, const Cloud& b) {
  check_same_shape(a, b, "max_abs_diff");
  if (a.flat().size() == 0) return 0.0;
  return (a.flat() - b.flat()).cwiseAbs().maxCoeff();
}

Lattice::Lattice(Cloud points) : a_(std::move(points)) {
  if (a_.count() < 1) throw ValidationError("lattice needs N >= 1");
  if (!a_.is_finite()) throw ValidationError("lattice has non-finite entries");
  ordered_ = a_.dim() == 1;
  for (std::size_t i = 1; ordered_ && i < a_.count(); ++i)
    if (!(a_[i - 1] < a_[i])) ordered_ = false;
}

Eigen::VectorXd Lattice::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
  for (std::size_t i = 0; i < count(); ++i) m += a_.point(i);
  return m / static_cast<double>(count());
}

Cloud Lattice::mean_cloud() const {
  Cloud c(count(), dim());
  Eigen::VectorXd m = mean();
  for (std::size_t i = 0; i < count(); ++i) c.flat().segment(i * dim(), dim()) = m;
  return c;
}

void Lattice::require_ordered(const char* what) const {
  if (!ordered_) throw ValidationError(std::string(what) + " needs a strictly ordered 1-d lattice");
}

Perm::Perm(std::vector<std::size_t> mapping) : m_(std::move(mapping)) {
  std::vector<char> seen(m_.size(), 0);
  for (auto j : m_) {
    if (j >= m_.size() || seen[j]) throw ValidationError("permutation is not a bijection");
    seen[j] = 1;
  }
}

Perm Perm::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Perm(std::move(m));
}

Perm Perm::from_one_based(const std::vector<std::size_t>& m) {
  std::vector<std::size_t> z(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) throw ValidationError("one-based permutation contains 0");
    z[i] = m[i] - 1;
  }
  return Perm(std::move(z));
}

Perm Perm::compose(const Perm& inner) const {
  if (inner.size() != size()) throw ValidationError("compose: size mismatch");
  std::vector<std::size_t> r(size());
  for (std::size_t i = 0; i < size(); ++i) r[i] = m_[inner[i]];
  return Perm(std::move(r));
}

Perm Perm::inverse() const {
  std::vector<std::size_t> r(size());
  for (std::size_t i = 0; i < size(); ++i) r[m_[i]] = i;
  return Perm(std::move(r));
}

std::vector<Perm> all_permutations(std::size_t n) {
  std::vector<Perm> out;
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  do out.emplace_back(m);
  while (std::next_permutation(m.begin(), m.end()));
  return out;
}

Partition::Partition(const std::vector<std::size_t>& labels) {
  // relabel by first appearance
  std::vector<std::size_t> seen;
  class_of_.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), labels[i]);
    std::size_t c = static_cast<std::size_t>(it - seen.begin());
    if (it == seen.end()) {
      seen.push_back(labels[i]);
      classes_.emplace_back();
    }
    class_of_[i] = c;
    classes_[c].push_back(i);
  }
}

Partition Partition::from_classes(const std::vector<std::vector<std::size_t>>& classes) {
  std::size_t n = 0;
  for (auto& c : classes) {
    if (c.empty()) throw ValidationError("partition class is empty");
    n += c.size();
  }
  std::vector<std::size_t> labels(n, n);
  for (std::size_t k = 0; k < classes.size(); ++k)
    for (auto i : classes[k]) {
      if (i >= n || labels[i] != n) throw ValidationError("partition classes overlap or miss indices");
      labels[i] = k;
    }
  return Partition(labels);
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::size_t> l(n);
  std::iota(l.begin(), l.end(), 0);
  return Partition(l);
}

Partition Partition::whole(std::size_t n) { return Partition(std::vector<std::size_t>(n, 0)); }

bool Partition::is_ordered() const {
  for (auto& c : classes_)
    if (c.back() - c.front() + 1 != c.size()) return false;
  return true;
}

std::vector<Partition> ordered_partitions(std::size_t n) {
  if (n == 0) return {Partition()};
  if (n > 20) throw CapabilityError("ordered partition enumeration limited to N <= 20");
  std::vector<Partition> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
    std::vector<std::size_t> l(n, 0);
    for (std::size_t i = 1; i < n; ++i) l[i] = l[i - 1] + ((mask >> (i - 1)) & 1u);
    out.emplace_back(l);
  }
  return out;
}

namespace {
std::size_t find_root(std::vector<std::size_t>& p, std::size_t i) {
  while (p[i] != i) i = p[i] = p[p[i]];
  return i;
}
}  // namespace

Partition join(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw ValidationError("join: size mismatch");
  std::vector<std::size_t> p(a.size());
  std::iota(p.begin(), p.end(), 0);
  for (const auto* part : {&a, &b})
    for (auto& c : part->classes())
      for (std::size_t k = 1; k < c.size(); ++k) p[find_root(p, c[k])] = find_root(p, c[0]);
  std::vector<std::size_t> l(a.size());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = find_root(p, i);
  return Partition(l);
}

Cloud permute(const Cloud& x, const Perm& s) {
  if (s.size() != x.count()) throw ValidationError("permute: permutation size does not match cloud");
  Cloud r(x.count(), x.dim());
  const std::size_t d = x.dim();
  for (std::size_t i = 0; i < x.count(); ++i) r.flat().segment(i * d, d) = x.flat().segment(s[i] * d, d);
  return r;
}

std::pair<Cloud, Perm> sort_ascending(const Cloud& x) {
  if (x.dim() != 1) throw ValidationError("sort_ascending needs d = 1");
  std::vector<std::size_t> idx(x.count());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  Perm s(std::move(idx));
  return {permute(x, s), s};
}

Partition partition_of(const Cloud& x, double tol) {
  if (x.dim() != 1) throw ValidationError("partition_of needs d = 1");
  if (tol < 0) throw ValidationError("partition_of: tol must be >= 0");
  auto [sorted, s] = sort_ascending(x);
  // chaining in sorted order is the transitive closure
  std::vector<std::size_t> l(x.count());
  std::size_t c = 0;
  for (std::size_t r = 0; r < x.count(); ++r) {
    if (r > 0 && sorted[r] - sorted[r - 1] > tol) ++c;
    l[s[r]] = c;
  }
  return Partition(l);
}

Cloud project_class_average(const Cloud& v, const Partition& p) {
  if (p.size() != v.count()) throw ValidationError("project_class_average: size mismatch");
  Cloud r(v.count(), v.dim());
  const std::size_t d = v.dim();
  for (auto& c : p.classes()) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
    for (auto i : c) m += v.flat().segment(i * d, d);
    m /= static_cast<double>(c.size());
    for (auto i : c) r.flat().segment(i * d, d) = m;
  }
  return r;
}

bool is_refinement(const Partition& fine, const Partition& coarse) {
  if (fine.size() != coarse.size()) throw ValidationError("is_refinement: size mismatch");
  for (auto& c : fine.classes())
    for (auto i : c)
      if (coarse.class_of(i) != coarse.class_of(c[0])) return false;
  return true;
}

Trajectory::Trajectory(Gauge g, double start, double end, std::size_t steps, std::size_t count,
                       std::size_t dim)
    : gauge_(g), start_(start), end_(end), m_(steps), n_(count), d_(dim) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(start < end))
    throw ValidationError("trajectory window must be finite with start < end");
  if (g == Gauge::Time && !(start > 0)) throw ValidationError("heat kernel requires t>0");
  if (steps < 1) throw ValidationError("trajectory needs at least one step");
  if (dim < 1) throw ValidationError("trajectory dimension must be >= 1");
  x_ = Matrix::Zero(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(count * dim));
  p_ = Cloud(count, dim);
  q_ = Cloud(count, dim);
}

double Trajectory::time(std::size_t k) const {
  if (k == m_) return end_;
  return start_ + (end_ - start_) * (static_cast<double>(k) / static_cast<double>(m_));
}

Cloud Trajectory::state(std::size_t k) const {
  return Cloud(n_, d_, x_.row(static_cast<Eigen::Index>(k)).transpose());
}

void Trajectory::set_state(std::size_t k, const Cloud& x) {
  if (x.count() != n_ || x.dim() != d_) throw ValidationError("set_state: shape mismatch");
  x_.row(static_cast<Eigen::Index>(k)) = x.flat().transpose();
}

void Trajectory::set_endpoints(Cloud p, Cloud q) {
  if (p.count() != n_ || q.count() != n_ || p.dim() != d_ || q.dim() != d_)
    throw ValidationError("set_endpoints: shape mismatch");
  p_ = std::move(p);
  q_ = std::move(q);
}

double Trajectory::endpoint_mismatch() const {
  return std::max(max_abs_diff(state(0), p_), max_abs_diff(state(m_), q_));
}

Trajectory straight_line(Gauge g, double start, double end, std::size_t steps, const Cloud& p,
                         const Cloud& q) {
  check_same_shape(p, q, "straight_line");
  Trajectory tr(g, start, end, steps, p.count(), p.dim());
  for (std::size_t k = 0; k <= steps; ++k) {
    double s = static_cast<double>(k) / static_cast<double>(steps);
    tr.set_state(k, (1 - s) * p + s * q);
  }
  tr.set_state(steps, q);
  tr.set_endpoints(p, q);
  return tr;
}

}  // namespace mag
