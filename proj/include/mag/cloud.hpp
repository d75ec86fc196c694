#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <vector>

#include "mag/errors.hpp"

namespace mag {

// N labeled points in R^d, stored particle-major in one flat vector.
class Cloud {
 public:
  Cloud() = default;
  Cloud(std::size_t count, std::size_t dim);
  Cloud(std::size_t count, std::size_t dim, Eigen::VectorXd coords);
  static Cloud line(const std::vector<double>& xs);

  std::size_t count() const { return n_; }
  std::size_t dim() const { return d_; }

  double operator()(std::size_t i, std::size_t k) const { return v_[i * d_ + k]; }
  double& operator()(std::size_t i, std::size_t k) { return v_[i * d_ + k]; }
  // d=1 shorthand
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }

  Eigen::VectorXd point(std::size_t i) const { return v_.segment(i * d_, d_); }
  const Eigen::VectorXd& flat() const { return v_; }
  Eigen::VectorXd& flat() { return v_; }

  double dot(const Cloud& o) const;
  double squared_norm() const { return v_.squaredNorm(); }
  double norm() const { return v_.norm(); }
  bool is_finite() const { return v_.allFinite(); }
  std::vector<double> to_vector() const { return {v_.data(), v_.data() + v_.size()}; }

  Cloud& operator+=(const Cloud& o);
  Cloud& operator-=(const Cloud& o);
  Cloud& operator*=(double s) { v_ *= s; return *this; }

  bool operator==(const Cloud& o) const { return n_ == o.n_ && d_ == o.d_ && v_ == o.v_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 1;
  Eigen::VectorXd v_;
};

Cloud operator+(Cloud a, const Cloud& b);
Cloud operator-(Cloud a, const Cloud& b);
Cloud operator*(double s, Cloud a);
Cloud operator*(Cloud a, double s);
double max_abs_diff(const Cloud& a, const Cloud& b);
void check_same_shape(const Cloud& a, const Cloud& b, const char* what);

// Reference points A. strictly_ordered is set for d=1 lattices with a_1 < ... < a_N.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(Cloud points);
  static Lattice line(const std::vector<double>& as) { return Lattice(Cloud::line(as)); }

  const Cloud& points() const { return a_; }
  std::size_t count() const { return a_.count(); }
  std::size_t dim() const { return a_.dim(); }
  bool strictly_ordered() const { return ordered_; }
  double norm() const { return a_.norm(); }
  Eigen::VectorXd mean() const;
  // (abar, ..., abar)
  Cloud mean_cloud() const;
  void require_ordered(const char* what) const;

 private:
  Cloud a_;
  bool ordered_ = false;
};

// Bijection of {0..N-1}; (X^s)_i = x_{s(i)}.
class Perm {
 public:
  Perm() = default;
  explicit Perm(std::vector<std::size_t> mapping);
  static Perm identity(std::size_t n);
  static Perm from_one_based(const std::vector<std::size_t>& m);

  std::size_t size() const { return m_.size(); }
  std::size_t operator[](std::size_t i) const { return m_[i]; }
  const std::vector<std::size_t>& mapping() const { return m_; }

  // (this o inner)(i) = this[inner[i]]
  Perm compose(const Perm& inner) const;
  Perm inverse() const;

  auto operator<=>(const Perm&) const = default;
  bool operator==(const Perm&) const = default;

 private:
  std::vector<std::size_t> m_;
};

std::vector<Perm> all_permutations(std::size_t n);

// Classes are kept canonical: members sorted, classes sorted by smallest member.
class Partition {
 public:
  Partition() = default;
  explicit Partition(const std::vector<std::size_t>& labels);
  static Partition from_classes(const std::vector<std::vector<std::size_t>>& classes);
  static Partition singletons(std::size_t n);
  static Partition whole(std::size_t n);

  std::size_t size() const { return class_of_.size(); }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t class_of(std::size_t i) const { return class_of_[i]; }
  const std::vector<std::vector<std::size_t>>& classes() const { return classes_; }
  bool is_ordered() const;
  bool is_trivial() const { return classes_.size() == class_of_.size(); }

  bool operator==(const Partition& o) const { return class_of_ == o.class_of_; }

 private:
  std::vector<std::size_t> class_of_;
  std::vector<std::vector<std::size_t>> classes_;
};

// All partitions of {0..n-1} into intervals. Bit i of the index cuts between i and i+1.
std::vector<Partition> ordered_partitions(std::size_t n);
Partition join(const Partition& a, const Partition& b);

Cloud permute(const Cloud& x, const Perm& s);
std::pair<Cloud, Perm> sort_ascending(const Cloud& x);
Partition partition_of(const Cloud& x, double tol);
Cloud project_class_average(const Cloud& v, const Partition& p);
bool is_refinement(const Partition& fine, const Partition& coarse);

enum class Gauge { Time, Theta };

// Uniform grid with M+1 states; rows of `data` are flattened Clouds.
class Trajectory {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Trajectory() = default;
  Trajectory(Gauge g, double start, double end, std::size_t steps, std::size_t count,
             std::size_t dim);

  Gauge gauge() const { return gauge_; }
  double start() const { return start_; }
  double end() const { return end_; }
  std::size_t steps() const { return m_; }
  double step() const { return (end_ - start_) / static_cast<double>(m_); }
  double time(std::size_t k) const;
  std::size_t count() const { return n_; }
  std::size_t dim() const { return d_; }

  Cloud state(std::size_t k) const;
  void set_state(std::size_t k, const Cloud& x);
  const Matrix& data() const { return x_; }
  Matrix& data() { return x_; }

  const Cloud& source() const { return p_; }
  const Cloud& target() const { return q_; }
  // sync_endpoints copies the first and last state.
  void set_endpoints(Cloud p, Cloud q);
  void sync_endpoints() { set_endpoints(state(0), state(m_)); }
  double endpoint_mismatch() const;

 private:
  Gauge gauge_ = Gauge::Theta;
  double start_ = 0, end_ = 1;
  std::size_t m_ = 1, n_ = 0, d_ = 1;
  Matrix x_;
  Cloud p_, q_;
};

// Piecewise-linear path between two clouds (straight line on the grid).
Trajectory straight_line(Gauge g, double start, double end, std::size_t steps, const Cloud& p,
                         const Cloud& q);

}  // namespace mag
