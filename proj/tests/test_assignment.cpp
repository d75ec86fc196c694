#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "mag/potential.hpp"

using namespace mag;

TEST_CASE("assignment on small fixed inputs") {
  Lattice a = Lattice::line({0, 1, 2});
  Assignment r = optimal_assignment(Cloud::line({2.5, 0.1, 1.0}), a);
  CHECK(r.perm == Perm::from_one_based({3, 1, 2}));
  Assignment id = optimal_assignment(a.points(), a);
  CHECK(id.perm == Perm::identity(3));
  CHECK(id.cost == 0);
  Lattice one = Lattice::line({4.0});
  CHECK(optimal_assignment(Cloud::line({-7}), one).perm == Perm::identity(1));
}

TEST_CASE("assignment ties pick the lexicographically smallest permutation") {
  Lattice a = Lattice::line({0, 1});
  CHECK(optimal_assignment(Cloud::line({0.3, 0.3}), a).perm == Perm::identity(2));
  Lattice a3 = Lattice::line({0, 1, 2});
  CHECK(optimal_assignment(Cloud::line({5, 5, 5}), a3).perm == Perm::identity(3));
  CHECK(optimal_assignment(Cloud::line({5, 1, 1}), a3).perm == Perm::from_one_based({3, 1, 2}));
  for (auto& x : {Cloud::line({0, 0, 0}), Cloud::line({2, 2, -1}), Cloud::line({1, -1, 1})}) {
    auto b = oracle::brute_force_assignment(x, a3);
    CHECK(optimal_assignment(x, a3).perm == b.perm);
  }
}

TEST_CASE("assignment matches brute force") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 200; ++it) {
    std::size_t n = testing_support::pick(rng, 1, 7), d = testing_support::pick(rng, 1, 3);
    Lattice a(testing_support::random_cloud(rng, n, d, 2.0));
    Cloud x = testing_support::random_cloud(rng, n, d, 3.0);
    auto b = oracle::brute_force_assignment(x, a);
    Assignment r = optimal_assignment(x, a);
    CHECK(r.cost == b.cost);
    CHECK(r.perm == b.perm);
  }
}

TEST_CASE("f_max") {
  Lattice a = Lattice::line({0, 1});
  CHECK(f_max(Cloud::line({3, 5}), a) == 5);
  CHECK(f_max(Cloud::line({0, 0}), a) == 0);
  std::mt19937_64 rng(22);
  Lattice a4 = testing_support::random_ordered_lattice(rng, 4);
  for (int it = 0; it < 20; ++it) {
    Cloud x = testing_support::random_cloud(rng, 4, 1, 2);
    double f = f_max(x, a4);
    CHECK(f == doctest::Approx(oracle::brute_force_fmax(x, a4)).epsilon(1e-14));
    for (auto& s : all_permutations(4)) CHECK(f_max(permute(x, s), a4) == doctest::Approx(f).epsilon(1e-14));
  }
  // no N! enumeration: large N works
  std::vector<double> big(60);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<double>(i);
  Lattice ab = Lattice::line(big);
  Cloud xb = testing_support::random_cloud(rng, 60, 1, 10);
  auto [xs, s] = sort_ascending(xb);
  double expect = 0;
  for (std::size_t i = 0; i < 60; ++i) expect += xs[i] * big[i];
  CHECK(f_max(xb, ab) == doctest::Approx(expect).epsilon(1e-13));
}
