#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "mag/min_norm_point.hpp"

using namespace mag;

TEST_CASE("min norm point basics") {
  Cloud p = min_norm_point({Cloud::line({0, 1}), Cloud::line({1, 0})});
  CHECK(max_abs_diff(p, Cloud::line({0.5, 0.5})) < 1e-14);
  Cloud v = Cloud::line({3, -4});
  CHECK(max_abs_diff(min_norm_point({v}), v) == 0);
  CHECK_THROWS_AS(min_norm_point({}), ValidationError);
  // the origin inside the hull
  Cloud z = min_norm_point({Cloud::line({1, 0}), Cloud::line({-1, 1}), Cloud::line({-1, -1})});
  CHECK(z.norm() < 1e-14);
  // duplicate and interior vertices
  Cloud q = min_norm_point({Cloud::line({2, 2}), Cloud::line({2, 2}), Cloud::line({3, 3}), Cloud::line({2, 4})});
  CHECK(max_abs_diff(q, Cloud::line({2, 2})) < 1e-14);
}

TEST_CASE("min norm point matches the simplex QP oracle") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 150; ++it) {
    std::size_t n = testing_support::pick(rng, 1, 5), d = testing_support::pick(rng, 1, 3);
    std::size_t k = testing_support::pick(rng, 1, 10);
    std::vector<Cloud> verts;
    std::vector<Eigen::VectorXd> flat;
    Cloud shift = testing_support::random_cloud(rng, n, d, 1.0);
    for (std::size_t j = 0; j < k; ++j) {
      verts.push_back(testing_support::random_cloud(rng, n, d, 1.0) + shift);
      flat.push_back(verts.back().flat());
    }
    Cloud p = min_norm_point(verts);
    Eigen::VectorXd ref = oracle::qp_min_norm(flat, 20000);
    CHECK((p.flat() - ref).norm() <= 1e-8);
    // optimality: <p, v - p> >= 0 for every vertex
    for (auto& v : verts) CHECK(p.dot(v - p) >= -1e-12);
  }
}
