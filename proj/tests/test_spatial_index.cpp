#include <algorithm>
#include <cmath>
#include <vector>

#include "alsc/cloud.hpp"
#include "alsc/random.hpp"
#include "alsc/spatial_index.hpp"
#include "doctest.h"

using namespace alsc;

namespace {

PointCloud random_cloud(Rng& rng, int n, double extent, double zspan) {
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    PointRecord r;
    r.x = uniform_real(rng, 0, extent);
    r.y = uniform_real(rng, 0, extent);
    r.z = uniform_real(rng, 0, zspan);
    c.add_record(r);
  }
  return c;
}

std::vector<int> brute_cylinder(const PointCloud& c, const Vec3& q, double r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 p = c.point(i);
    const double dx = p.x - q.x, dy = p.y - q.y;
    if (dx * dx + dy * dy <= r * r) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> brute_sphere(const PointCloud& c, const Vec3& q, double r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 p = c.point(i) - q;
    if (p.dot(p) <= r * r) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> brute_knn(const PointCloud& c, const Vec3& q, int k) {
  std::vector<std::pair<double, int>> d;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 p = c.point(i) - q;
    d.emplace_back(p.dot(p), static_cast<int>(i));
  }
  std::sort(d.begin(), d.end());
  std::vector<int> out;
  for (int i = 0; i < k && i < static_cast<int>(d.size()); ++i) {
    out.push_back(d[i].second);
  }
  return out;
}

}  // namespace

TEST_SUITE("spatial-index") {

TEST_CASE("range queries match an exhaustive scan") {
  Rng rng(100);
  for (int rep = 0; rep < 8; ++rep) {
    const PointCloud c = random_cloud(rng, 800, 40.0, 12.0);
    const SpatialIndex index(c);
    for (int q = 0; q < 20; ++q) {
      const Vec3 center{uniform_real(rng, -2, 42), uniform_real(rng, -2, 42),
                        uniform_real(rng, 0, 12)};
      for (double radius : {1.0, 2.5, 6.0}) {
        CHECK(index.query_cylinder(center, radius) ==
              brute_cylinder(c, center, radius));
        CHECK(index.query_sphere(center, radius) ==
              brute_sphere(c, center, radius));
        CHECK(index.count_cylinder(center, radius) ==
              brute_cylinder(c, center, radius).size());
        CHECK(index.count_sphere(center, radius) ==
              brute_sphere(c, center, radius).size());
      }
    }
  }
}

TEST_CASE("nearest-neighbor queries match an exhaustive scan") {
  Rng rng(200);
  const PointCloud c = random_cloud(rng, 600, 30.0, 8.0);
  const SpatialIndex index(c);
  for (int q = 0; q < 40; ++q) {
    const Vec3 center{uniform_real(rng, 0, 30), uniform_real(rng, 0, 30),
                      uniform_real(rng, 0, 8)};
    for (int k : {1, 2, 7, 25, 600}) {
      CHECK(index.query_knn(center, k) == brute_knn(c, center, k));
    }
    // k beyond the cloud size returns everything.
    CHECK(index.query_knn(center, 10000).size() == c.size());
  }
}

TEST_CASE("results are independent of the grid cell size") {
  Rng rng(300);
  const PointCloud c = random_cloud(rng, 500, 25.0, 5.0);
  const SpatialIndex fine(c, 0.4);
  const SpatialIndex base(c, 2.0);
  const SpatialIndex coarse(c, 50.0);
  for (int q = 0; q < 25; ++q) {
    const Vec3 center{uniform_real(rng, 0, 25), uniform_real(rng, 0, 25),
                      uniform_real(rng, 0, 5)};
    CHECK(fine.query_cylinder(center, 3.0) == base.query_cylinder(center, 3.0));
    CHECK(coarse.query_cylinder(center, 3.0) ==
          base.query_cylinder(center, 3.0));
    CHECK(fine.query_sphere(center, 3.0) == base.query_sphere(center, 3.0));
    CHECK(fine.query_knn(center, 9) == base.query_knn(center, 9));
    CHECK(coarse.query_knn(center, 9) == base.query_knn(center, 9));
  }
}

TEST_CASE("boundary points are inclusive") {
  PointCloud c;
  for (double x : {0.0, 1.0, 2.0, 3.0}) {
    PointRecord r;
    r.x = x;
    c.add_record(r);
  }
  const SpatialIndex index(c);
  // Distance exactly equal to the radius is inside.
  CHECK(index.query_cylinder({0, 0, 0}, 2.0) == std::vector<int>{0, 1, 2});
  CHECK(index.query_sphere({0, 0, 0}, 3.0) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("ids come back sorted ascending") {
  Rng rng(400);
  const PointCloud c = random_cloud(rng, 300, 10.0, 2.0);
  const SpatialIndex index(c);
  const auto ids = index.query_cylinder({5, 5, 0}, 4.0);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  const auto s = index.query_sphere({5, 5, 1}, 4.0);
  CHECK(std::is_sorted(s.begin(), s.end()));
}

TEST_CASE("invalid arguments are rejected") {
  PointCloud c;
  c.add_record(PointRecord{});
  const SpatialIndex index(c);
  CHECK_THROWS_AS(index.query_cylinder({0, 0, 0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(index.query_sphere({0, 0, 0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(index.query_knn({0, 0, 0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(SpatialIndex(c, 0.0), std::invalid_argument);
  PointCloud empty;
  CHECK_THROWS_AS(SpatialIndex(empty).query_knn({0, 0, 0}, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE
