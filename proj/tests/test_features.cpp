#include <algorithm>
#include <cmath>
#include <vector>

#include "alsc/cloud.hpp"
#include "alsc/features.hpp"
#include "alsc/random.hpp"
#include "alsc/spatial_index.hpp"
#include "doctest.h"

using namespace alsc;

namespace {

// Independent cyclic-Jacobi eigensolver used only as a test oracle.
void jacobi_oracle(const double packed[6], double lambda[3], Vec3 vec[3]) {
  double a[3][3] = {{packed[0], packed[1], packed[2]},
                    {packed[1], packed[3], packed[4]},
                    {packed[2], packed[4], packed[5]}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-300) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  int order[3] = {0, 1, 2};
  std::sort(order, order + 3,
            [&](int x, int y) { return a[x][x] > a[y][y]; });
  for (int i = 0; i < 3; ++i) {
    lambda[i] = a[order[i]][order[i]];
    vec[i] = Vec3{v[0][order[i]], v[1][order[i]], v[2][order[i]]};
  }
}

double residual_norm(const double p[6], double l, const Vec3& e) {
  const Vec3 r{p[0] * e.x + p[1] * e.y + p[2] * e.z - l * e.x,
               p[1] * e.x + p[3] * e.y + p[4] * e.z - l * e.y,
               p[2] * e.x + p[4] * e.y + p[5] * e.z - l * e.z};
  return r.norm();
}

std::vector<Vec3> random_neighborhood(Rng& rng, int n, double spread_z) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({uniform_real(rng, -3, 3), uniform_real(rng, -3, 3),
                   normal(rng, 0.0, spread_z)});
  }
  return pts;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("structure tensor matches a direct recomputation") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 30));
    const auto pts = random_neighborhood(rng, n, 1.0);
    const StructureTensor t = structure_tensor(pts);
    Vec3 mean{0, 0, 0};
    for (const Vec3& p : pts) mean = mean + p;
    mean = mean * (1.0 / n);
    double oracle[6] = {0, 0, 0, 0, 0, 0};
    for (const Vec3& p : pts) {
      const Vec3 d = p - mean;
      oracle[0] += d.x * d.x;
      oracle[1] += d.x * d.y;
      oracle[2] += d.x * d.z;
      oracle[3] += d.y * d.y;
      oracle[4] += d.y * d.z;
      oracle[5] += d.z * d.z;
    }
    for (double& v : oracle) v /= (n - 1);
    for (int i = 0; i < 6; ++i) {
      CHECK(t.m[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
    CHECK(t.count == n);
    CHECK(t.centroid.x == doctest::Approx(mean.x).epsilon(1e-12));
  }
  // A single point yields the zero tensor.
  const std::vector<Vec3> one = {{1, 2, 3}};
  const StructureTensor t1 = structure_tensor(one);
  for (double v : t1.m) CHECK(v == 0.0);
}

TEST_CASE("eigen solve: residual, characteristic cubic and Jacobi oracle") {
  Rng rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const auto pts = random_neighborhood(
        rng, 3 + static_cast<int>(uniform_index(rng, 40)),
        uniform_real(rng, 1e-4, 2.0));
    const StructureTensor t = structure_tensor(pts);
    const EigenTriple e = eigen_symmetric3(t);
    CHECK(e.l1 >= e.l2);
    CHECK(e.l2 >= e.l3);
    CHECK(e.l3 >= 0.0);
    // Eigenpair residuals.
    const double scale = std::max(1.0, t.trace());
    CHECK(residual_norm(t.m, e.l1, e.e1) <= 1e-9 * scale);
    CHECK(residual_norm(t.m, e.l2, e.e2) <= 1e-9 * scale);
    CHECK(residual_norm(t.m, e.l3, e.e3) <= 1e-9 * scale);
    // Orthonormal basis.
    CHECK(std::abs(e.e1.dot(e.e2)) < 1e-9);
    CHECK(std::abs(e.e1.dot(e.e3)) < 1e-9);
    CHECK(std::abs(e.e1.norm() - 1.0) < 1e-12);
    // Roots of the characteristic cubic.
    const double c2 = -(t.m[0] + t.m[3] + t.m[5]);
    const double c1 = t.m[0] * t.m[3] + t.m[0] * t.m[5] + t.m[3] * t.m[5] -
                      t.m[1] * t.m[1] - t.m[2] * t.m[2] - t.m[4] * t.m[4];
    const double c0 = -(t.m[0] * (t.m[3] * t.m[5] - t.m[4] * t.m[4]) -
                        t.m[1] * (t.m[1] * t.m[5] - t.m[4] * t.m[2]) +
                        t.m[2] * (t.m[1] * t.m[4] - t.m[3] * t.m[2]));
    for (double l : {e.l1, e.l2, e.l3}) {
      const double p = ((l + c2) * l + c1) * l + c0;
      CHECK(std::abs(p) <= 1e-8 * std::max(1.0, scale * scale * scale));
    }
    // Eigenvalues agree with the independent Jacobi oracle.
    double jl[3];
    Vec3 jv[3];
    jacobi_oracle(t.m, jl, jv);
    CHECK(e.l1 == doctest::Approx(jl[0]).epsilon(1e-9).scale(scale));
    CHECK(e.l2 == doctest::Approx(jl[1]).epsilon(1e-9).scale(scale));
    CHECK(e.l3 == doctest::Approx(jl[2]).epsilon(1e-9).scale(scale));
  }
}

TEST_CASE("eigenvector sign convention: largest component positive") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto pts = random_neighborhood(rng, 20, 0.5);
    const EigenTriple e = eigen_symmetric3(structure_tensor(pts));
    for (const Vec3& v : {e.e1, e.e2, e.e3}) {
      double biggest = v.x;
      if (std::abs(v.y) > std::abs(biggest)) biggest = v.y;
      if (std::abs(v.z) > std::abs(biggest)) biggest = v.z;
      CHECK(biggest > 0.0);
    }
  }
}

TEST_CASE("shape scores match their closed forms") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto pts = random_neighborhood(rng, 25, 0.7);
    const EigenTriple e = eigen_symmetric3(structure_tensor(pts));
    const TensorFeatures f = tensor_features(e);
    CHECK(f.linearity == doctest::Approx((e.l1 - e.l2) / e.l1).epsilon(1e-12));
    CHECK(f.planarity == doctest::Approx((e.l2 - e.l3) / e.l1).epsilon(1e-12));
    CHECK(f.omnivariance ==
          doctest::Approx(std::cbrt(e.l1 * e.l2 * e.l3)).epsilon(1e-12));
    CHECK(f.normal_sigma == doctest::Approx(std::sqrt(e.l3)).epsilon(1e-12));
    CHECK(f.normal_z >= 0.0);
    const double norm = std::sqrt(f.normal_x * f.normal_x +
                                  f.normal_y * f.normal_y +
                                  f.normal_z * f.normal_z);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Degenerate: all eigenvalues zero.
  const double zero[6] = {0, 0, 0, 0, 0, 0};
  const TensorFeatures fz = tensor_features(eigen_symmetric3(zero));
  CHECK_FALSE(fz.shape_valid);
}

TEST_CASE("noiseless planes recover their normal to 1e-6 degrees") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    // Random plane normal with a clear upward component.
    Vec3 n{normal(rng), normal(rng), std::abs(normal(rng)) + 0.7};
    n = n.normalized();
    // Orthogonal in-plane axes.
    const Vec3 u = n.cross(Vec3{1, 0, 0}).norm() > 0.1
                       ? n.cross(Vec3{1, 0, 0}).normalized()
                       : n.cross(Vec3{0, 1, 0}).normalized();
    const Vec3 v = n.cross(u).normalized();
    std::vector<Vec3> pts;
    for (int i = 0; i < 60; ++i) {
      const double a = uniform_real(rng, -2, 2), b = uniform_real(rng, -2, 2);
      pts.push_back(u * a + v * b);
    }
    const TensorFeatures f = tensor_features(eigen_symmetric3(structure_tensor(pts)));
    const Vec3 got{f.normal_x, f.normal_y, f.normal_z};
    const double cosang = std::clamp(std::abs(got.dot(n)), -1.0, 1.0);
    const double deg = std::acos(cosang) * 180.0 / M_PI;
    CHECK(deg <= 1e-6);
  }
}

TEST_CASE("noisy planes recover their normal to a few degrees") {
  Rng rng(6);
  // 6 points/m^2 in a 2 m radius disk, z-noise sigma 0.02 m.
  const double radius = 2.0;
  const int n = static_cast<int>(M_PI * radius * radius * 6.0);
  for (int rep = 0; rep < 30; ++rep) {
    Vec3 pn{normal(rng, 0.0, 0.1), normal(rng, 0.0, 0.1), 1.0};
    pn = pn.normalized();
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
      const double rr = radius * std::sqrt(uniform01(rng));
      const double a = uniform_real(rng, 0, 2 * M_PI);
      const double x = rr * std::cos(a), y = rr * std::sin(a);
      // Plane z from nx*x + ny*y + nz*z = 0, plus vertical noise.
      const double z = -(pn.x * x + pn.y * y) / pn.z + normal(rng, 0.0, 0.02);
      pts.push_back({x, y, z});
    }
    const TensorFeatures f = tensor_features(eigen_symmetric3(structure_tensor(pts)));
    const Vec3 got{f.normal_x, f.normal_y, f.normal_z};
    const double deg =
        std::acos(std::clamp(std::abs(got.dot(pn)), -1.0, 1.0)) * 180.0 / M_PI;
    CHECK(deg <= 5.0);
  }
}

TEST_CASE("height features: range, tie-averaged rank, normalized height") {
  const std::vector<double> zs1 = {1.0, 2.0, 3.0};
  HeightFeatures f = height_features(zs1, 2.0);
  CHECK(f.z_range == 2.0);
  CHECK(f.z_rank == 2.0);
  CHECK(f.normalized_z == doctest::Approx(1.0));  // (2-1)/(3-1)*2

  // Tied ranks average: ranks of the three 2.0s are 2,3,4 -> 3.
  const std::vector<double> zs2 = {1.0, 2.0, 2.0, 2.0, 5.0};
  f = height_features(zs2, 2.0);
  CHECK(f.z_rank == 3.0);
  CHECK(f.z_range == 4.0);
  CHECK(f.normalized_z == doctest::Approx((3.0 - 1.0) / 4.0 * 4.0));

  // Highest and lowest point.
  f = height_features(zs2, 5.0);
  CHECK(f.z_rank == 5.0);
  CHECK(f.normalized_z == doctest::Approx(4.0));
  f = height_features(zs2, 1.0);
  CHECK(f.z_rank == 1.0);
  CHECK(f.normalized_z == 0.0);

  // Single-point neighborhood.
  const std::vector<double> zs3 = {7.0};
  f = height_features(zs3, 7.0);
  CHECK(f.z_range == 0.0);
  CHECK(f.z_rank == 1.0);
  CHECK(f.normalized_z == 0.0);

  CHECK_THROWS_AS(height_features(std::vector<double>{}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("distance features match an independent recomputation") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 25));
    const auto pts = random_neighborhood(rng, n, 1.0);
    const double radius = uniform_real(rng, 0.5, 6.0);
    const DistanceFeatures f = distance_features(pts, radius);
    CHECK(f.point_density ==
          doctest::Approx(n / (M_PI * radius * radius)).epsilon(1e-12));
    REQUIRE(f.point_distance_valid);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = 1e300;
      for (int j = 0; j < n; ++j) {
        if (i != j) best = std::min(best, (pts[i] - pts[j]).norm());
      }
      sum += best;
    }
    CHECK(f.point_distance == doctest::Approx(sum / n).epsilon(1e-12));
  }
  const std::vector<Vec3> single = {{0, 0, 0}};
  CHECK_FALSE(distance_features(single, 1.0).point_distance_valid);
  CHECK_THROWS_AS(distance_features(single, 0.0), std::invalid_argument);
}

TEST_CASE("echo ratio: 1 on a flat plane, decreasing with vertical spread") {
  // Dense flat grid: every cylinder neighbor is also a sphere neighbor.
  PointCloud flat;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      PointRecord r;
      r.x = i * 0.5;
      r.y = j * 0.5;
      r.z = 0.0;
      flat.add_record(r);
    }
  }
  const SpatialIndex flat_index(flat);
  CHECK(echo_ratio(flat_index, {5.0, 5.0, 0.0}, 2.0) == 1.0);

  // Growing vertical spread pushes the ratio down.
  Rng rng(8);
  double last = 1.1;
  for (double spread : {0.5, 3.0, 8.0, 20.0}) {
    PointCloud c;
    Rng local(42);  // same horizontal layout each time
    for (int i = 0; i < 2000; ++i) {
      PointRecord r;
      r.x = uniform_real(local, 0, 20);
      r.y = uniform_real(local, 0, 20);
      r.z = uniform_real(local, 0, 1.0) * spread;
      c.add_record(r);
    }
    const SpatialIndex index(c);
    double mean = 0.0;
    for (int q = 0; q < 50; ++q) {
      const std::size_t i = uniform_index(rng, c.size());
      mean += echo_ratio(index, c.point(i), 2.0);
    }
    mean /= 50.0;
    CHECK(mean < last);
    last = mean;
  }
}

TEST_CASE("scan angle matches the closed form on random beams") {
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const double vx = normal(rng, 0.0, 0.3);
    const double vy = normal(rng, 0.0, 0.3);
    const double vz = -std::abs(normal(rng, 1.0, 0.2)) - 0.05;
    const double got = scan_angle_deg(vx, vy, vz);
    const double norm = std::sqrt(vx * vx + vy * vy + vz * vz);
    const double oracle = std::acos(std::abs(vz) / norm) * 180.0 / M_PI;
    CHECK(got == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(got >= 0.0);
    CHECK(got < 90.0);
  }
  CHECK(scan_angle_deg(0.0, 0.0, -1.0) == 0.0);
  CHECK_THROWS_AS(scan_angle_deg(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("feature table agrees with per-point oracles") {
  Rng rng(10);
  PointCloud c;
  for (int col = 0; col < kNumColumns; ++col) c.declare(static_cast<Column>(col));
  for (int i = 0; i < 400; ++i) {
    PointRecord r;
    r.x = uniform_real(rng, 0, 20);
    r.y = uniform_real(rng, 0, 20);
    r.z = uniform_real(rng, 0, 4);
    r.echo_id = 1;
    r.echo_count = 1;
    r.amplitude = uniform_real(rng, 20, 150);
    r.echo_width = 4.0;
    r.reflectance = 0.4;
    r.vx = 0.1;
    r.vy = -0.05;
    r.vz = -1.0;
    r.class_code = 2;
    c.add_record(r);
  }
  const SpatialIndex index(c);
  const double radius = 2.0;
  const FeatureMatrix fm =
      feature_table(c, index, uniform_specs(radius), BorderMode::Both, 1);
  REQUIRE(fm.rows == c.size());

  const int c_zrange = fm.col_index("ZRange");
  const int c_pdist = fm.col_index("PointDistance");
  const int c_pden = fm.col_index("PointDensity");
  const int c_er = fm.col_index("EchoRatio");
  const int c_angle = fm.col_index("ScanAngle");
  REQUIRE(c_zrange >= 0);
  REQUIRE(c_pdist >= 0);
  REQUIRE(c_angle >= 0);

  for (std::size_t i = 0; i < c.size(); i += 13) {
    const Vec3 p = c.point(i);
    const auto ids = index.query_cylinder(p, radius);
    // ZRange.
    double zmin = 1e300, zmax = -1e300;
    for (int id : ids) {
      zmin = std::min(zmin, c.point(id).z);
      zmax = std::max(zmax, c.point(id).z);
    }
    CHECK(fm.at(i, c_zrange) == doctest::Approx(zmax - zmin).epsilon(1e-12));
    // PointDensity.
    CHECK(fm.at(i, c_pden) ==
          doctest::Approx(ids.size() / (M_PI * radius * radius))
              .epsilon(1e-12));
    // PointDistance via full pairwise scan.
    if (ids.size() >= 2) {
      double sum = 0.0;
      for (int id : ids) {
        double best = 1e300;
        for (int other : ids) {
          if (other != id) {
            best = std::min(best, (c.point(id) - c.point(other)).norm());
          }
        }
        sum += std::sqrt(best * best);
      }
      CHECK(fm.at(i, c_pdist) ==
            doctest::Approx(sum / ids.size()).epsilon(1e-12));
    }
    // EchoRatio.
    CHECK(fm.at(i, c_er) ==
          doctest::Approx(echo_ratio(index, p, radius)).epsilon(1e-12));
    // ScanAngle.
    CHECK(fm.at(i, c_angle) ==
          doctest::Approx(scan_angle_deg(0.1, -0.05, -1.0)).epsilon(1e-12));
  }
}

TEST_CASE("feature table is invariant to the thread count") {
  Rng rng(11);
  PointCloud c;
  c.declare(Column::Amplitude);
  for (int i = 0; i < 3000; ++i) {
    PointRecord r;
    r.x = uniform_real(rng, 0, 30);
    r.y = uniform_real(rng, 0, 30);
    r.z = uniform_real(rng, 0, 5);
    r.amplitude = uniform_real(rng, 0, 100);
    c.add_record(r);
  }
  const SpatialIndex index(c);
  const FeatureMatrix a =
      feature_table(c, index, uniform_specs(2.0), BorderMode::None, 1);
  const FeatureMatrix b =
      feature_table(c, index, uniform_specs(2.0), BorderMode::None, 4);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (std::isnan(a.values[i])) {
      CHECK(std::isnan(b.values[i]));
    } else {
      CHECK(a.values[i] == b.values[i]);
    }
  }
  CHECK(a.causes == b.causes);
}

TEST_CASE("degenerate neighborhoods carry a cause, not a crash") {
  PointCloud c;
  // Two far-apart points: tensor features need 3 neighbors.
  for (double x : {0.0, 100.0, 100.5}) {
    PointRecord r;
    r.x = x;
    c.add_record(r);
  }
  const SpatialIndex index(c);
  const FeatureMatrix fm =
      feature_table(c, index, uniform_specs(2.0), BorderMode::None, 1);
  const int lin = fm.col_index("Linearity");
  const int pdist = fm.col_index("PointDistance");
  CHECK(fm.cause_at(0, lin) == Cause::DegenerateNeighborhood);
  CHECK(std::isnan(fm.at(0, lin)));
  CHECK(fm.cause_at(0, pdist) == Cause::DegenerateNeighborhood);
  // The near pair has a PointDistance but still no tensor shape.
  CHECK(fm.cause_at(1, pdist) == Cause::Valid);
  CHECK(fm.at(1, pdist) == doctest::Approx(0.5));
  CHECK(fm.invalid_count() > 0);
}

TEST_CASE("missing attributes pass through as missing with a cause") {
  PointCloud c;
  c.declare(Column::Amplitude);
  for (int i = 0; i < 5; ++i) {
    PointRecord r;
    r.x = i * 0.5;
    if (i != 2) r.amplitude = 10.0 * i;
    c.add_record(r);
  }
  const SpatialIndex index(c);
  const FeatureMatrix fm =
      feature_table(c, index, uniform_specs(2.0), BorderMode::None, 1);
  const int amp = fm.col_index("amplitude");
  REQUIRE(amp >= 0);
  CHECK(fm.cause_at(2, amp) == Cause::MissingInput);
  CHECK(std::isnan(fm.at(2, amp)));
  CHECK(fm.at(1, amp) == 10.0);
}

TEST_CASE("border modes demand beam columns by name") {
  PointCloud c;
  c.add_record(PointRecord{});
  const SpatialIndex index(c);
  for (BorderMode mode : {BorderMode::Beam, BorderMode::Angle, BorderMode::Both}) {
    try {
      feature_table(c, index, uniform_specs(2.0), mode, 1);
      FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("vx") != std::string::npos);
      CHECK(msg.find("vz") != std::string::npos);
    }
  }
  // Mode "none" needs no beam columns.
  CHECK_NOTHROW(feature_table(c, index, uniform_specs(2.0), BorderMode::None, 1));
}

TEST_CASE("border mode names round-trip") {
  for (BorderMode m : {BorderMode::None, BorderMode::Beam, BorderMode::Angle,
                       BorderMode::Both}) {
    CHECK(border_mode_from_name(border_mode_name(m)) == m);
  }
  CHECK_THROWS_AS(border_mode_from_name("sideways"), std::invalid_argument);
}

TEST_CASE("feature matrices round-trip through text and binary") {
  Rng rng(12);
  PointCloud c;
  c.declare(Column::Amplitude);
  for (int i = 0; i < 200; ++i) {
    PointRecord r;
    r.x = uniform_real(rng, 0, 15);
    r.y = uniform_real(rng, 0, 15);
    r.z = uniform_real(rng, 0, 2);
    if (i % 9 != 0) r.amplitude = uniform_real(rng, 0, 100);
    c.add_record(r);
  }
  const SpatialIndex index(c);
  const FeatureMatrix fm =
      feature_table(c, index, uniform_specs(1.5), BorderMode::None, 1);

  for (const char* path : {"/tmp/alsc_test_features.txt",
                           "/tmp/alsc_test_features.alsf"}) {
    const bool binary = std::string(path).ends_with(".alsf");
    if (binary) {
      write_features_binary(fm, path);
    } else {
      write_features_text(fm, path);
    }
    const FeatureMatrix back = read_features(path);
    REQUIRE(back.rows == fm.rows);
    REQUIRE(back.columns == fm.columns);
    REQUIRE(back.specs.size() == fm.specs.size());
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
      if (std::isnan(fm.values[i])) {
        CHECK(std::isnan(back.values[i]));
      } else {
        CHECK(back.values[i] == fm.values[i]);
      }
    }
    if (binary) CHECK(back.causes == fm.causes);
  }
}

}  // TEST_SUITE
