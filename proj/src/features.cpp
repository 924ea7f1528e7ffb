#include "alsc/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace alsc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Structure tensor

StructureTensor structure_tensor(std::span<const Vec3> neighbors) {
  if (neighbors.empty()) {
    throw std::invalid_argument("structure_tensor: empty neighbor list");
  }
  StructureTensor t;
  t.count = static_cast<int>(neighbors.size());
  Vec3 sum;
  for (const Vec3& p : neighbors) sum = sum + p;
  t.centroid = sum * (1.0 / t.count);
  if (t.count == 1) return t;
  const double inv_k = 1.0 / (t.count - 1);
  for (const Vec3& p : neighbors) {
    const Vec3 d = p - t.centroid;
    t.m[0] += d.x * d.x;
    t.m[1] += d.x * d.y;
    t.m[2] += d.x * d.z;
    t.m[3] += d.y * d.y;
    t.m[4] += d.y * d.z;
    t.m[5] += d.z * d.z;
  }
  for (double& v : t.m) v *= inv_k;
  return t;
}

// ---------------------------------------------------------------------------
// Symmetric 3x3 eigen solver

namespace {

struct Mat3 {
  double a[3][3];
};

Mat3 unpack(const double m[6]) {
  return Mat3{{{m[0], m[1], m[2]}, {m[1], m[3], m[4]}, {m[2], m[4], m[5]}}};
}

Vec3 mat_mul(const Mat3& m, const Vec3& v) {
  return {m.a[0][0] * v.x + m.a[0][1] * v.y + m.a[0][2] * v.z,
          m.a[1][0] * v.x + m.a[1][1] * v.y + m.a[1][2] * v.z,
          m.a[2][0] * v.x + m.a[2][1] * v.y + m.a[2][2] * v.z};
}

double residual(const Mat3& m, double lambda, const Vec3& v) {
  const Vec3 r = mat_mul(m, v) - v * lambda;
  return r.norm();
}

// Cyclic Jacobi with rotation accumulation; robust fallback path.
void jacobi_eigen(const Mat3& in, double lambda[3], Vec3 vec[3]) {
  double a[3][3];
  std::memcpy(a, in.a, sizeof(a));
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
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
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    lambda[i] = a[i][i];
    vec[i] = Vec3{v[0][i], v[1][i], v[2][i]};
  }
}

// Analytic eigenvalues (trigonometric form), descending.
void analytic_eigenvalues(const Mat3& m, double lambda[3]) {
  const double p1 = m.a[0][1] * m.a[0][1] + m.a[0][2] * m.a[0][2] +
                    m.a[1][2] * m.a[1][2];
  if (p1 == 0.0) {
    lambda[0] = m.a[0][0];
    lambda[1] = m.a[1][1];
    lambda[2] = m.a[2][2];
    std::sort(lambda, lambda + 3, std::greater<double>());
    return;
  }
  const double q = (m.a[0][0] + m.a[1][1] + m.a[2][2]) / 3.0;
  const double p2 = (m.a[0][0] - q) * (m.a[0][0] - q) +
                    (m.a[1][1] - q) * (m.a[1][1] - q) +
                    (m.a[2][2] - q) * (m.a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat3 b;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      b.a[i][j] = (m.a[i][j] - (i == j ? q : 0.0)) / p;
    }
  }
  const double det =
      b.a[0][0] * (b.a[1][1] * b.a[2][2] - b.a[1][2] * b.a[2][1]) -
      b.a[0][1] * (b.a[1][0] * b.a[2][2] - b.a[1][2] * b.a[2][0]) +
      b.a[0][2] * (b.a[1][0] * b.a[2][1] - b.a[1][1] * b.a[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  lambda[0] = q + 2.0 * p * std::cos(phi);
  lambda[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  lambda[1] = 3.0 * q - lambda[0] - lambda[2];
}

// Eigenvector of m for eigenvalue lambda via row cross products. Returns
// false when the eigenvalue is (nearly) repeated and no direction stands out.
bool cross_eigenvector(const Mat3& m, double lambda, Vec3& out) {
  const Vec3 r0{m.a[0][0] - lambda, m.a[0][1], m.a[0][2]};
  const Vec3 r1{m.a[1][0], m.a[1][1] - lambda, m.a[1][2]};
  const Vec3 r2{m.a[2][0], m.a[2][1], m.a[2][2] - lambda};
  const Vec3 c01 = r0.cross(r1);
  const Vec3 c02 = r0.cross(r2);
  const Vec3 c12 = r1.cross(r2);
  const double n01 = c01.norm2(), n02 = c02.norm2(), n12 = c12.norm2();
  const Vec3* best = &c01;
  double bestn = n01;
  if (n02 > bestn) {
    best = &c02;
    bestn = n02;
  }
  if (n12 > bestn) {
    best = &c12;
    bestn = n12;
  }
  const double row_scale = std::max({r0.norm2(), r1.norm2(), r2.norm2(), 1e-300});
  if (bestn <= 1e-24 * row_scale * row_scale) return false;
  out = best->normalized();
  return true;
}

Vec3 apply_sign_convention(Vec3 v) {
  double m = v.x;
  if (std::abs(v.y) > std::abs(m)) m = v.y;
  if (std::abs(v.z) > std::abs(m)) m = v.z;
  return (m < 0.0) ? v * -1.0 : v;
}

}  // namespace

EigenTriple eigen_symmetric3(const double packed[6]) {
  EigenTriple out;
  const Mat3 m = unpack(packed);
  double scale = 0.0;
  for (int i = 0; i < 6; ++i) scale = std::max(scale, std::abs(packed[i]));
  if (scale == 0.0) {
    out.e1 = {1, 0, 0};
    out.e2 = {0, 1, 0};
    out.e3 = {0, 0, 1};
    return out;
  }

  double lambda[3];
  Vec3 vec[3];
  analytic_eigenvalues(m, lambda);

  bool ok = cross_eigenvector(m, lambda[0], vec[0]) &&
            cross_eigenvector(m, lambda[2], vec[2]);
  if (ok) {
    vec[1] = vec[2].cross(vec[0]).normalized();
    const double tol = 1e-12 * std::max(1.0, scale);
    for (int i = 0; i < 3; ++i) {
      if (residual(m, lambda[i], vec[i]) > tol) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    double jl[3];
    Vec3 jv[3];
    jacobi_eigen(m, jl, jv);
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int a, int b) { return jl[a] > jl[b]; });
    for (int i = 0; i < 3; ++i) {
      lambda[i] = jl[order[i]];
      vec[i] = jv[order[i]];
    }
  }

  // Clamp round-off negatives; the tensor is PSD by construction.
  for (double& l : lambda) {
    if (l < 0.0) l = 0.0;
  }
  out.l1 = lambda[0];
  out.l2 = lambda[1];
  out.l3 = lambda[2];
  out.e1 = apply_sign_convention(vec[0].normalized());
  out.e2 = apply_sign_convention(vec[1].normalized());
  out.e3 = apply_sign_convention(vec[2].normalized());
  return out;
}

EigenTriple eigen_symmetric3(const StructureTensor& t) {
  return eigen_symmetric3(t.m);
}

// ---------------------------------------------------------------------------
// Descriptors

TensorFeatures tensor_features(const EigenTriple& eig) {
  TensorFeatures f;
  Vec3 n = eig.e3;
  if (n.z < 0.0 || (n.z == 0.0 && n.x < 0.0)) n = n * -1.0;
  f.normal_x = n.x;
  f.normal_y = n.y;
  f.normal_z = n.z;
  f.normal_sigma = std::sqrt(std::max(0.0, eig.l3));
  f.omnivariance = std::cbrt(eig.l1 * eig.l2 * eig.l3);
  if (eig.l1 > 0.0) {
    f.linearity = (eig.l1 - eig.l2) / eig.l1;
    f.planarity = (eig.l2 - eig.l3) / eig.l1;
  } else {
    f.shape_valid = false;
  }
  return f;
}

HeightFeatures height_features(std::span<const double> neighbor_z,
                               double query_z) {
  if (neighbor_z.empty()) {
    throw std::invalid_argument("height_features: empty neighborhood");
  }
  HeightFeatures f;
  double zmin = neighbor_z[0], zmax = neighbor_z[0];
  std::size_t below = 0, equal = 0;
  for (double z : neighbor_z) {
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
    if (z < query_z) ++below;
    else if (z == query_z) ++equal;
  }
  const std::size_t n = neighbor_z.size();
  f.z_range = zmax - zmin;
  // 1-based ascending rank, average rank across ties.
  f.z_rank = below + (equal + 1) / 2.0;
  f.normalized_z =
      (n > 1) ? (f.z_rank - 1.0) / (n - 1.0) * f.z_range : 0.0;
  return f;
}

DistanceFeatures distance_features(std::span<const Vec3> neighbors,
                                   double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  DistanceFeatures f;
  const std::size_t n = neighbors.size();
  f.point_density = static_cast<double>(n) / (M_PI * radius * radius);
  if (n < 2) return f;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      best = std::min(best, dist2_xyz(neighbors[i], neighbors[j]));
    }
    sum += std::sqrt(best);
  }
  f.point_distance = sum / n;
  f.point_distance_valid = true;
  return f;
}

double echo_ratio(const SpatialIndex& index, const Vec3& center,
                  double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  const std::size_t cyl = index.count_cylinder(center, radius);
  const std::size_t sph = index.count_sphere(center, radius);
  return static_cast<double>(sph) / static_cast<double>(cyl);
}

double scan_angle_deg(double vx, double vy, double vz) {
  if (vz == 0.0) throw std::invalid_argument("horizontal beam (vz = 0)");
  return std::atan(std::sqrt(vx * vx + vy * vy) / std::abs(vz)) * 180.0 / M_PI;
}

// ---------------------------------------------------------------------------
// Feature table

const std::vector<std::string>& neighborhood_feature_names() {
  static const std::vector<std::string> names = {
      "Linearity",   "Planarity",  "Omnivariance", "NormalX",
      "NormalY",     "NormalZ",    "NormalSigma",  "EchoRatio",
      "ZRange",      "ZRank",      "NormalizedZ",  "PointDensity",
      "PointDistance"};
  return names;
}

std::vector<NeighborhoodSpec> uniform_specs(double radius, Geometry geom) {
  std::vector<NeighborhoodSpec> specs;
  for (const std::string& name : neighborhood_feature_names()) {
    specs.push_back({name, geom, radius});
  }
  return specs;
}

BorderMode border_mode_from_name(const std::string& name) {
  if (name == "none") return BorderMode::None;
  if (name == "beam") return BorderMode::Beam;
  if (name == "angle") return BorderMode::Angle;
  if (name == "both") return BorderMode::Both;
  throw std::invalid_argument("unknown border mode '" + name + "'");
}

const char* border_mode_name(BorderMode m) {
  switch (m) {
    case BorderMode::None: return "none";
    case BorderMode::Beam: return "beam";
    case BorderMode::Angle: return "angle";
    case BorderMode::Both: return "both";
  }
  return "none";
}

void FeatureMatrix::init(std::vector<std::string> cols, std::size_t nrows) {
  columns = std::move(cols);
  rows = nrows;
  values.assign(rows * columns.size(), kNaN);
  causes.assign(rows * columns.size(),
                static_cast<std::uint8_t>(Cause::MissingInput));
}

int FeatureMatrix::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void FeatureMatrix::set(std::size_t row, std::size_t col, double v,
                        Cause cause) {
  values[row * columns.size() + col] = v;
  causes[row * columns.size() + col] = static_cast<std::uint8_t>(cause);
}

std::size_t FeatureMatrix::invalid_count() const {
  std::size_t n = 0;
  for (std::uint8_t c : causes) {
    if (c != static_cast<std::uint8_t>(Cause::Valid)) ++n;
  }
  return n;
}

namespace {

struct SpecKey {
  Geometry geom;
  double size;
  bool operator<(const SpecKey& o) const {
    if (geom != o.geom) return geom < o.geom;
    return size < o.size;
  }
};

// Collinearity threshold for tensor-feature validity (relative to l1).
constexpr double kCollinearTol = 1e-9;

struct Neighborhood {
  std::vector<int> ids;
};

}  // namespace

FeatureMatrix feature_table(const PointCloud& cloud, const SpatialIndex& index,
                            const std::vector<NeighborhoodSpec>& specs,
                            BorderMode border_mode, int n_threads) {
  // Check coverage of the 13 required features.
  std::map<std::string, NeighborhoodSpec> by_name;
  for (const auto& s : specs) by_name[s.feature] = s;
  for (const std::string& name : neighborhood_feature_names()) {
    if (!by_name.count(name)) {
      throw std::invalid_argument("missing neighborhood spec for feature '" +
                                  name + "'");
    }
  }
  const bool want_beam =
      border_mode == BorderMode::Beam || border_mode == BorderMode::Both;
  const bool want_angle =
      border_mode == BorderMode::Angle || border_mode == BorderMode::Both;
  if (want_beam || want_angle) {
    std::string missing;
    for (Column c : {Column::Vx, Column::Vy, Column::Vz}) {
      if (!cloud.has(c)) missing += std::string(missing.empty() ? "" : ", ") +
                                    column_name(c);
    }
    if (!missing.empty()) {
      throw std::invalid_argument("border mode '" +
                                  std::string(border_mode_name(border_mode)) +
                                  "' requires columns: " + missing);
    }
  }

  std::vector<std::string> cols = neighborhood_feature_names();
  std::vector<Column> passthrough;
  for (Column c : {Column::Amplitude, Column::EchoWidth, Column::Reflectance,
                   Column::EchoId, Column::EchoCount}) {
    if (cloud.has(c)) {
      passthrough.push_back(c);
      cols.push_back(column_name(c));
    }
  }
  if (want_beam) {
    cols.insert(cols.end(), {"vx", "vy", "vz"});
  }
  if (want_angle) {
    cols.push_back("ScanAngle");
  }

  FeatureMatrix fm;
  fm.init(std::move(cols), cloud.size());
  fm.specs = specs;

  // Column slots.
  const auto& names = neighborhood_feature_names();
  std::vector<int> fcol(names.size());
  std::vector<NeighborhoodSpec> spec_of(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    fcol[i] = fm.col_index(names[i]);
    spec_of[i] = by_name[names[i]];
  }
  enum FIdx {
    kLin = 0, kPla, kOmn, kNx, kNy, kNz, kNSig, kER, kZRange, kZRank,
    kNormZ, kPDen, kPDist
  };

  // Global nearest neighbor per point for the PointDistance fast path.
  const std::size_t n = cloud.size();
  std::vector<int> gnn_id(n, -1);
  std::vector<double> gnn_d(n, 0.0);

  auto run_chunks = [&](auto&& body) {
    const int threads = std::max(1, n_threads);
    if (threads == 1 || n < 2048) {
      body(std::size_t{0}, n);
      return;
    }
    std::vector<std::future<void>> futs;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b >= e) break;
      futs.push_back(std::async(std::launch::async, [&, b, e] { body(b, e); }));
    }
    for (auto& f : futs) f.get();
  };

  run_chunks([&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto knn = index.query_knn(cloud.point(i), 2);
      if (knn.size() >= 2) {
        const int other = (knn[0] == static_cast<int>(i)) ? knn[1] : knn[0];
        gnn_id[i] = other;
        gnn_d[i] = std::sqrt(dist2_xyz(cloud.point(i), cloud.point(other)));
      }
    }
  });

  run_chunks([&](std::size_t begin, std::size_t end) {
    std::map<SpecKey, Neighborhood> hood_cache;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 p = cloud.point(i);
      hood_cache.clear();
      auto hood = [&](const NeighborhoodSpec& s) -> const Neighborhood& {
        const SpecKey key{s.geom, s.size};
        auto it = hood_cache.find(key);
        if (it != hood_cache.end()) return it->second;
        Neighborhood h;
        switch (s.geom) {
          case Geometry::Cylinder:
            h.ids = index.query_cylinder(p, s.size);
            break;
          case Geometry::Sphere:
            h.ids = index.query_sphere(p, s.size);
            break;
          case Geometry::Knn:
            h.ids = index.query_knn(p, static_cast<int>(s.size));
            break;
        }
        return hood_cache.emplace(key, std::move(h)).first->second;
      };

      // Tensor-derived features, grouped by shared neighborhood spec.
      struct TensorOut {
        bool valid = false;
        TensorFeatures f;
      };
      std::map<SpecKey, TensorOut> tensor_cache;
      auto tensor_at = [&](const NeighborhoodSpec& s) -> const TensorOut& {
        const SpecKey key{s.geom, s.size};
        auto it = tensor_cache.find(key);
        if (it != tensor_cache.end()) return it->second;
        TensorOut out;
        const auto& ids = hood(s).ids;
        if (ids.size() >= 3) {
          std::vector<Vec3> pts;
          pts.reserve(ids.size());
          for (int id : ids) pts.push_back(cloud.point(id));
          const StructureTensor st = structure_tensor(pts);
          const EigenTriple eig = eigen_symmetric3(st);
          if (eig.l1 > 0.0 && eig.l2 > kCollinearTol * eig.l1) {
            out.valid = true;
            out.f = tensor_features(eig);
          }
        }
        return tensor_cache.emplace(key, std::move(out)).first->second;
      };

      auto set_tensor = [&](int fi, double TensorFeatures::* member) {
        const auto& t = tensor_at(spec_of[fi]);
        if (t.valid) {
          fm.set(i, fcol[fi], t.f.*member);
        } else {
          fm.set(i, fcol[fi], kNaN, Cause::DegenerateNeighborhood);
        }
      };
      set_tensor(kLin, &TensorFeatures::linearity);
      set_tensor(kPla, &TensorFeatures::planarity);
      set_tensor(kOmn, &TensorFeatures::omnivariance);
      set_tensor(kNx, &TensorFeatures::normal_x);
      set_tensor(kNy, &TensorFeatures::normal_y);
      set_tensor(kNz, &TensorFeatures::normal_z);
      set_tensor(kNSig, &TensorFeatures::normal_sigma);

      // Height features, grouped likewise.
      std::map<SpecKey, HeightFeatures> height_cache;
      auto height_at = [&](const NeighborhoodSpec& s) -> const HeightFeatures& {
        const SpecKey key{s.geom, s.size};
        auto it = height_cache.find(key);
        if (it != height_cache.end()) return it->second;
        const auto& ids = hood(s).ids;
        std::vector<double> zs;
        zs.reserve(ids.size());
        for (int id : ids) zs.push_back(cloud.point(id).z);
        return height_cache.emplace(key, height_features(zs, p.z))
            .first->second;
      };
      fm.set(i, fcol[kZRange], height_at(spec_of[kZRange]).z_range);
      fm.set(i, fcol[kZRank], height_at(spec_of[kZRank]).z_rank);
      fm.set(i, fcol[kNormZ],
             height_at(spec_of[kNormZ]).normalized_z);

      // PointDensity.
      {
        const NeighborhoodSpec& s = spec_of[kPDen];
        if (s.geom == Geometry::Knn) {
          fm.set(i, fcol[kPDen], kNaN, Cause::DegenerateNeighborhood);
        } else {
          const double cnt = static_cast<double>(hood(s).ids.size());
          fm.set(i, fcol[kPDen], cnt / (M_PI * s.size * s.size));
        }
      }

      // PointDistance: mean nearest-neighbor distance within the
      // neighborhood. The global NN shortcut is exact whenever a member's
      // global nearest neighbor is itself a member.
      {
        const NeighborhoodSpec& s = spec_of[kPDist];
        const auto& ids = hood(s).ids;
        if (ids.size() < 2) {
          fm.set(i, fcol[kPDist], kNaN, Cause::DegenerateNeighborhood);
        } else {
          auto is_member = [&](int id) {
            const Vec3 q = cloud.point(id);
            if (s.geom == Geometry::Sphere) {
              return dist2_xyz(q, p) <= s.size * s.size;
            }
            if (s.geom == Geometry::Cylinder) {
              return dist2_xy(q, p) <= s.size * s.size;
            }
            return std::binary_search(ids.begin(), ids.end(), id);
          };
          double sum = 0.0;
          for (int id : ids) {
            if (gnn_id[id] >= 0 && is_member(gnn_id[id])) {
              sum += gnn_d[id];
            } else {
              const Vec3 q = cloud.point(id);
              double best = std::numeric_limits<double>::infinity();
              for (int other : ids) {
                if (other == id) continue;
                best = std::min(best, dist2_xyz(q, cloud.point(other)));
              }
              sum += std::sqrt(best);
            }
          }
          fm.set(i, fcol[kPDist], sum / static_cast<double>(ids.size()));
        }
      }

      // EchoRatio.
      {
        const NeighborhoodSpec& s = spec_of[kER];
        if (s.geom == Geometry::Knn) {
          fm.set(i, fcol[kER], kNaN, Cause::DegenerateNeighborhood);
        } else {
          fm.set(i, fcol[kER], echo_ratio(index, p, s.size));
        }
      }

      // Pass-through attributes.
      for (Column c : passthrough) {
        const int col = fm.col_index(column_name(c));
        if (cloud.is_valid(c, i)) {
          fm.set(i, col, cloud.value(c, i));
        } else {
          fm.set(i, col, kNaN, Cause::MissingInput);
        }
      }

      // Border columns.
      const bool beam_ok = cloud.has(Column::Vx) &&
                           cloud.is_valid(Column::Vx, i) &&
                           cloud.is_valid(Column::Vy, i) &&
                           cloud.is_valid(Column::Vz, i);
      if (want_beam) {
        if (beam_ok) {
          fm.set(i, fm.col_index("vx"), cloud.value(Column::Vx, i));
          fm.set(i, fm.col_index("vy"), cloud.value(Column::Vy, i));
          fm.set(i, fm.col_index("vz"), cloud.value(Column::Vz, i));
        } else {
          fm.set(i, fm.col_index("vx"), kNaN, Cause::MissingInput);
          fm.set(i, fm.col_index("vy"), kNaN, Cause::MissingInput);
          fm.set(i, fm.col_index("vz"), kNaN, Cause::MissingInput);
        }
      }
      if (want_angle) {
        const int col = fm.col_index("ScanAngle");
        if (beam_ok && cloud.value(Column::Vz, i) != 0.0) {
          fm.set(i, col,
                 scan_angle_deg(cloud.value(Column::Vx, i),
                                cloud.value(Column::Vy, i),
                                cloud.value(Column::Vz, i)));
        } else {
          fm.set(i, col, kNaN, Cause::MissingInput);
        }
      }
    }
  });

  return fm;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::Cylinder: return "cylinder";
    case Geometry::Sphere: return "sphere";
    case Geometry::Knn: return "knn";
  }
  return "cylinder";
}

Geometry geometry_from_name(const std::string& s) {
  if (s == "cylinder") return Geometry::Cylinder;
  if (s == "sphere") return Geometry::Sphere;
  if (s == "knn") return Geometry::Knn;
  throw std::runtime_error("unknown neighborhood geometry '" + s + "'");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_features_text(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# alsc-features\n";
  for (const auto& s : fm.specs) {
    out << "# spec " << s.feature << " " << geometry_name(s.geom) << " "
        << fmt(s.size) << "\n";
  }
  for (std::size_t c = 0; c < fm.columns.size(); ++c) {
    out << (c ? " " : "") << fm.columns[c];
  }
  out << "\n";
  for (std::size_t r = 0; r < fm.rows; ++r) {
    for (std::size_t c = 0; c < fm.columns.size(); ++c) {
      out << (c ? " " : "") << fmt(fm.at(r, c));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureMatrix read_features_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  FeatureMatrix fm;
  std::string line;
  std::vector<std::string> cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string hash, kw;
      ls >> hash >> kw;
      if (kw == "spec") {
        NeighborhoodSpec s;
        std::string geom;
        ls >> s.feature >> geom >> s.size;
        s.geom = geometry_from_name(geom);
        fm.specs.push_back(s);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string name;
    while (ls >> name) cols.push_back(name);
    break;
  }
  if (cols.empty()) throw std::runtime_error(path + ": no header line");
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::size_t c = 0;
    while (ls >> tok) {
      data.push_back(tok == "NA" ? kNaN : std::stod(tok));
      ++c;
    }
    if (c != cols.size()) {
      throw std::runtime_error(path + ": row width mismatch");
    }
    ++rows;
  }
  fm.init(cols, rows);
  for (std::size_t i = 0; i < data.size(); ++i) {
    fm.values[i] = data[i];
    fm.causes[i] = static_cast<std::uint8_t>(
        std::isnan(data[i]) ? Cause::MissingInput : Cause::Valid);
  }
  return fm;
}

namespace {
constexpr char kFeatMagic[4] = {'A', 'L', 'S', 'F'};

void put_u32f(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 4);
}
void put_u64f(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 8);
}
std::uint32_t get_u32f(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64f(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}
void put_f64f(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64f(out, v);
}
double get_f64f(std::istream& in) {
  const std::uint64_t v = get_u64f(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
void put_str(std::ostream& out, const std::string& s) {
  put_u32f(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_str(std::istream& in) {
  const std::uint32_t len = get_u32f(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}
}  // namespace

void write_features_binary(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kFeatMagic, 4);
  out.put(1);
  put_u32f(out, static_cast<std::uint32_t>(fm.specs.size()));
  for (const auto& s : fm.specs) {
    put_str(out, s.feature);
    out.put(static_cast<char>(s.geom));
    put_f64f(out, s.size);
  }
  put_u32f(out, static_cast<std::uint32_t>(fm.columns.size()));
  for (const auto& c : fm.columns) put_str(out, c);
  put_u64f(out, fm.rows);
  for (double v : fm.values) put_f64f(out, v);
  out.write(reinterpret_cast<const char*>(fm.causes.data()),
            static_cast<std::streamsize>(fm.causes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureMatrix read_features_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFeatMagic, 4) != 0) {
    throw std::runtime_error(path + ": not an ALSF binary file");
  }
  if (in.get() != 1) throw std::runtime_error(path + ": unsupported version");
  FeatureMatrix fm;
  const std::uint32_t nspecs = get_u32f(in);
  for (std::uint32_t i = 0; i < nspecs; ++i) {
    NeighborhoodSpec s;
    s.feature = get_str(in);
    s.geom = static_cast<Geometry>(in.get());
    s.size = get_f64f(in);
    fm.specs.push_back(s);
  }
  const std::uint32_t ncols = get_u32f(in);
  std::vector<std::string> cols;
  for (std::uint32_t i = 0; i < ncols; ++i) cols.push_back(get_str(in));
  const std::uint64_t rows = get_u64f(in);
  fm.init(cols, rows);
  for (auto& v : fm.values) v = get_f64f(in);
  in.read(reinterpret_cast<char*>(fm.causes.data()),
          static_cast<std::streamsize>(fm.causes.size()));
  if (!in) throw std::runtime_error(path + ": truncated file");
  return fm;
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kFeatMagic, 4) == 0) return read_features_binary(path);
  return read_features_text(path);
}

}  // namespace alsc
