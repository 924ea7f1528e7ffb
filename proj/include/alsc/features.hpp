#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "alsc/cloud.hpp"
#include "alsc/geometry.hpp"
#include "alsc/spatial_index.hpp"

namespace alsc {

// ---------------------------------------------------------------------------
// Structure tensor and its eigen decomposition

struct StructureTensor {
  // Symmetric 3x3, packed xx, xy, xz, yy, yz, zz.
  double m[6] = {0, 0, 0, 0, 0, 0};
  Vec3 centroid;
  int count = 0;

  double trace() const { return m[0] + m[3] + m[5]; }
};

// Covariance-style tensor with divisor count-1; the zero tensor for a
// single point.
StructureTensor structure_tensor(std::span<const Vec3> neighbors);

struct EigenTriple {
  double l1 = 0, l2 = 0, l3 = 0;  // l1 >= l2 >= l3 >= 0
  Vec3 e1, e2, e3;                // orthonormal
};

// Closed-form symmetric 3x3 solve with a Jacobi fallback near degenerate
// spectra. Eigenvector sign: largest-magnitude component positive.
EigenTriple eigen_symmetric3(const StructureTensor& t);
EigenTriple eigen_symmetric3(const double packed[6]);

// ---------------------------------------------------------------------------
// Per-point descriptors

struct TensorFeatures {
  double normal_x = 0, normal_y = 0, normal_z = 0;
  double normal_sigma = 0;
  double linearity = 0, planarity = 0, omnivariance = 0;
  bool shape_valid = true;  // false when l1 == 0
};

// Normal is e3 oriented so normal_z >= 0 (ties by normal_x >= 0).
TensorFeatures tensor_features(const EigenTriple& eig);

struct HeightFeatures {
  double z_range = 0, z_rank = 0, normalized_z = 0;
};

// neighbor_z includes the query point's own z. ZRank is 1-based with
// average ranks on ties.
HeightFeatures height_features(std::span<const double> neighbor_z,
                               double query_z);

struct DistanceFeatures {
  double point_distance = 0;
  bool point_distance_valid = false;  // needs >= 2 points
  double point_density = 0;           // per m^2 of cylinder footprint
};

DistanceFeatures distance_features(std::span<const Vec3> neighbors,
                                   double radius);

// Sphere count over cylinder count at the same radius; in (0, 1].
double echo_ratio(const SpatialIndex& index, const Vec3& center, double radius);

// Off-nadir angle in degrees, [0, 90). Throws for a horizontal beam.
double scan_angle_deg(double vx, double vy, double vz);

// ---------------------------------------------------------------------------
// Feature table

enum class Geometry { Cylinder, Sphere, Knn };

struct NeighborhoodSpec {
  std::string feature;
  Geometry geom = Geometry::Cylinder;
  double size = 2.0;  // radius in meters, or k for Knn
};

enum class BorderMode { None, Beam, Angle, Both };

BorderMode border_mode_from_name(const std::string& name);
const char* border_mode_name(BorderMode m);

// The 13 neighborhood-dependent feature names, canonical order.
const std::vector<std::string>& neighborhood_feature_names();

// One spec per feature, same geometry and size everywhere.
std::vector<NeighborhoodSpec> uniform_specs(double radius,
                                            Geometry geom = Geometry::Cylinder);

enum class Cause : std::uint8_t {
  Valid = 0,
  DegenerateNeighborhood = 1,
  MissingInput = 2,
};

class FeatureMatrix {
 public:
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<double> values;         // row-major; NaN when not valid
  std::vector<std::uint8_t> causes;   // Cause per entry
  std::vector<NeighborhoodSpec> specs;

  void init(std::vector<std::string> cols, std::size_t nrows);
  int col_index(const std::string& name) const;  // -1 when absent
  double at(std::size_t row, std::size_t col) const {
    return values[row * columns.size() + col];
  }
  Cause cause_at(std::size_t row, std::size_t col) const {
    return static_cast<Cause>(causes[row * columns.size() + col]);
  }
  void set(std::size_t row, std::size_t col, double v,
           Cause cause = Cause::Valid);
  std::size_t invalid_count() const;
};

// One row per cloud point: the 13 neighborhood features, pass-through echo
// attributes, and border columns per mode. Deterministic; data-parallel
// over points.
FeatureMatrix feature_table(const PointCloud& cloud, const SpatialIndex& index,
                            const std::vector<NeighborhoodSpec>& specs,
                            BorderMode border_mode, int n_threads = 1);

void write_features_text(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix read_features_text(const std::string& path);
void write_features_binary(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix read_features_binary(const std::string& path);
FeatureMatrix read_features(const std::string& path);

}  // namespace alsc
