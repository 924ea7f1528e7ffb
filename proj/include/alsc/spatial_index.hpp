#pragma once

#include <cstddef>
#include <vector>

#include "alsc/cloud.hpp"
#include "alsc/geometry.hpp"

namespace alsc {

// Uniform 2D grid over (x, y). Cell size is a performance knob only; query
// results are exact for any positive cell size. The cloud must outlive the
// index; the index is immutable after construction and safe for concurrent
// queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(const PointCloud& cloud, double cell_size = 2.0);

  const PointCloud& cloud() const { return *cloud_; }

  // All ids with planar distance <= r from (center.x, center.y), unbounded
  // in z. Sorted ascending by id.
  std::vector<int> query_cylinder(const Vec3& center, double radius) const;
  // All ids with 3D distance <= r. Sorted ascending by id.
  std::vector<int> query_sphere(const Vec3& center, double radius) const;
  // k ids ordered by ascending 3D distance, ties by ascending id.
  std::vector<int> query_knn(const Vec3& center, int k) const;

  std::size_t count_cylinder(const Vec3& center, double radius) const;
  std::size_t count_sphere(const Vec3& center, double radius) const;

 private:
  template <typename Visit>
  void for_cells_in_range(double cx, double cy, double r, Visit&& visit) const;

  const PointCloud* cloud_;
  double cell_;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 1, ny_ = 1;
  // CSR layout: ids of cell c are ids_[cell_start_[c] .. cell_start_[c+1])
  std::vector<int> cell_start_;
  std::vector<int> ids_;
};

}  // namespace alsc
