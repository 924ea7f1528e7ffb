#include "alsc/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace alsc {

SpatialIndex::SpatialIndex(const PointCloud& cloud, double cell_size)
    : cloud_(&cloud), cell_(cell_size) {
  if (cell_size <= 0.0) throw std::invalid_argument("cell size must be > 0");
  const std::size_t n = cloud.size();
  if (n > 0) {
    const BoundingBox bb = cloud.bounding_box();
    x0_ = bb.min.x;
    y0_ = bb.min.y;
    nx_ = std::max(1, static_cast<int>((bb.max.x - x0_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((bb.max.y - y0_) / cell_) + 1);
  }
  auto cell_of = [&](double x, double y) {
    int ix = static_cast<int>((x - x0_) / cell_);
    int iy = static_cast<int>((y - y0_) / cell_);
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    return iy * nx_ + ix;
  };
  // Counting sort into CSR buckets keeps ids ascending within each cell.
  cell_start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = cloud.point(i);
    cell_start_[cell_of(p.x, p.y) + 1]++;
  }
  for (std::size_t c = 1; c < cell_start_.size(); ++c) {
    cell_start_[c] += cell_start_[c - 1];
  }
  ids_.resize(n);
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = cloud.point(i);
    ids_[fill[cell_of(p.x, p.y)]++] = static_cast<int>(i);
  }
}

template <typename Visit>
void SpatialIndex::for_cells_in_range(double cx, double cy, double r,
                                      Visit&& visit) const {
  const int ix0 = std::clamp(static_cast<int>(std::floor((cx - r - x0_) / cell_)), 0, nx_ - 1);
  const int ix1 = std::clamp(static_cast<int>(std::floor((cx + r - x0_) / cell_)), 0, nx_ - 1);
  const int iy0 = std::clamp(static_cast<int>(std::floor((cy - r - y0_) / cell_)), 0, ny_ - 1);
  const int iy1 = std::clamp(static_cast<int>(std::floor((cy + r - y0_) / cell_)), 0, ny_ - 1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const int c = iy * nx_ + ix;
      visit(cell_start_[c], cell_start_[c + 1]);
    }
  }
}

std::vector<int> SpatialIndex::query_cylinder(const Vec3& center,
                                              double radius) const {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  const double r2 = radius * radius;
  std::vector<int> out;
  for_cells_in_range(center.x, center.y, radius, [&](int b, int e) {
    for (int k = b; k < e; ++k) {
      const int id = ids_[k];
      if (dist2_xy(cloud_->point(id), center) <= r2) out.push_back(id);
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> SpatialIndex::query_sphere(const Vec3& center,
                                            double radius) const {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  const double r2 = radius * radius;
  std::vector<int> out;
  for_cells_in_range(center.x, center.y, radius, [&](int b, int e) {
    for (int k = b; k < e; ++k) {
      const int id = ids_[k];
      if (dist2_xyz(cloud_->point(id), center) <= r2) out.push_back(id);
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SpatialIndex::count_cylinder(const Vec3& center,
                                         double radius) const {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  const double r2 = radius * radius;
  std::size_t n = 0;
  for_cells_in_range(center.x, center.y, radius, [&](int b, int e) {
    for (int k = b; k < e; ++k) {
      if (dist2_xy(cloud_->point(ids_[k]), center) <= r2) ++n;
    }
  });
  return n;
}

std::size_t SpatialIndex::count_sphere(const Vec3& center,
                                       double radius) const {
  if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
  const double r2 = radius * radius;
  std::size_t n = 0;
  for_cells_in_range(center.x, center.y, radius, [&](int b, int e) {
    for (int k = b; k < e; ++k) {
      if (dist2_xyz(cloud_->point(ids_[k]), center) <= r2) ++n;
    }
  });
  return n;
}

std::vector<int> SpatialIndex::query_knn(const Vec3& center, int k) const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (cloud_->empty()) throw std::invalid_argument("cloud is empty");

  struct Cand {
    double d2;
    int id;
    bool operator<(const Cand& o) const {
      // max-heap on (distance, id): the worst kept candidate on top
      return d2 < o.d2 || (d2 == o.d2 && id < o.id);
    }
  };
  std::priority_queue<Cand> heap;

  const int cix = std::clamp(static_cast<int>((center.x - x0_) / cell_), 0, nx_ - 1);
  const int ciy = std::clamp(static_cast<int>((center.y - y0_) / cell_), 0, ny_ - 1);

  auto scan_cell = [&](int ix, int iy) {
    const int c = iy * nx_ + ix;
    for (int kk = cell_start_[c]; kk < cell_start_[c + 1]; ++kk) {
      const int id = ids_[kk];
      const Cand cand{dist2_xyz(cloud_->point(id), center), id};
      if (static_cast<int>(heap.size()) < k) {
        heap.push(cand);
      } else if (cand < heap.top()) {
        heap.pop();
        heap.push(cand);
      }
    }
  };

  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Once k candidates are held, stop when the ring's planar clearance
    // already exceeds the worst kept 3D distance.
    if (static_cast<int>(heap.size()) >= k && ring > 0) {
      const double clearance = (ring - 1) * cell_;
      if (clearance * clearance > heap.top().d2) break;
    }
    bool any = false;
    for (int iy = ciy - ring; iy <= ciy + ring; ++iy) {
      if (iy < 0 || iy >= ny_) continue;
      for (int ix = cix - ring; ix <= cix + ring; ++ix) {
        if (ix < 0 || ix >= nx_) continue;
        if (std::max(std::abs(ix - cix), std::abs(iy - ciy)) != ring) continue;
        any = true;
        scan_cell(ix, iy);
      }
    }
    if (!any && ring > 0 && static_cast<int>(heap.size()) >= k) break;
  }

  std::vector<Cand> best;
  best.reserve(heap.size());
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
  });
  std::vector<int> out;
  out.reserve(best.size());
  for (const Cand& c : best) out.push_back(c.id);
  return out;
}

}  // namespace alsc
