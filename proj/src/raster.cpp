#include "alsc/raster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace alsc {

Raster grid_surface(const PointCloud& cloud, double cell, GridMode mode,
                    const std::vector<int>& class_filter) {
  if (cell <= 0.0) throw std::invalid_argument("cell size must be positive");
  if (cloud.empty()) throw std::invalid_argument("empty cloud");
  const auto pass = [&](std::size_t i) {
    if (class_filter.empty()) return true;
    const auto c = cloud.class_code(i);
    if (!c) return false;
    return std::find(class_filter.begin(), class_filter.end(), *c) !=
           class_filter.end();
  };

  const BoundingBox box = cloud.bounding_box();
  Raster r;
  r.cell = cell;
  r.x0 = box.min.x;
  r.y0 = box.min.y;
  r.cols = std::max(1, static_cast<int>(
                           std::ceil((box.max.x - box.min.x) / cell)));
  r.rows = std::max(1, static_cast<int>(
                           std::ceil((box.max.y - box.min.y) / cell)));
  r.values.assign(static_cast<std::size_t>(r.cols) * r.rows, r.nodata);

  std::size_t used = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!pass(i)) continue;
    const Vec3 p = cloud.point(i);
    const int col = std::min(r.cols - 1,
                             static_cast<int>((p.x - r.x0) / cell));
    const int row = std::min(r.rows - 1,
                             static_cast<int>((p.y - r.y0) / cell));
    // Row 0 is the top (largest y).
    double& v = r.at(r.rows - 1 - row, col);
    if (v == r.nodata) {
      v = p.z;
    } else if (mode == GridMode::MinZ) {
      v = std::min(v, p.z);
    } else {
      v = std::max(v, p.z);
    }
    ++used;
  }
  if (used == 0) throw std::invalid_argument("no point passes the class filter");
  return r;
}

void fill_nearest(Raster& raster) {
  std::deque<std::pair<int, int>> frontier;
  for (int row = 0; row < raster.rows; ++row) {
    for (int col = 0; col < raster.cols; ++col) {
      if (!raster.is_nodata(row, col)) frontier.emplace_back(row, col);
    }
  }
  if (frontier.empty()) return;
  static const int kOff[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  while (!frontier.empty()) {
    const auto [row, col] = frontier.front();
    frontier.pop_front();
    for (const auto& d : kOff) {
      const int nr = row + d[0], nc = col + d[1];
      if (nr < 0 || nr >= raster.rows || nc < 0 || nc >= raster.cols) continue;
      if (raster.is_nodata(nr, nc)) {
        raster.at(nr, nc) = raster.at(row, col);
        frontier.emplace_back(nr, nc);
      }
    }
  }
}

Raster hillshade(const Raster& elevation, double azimuth_deg,
                 double elevation_deg) {
  const double zenith = (90.0 - elevation_deg) * M_PI / 180.0;
  const double azimuth = azimuth_deg * M_PI / 180.0;
  Raster out = elevation;
  out.values.assign(out.values.size(), out.nodata);
  const auto z = [&](int row, int col) {
    row = std::clamp(row, 0, elevation.rows - 1);
    col = std::clamp(col, 0, elevation.cols - 1);
    return elevation.at(row, col);
  };
  for (int row = 0; row < elevation.rows; ++row) {
    for (int col = 0; col < elevation.cols; ++col) {
      if (elevation.is_nodata(row, col)) continue;
      // Horn 3x3 gradient; row index grows southward.
      const double a = z(row - 1, col - 1), b = z(row - 1, col),
                   c = z(row - 1, col + 1);
      const double d = z(row, col - 1), f = z(row, col + 1);
      const double g = z(row + 1, col - 1), h = z(row + 1, col),
                   i = z(row + 1, col + 1);
      const double dzdx =
          ((c + 2.0 * f + i) - (a + 2.0 * d + g)) / (8.0 * elevation.cell);
      const double dzdy =
          ((g + 2.0 * h + i) - (a + 2.0 * b + c)) / (8.0 * elevation.cell);
      const double slope = std::atan(std::hypot(dzdx, dzdy));
      double aspect = std::atan2(dzdy, -dzdx);
      if (aspect < 0.0) aspect += 2.0 * M_PI;
      // Map light azimuth (clockwise from north) into the aspect frame.
      const double az_math = 2.0 * M_PI - azimuth + M_PI / 2.0;
      const double v = std::cos(zenith) * std::cos(slope) +
                       std::sin(zenith) * std::sin(slope) *
                           std::cos(az_math - aspect);
      out.at(row, col) = 255.0 * std::max(0.0, v);
    }
  }
  return out;
}

void write_raster(const Raster& raster, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[64];
  out << "ncols " << raster.cols << "\n";
  out << "nrows " << raster.rows << "\n";
  std::snprintf(buf, sizeof(buf), "xllcorner %.17g\n", raster.x0);
  out << buf;
  std::snprintf(buf, sizeof(buf), "yllcorner %.17g\n", raster.y0);
  out << buf;
  std::snprintf(buf, sizeof(buf), "cellsize %.17g\n", raster.cell);
  out << buf;
  std::snprintf(buf, sizeof(buf), "nodata_value %.17g\n", raster.nodata);
  out << buf;
  for (int row = 0; row < raster.rows; ++row) {
    for (int col = 0; col < raster.cols; ++col) {
      std::snprintf(buf, sizeof(buf), col == 0 ? "%.17g" : " %.17g",
                    raster.at(row, col));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Raster read_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Raster r;
  std::string key;
  auto expect = [&](const char* want, double& value) {
    if (!(in >> key >> value) || key != want) {
      throw std::runtime_error(path + ": expected header line " +
                               std::string(want));
    }
  };
  double cols = 0, rows = 0;
  expect("ncols", cols);
  expect("nrows", rows);
  expect("xllcorner", r.x0);
  expect("yllcorner", r.y0);
  expect("cellsize", r.cell);
  expect("nodata_value", r.nodata);
  r.cols = static_cast<int>(cols);
  r.rows = static_cast<int>(rows);
  if (r.cols <= 0 || r.rows <= 0 || r.cell <= 0.0) {
    throw std::runtime_error(path + ": invalid raster header");
  }
  r.values.resize(static_cast<std::size_t>(r.cols) * r.rows);
  for (double& v : r.values) {
    if (!(in >> v)) throw std::runtime_error(path + ": truncated raster data");
  }
  return r;
}

}  // namespace alsc
