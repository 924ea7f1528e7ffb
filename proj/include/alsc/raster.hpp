#pragma once

#include <string>
#include <vector>

#include "alsc/cloud.hpp"

namespace alsc {

// Row-major grid, row 0 = northernmost (matching the text export order).
struct Raster {
  int cols = 0, rows = 0;
  double x0 = 0.0, y0 = 0.0;  // lower-left corner
  double cell = 1.0;
  double nodata = -9999.0;
  std::vector<double> values;

  double& at(int row, int col) { return values[row * cols + col]; }
  double at(int row, int col) const { return values[row * cols + col]; }
  bool is_nodata(int row, int col) const { return at(row, col) == nodata; }
};

enum class GridMode { MinZ, MaxZ };

// Grids per-cell minimum (terrain) or maximum (surface) z. An empty class
// filter accepts every point. Throws on non-positive cell size or when no
// point passes the filter.
Raster grid_surface(const PointCloud& cloud, double cell, GridMode mode,
                    const std::vector<int>& class_filter = {});

// Replaces nodata cells with the value of the nearest filled cell
// (breadth-first from all filled cells).
void fill_nearest(Raster& raster);

// Shaded relief from Horn gradients; output intensities in [0, 255].
// Light from the northwest by default.
Raster hillshade(const Raster& elevation, double azimuth_deg = 315.0,
                 double elevation_deg = 45.0);

// Plain-text grid with a 6-line georeferencing header (ncols, nrows,
// xllcorner, yllcorner, cellsize, nodata_value).
void write_raster(const Raster& raster, const std::string& path);
Raster read_raster(const std::string& path);

}  // namespace alsc
