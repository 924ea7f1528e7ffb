#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alsc/cloud.hpp"

namespace alsc {

// Labeled scene generator. Components are placed on a common ground plane;
// each maps to one class code and carries its own echo-attribute
// distributions. Beam vectors come from simulated north-south flight
// strips, so the scan angle grows with across-track offset.

struct GroundSpec {
  bool enabled = true;
  double z0 = 0.0;
  double slope_x = 0.0, slope_y = 0.0;  // meters of z per meter
  double noise = 0.02;                  // vertical sigma, meters
};

struct GravelSpec {
  bool enabled = false;
  int patches = 6;
  double radius = 12.0;  // patch footprint radius, meters
  double noise = 0.02;
};

struct TreeSpec {
  bool enabled = false;
  int clusters = 20;
  double radius = 3.0;   // crown radius, meters
  double height = 12.0;  // crown top above ground, meters
  double deciduous_fraction = 1.0;  // remainder is coniferous
  double ground_echo_p = 0.5;       // chance of a last echo under the crown
};

struct BuildingSpec {
  bool enabled = false;
  double x = 0.0, y = 0.0;           // footprint lower-left corner
  double width = 25.0, depth = 15.0;
  double height = 6.0;               // roof above local ground
  bool wall = false;                 // emit wall points on the perimeter
  double noise = 0.02;
};

struct PowerLineSpec {
  bool enabled = false;
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double height = 15.0;   // above local ground
  double sag = 1.0;       // mid-span drop, meters
  double spacing = 0.25;  // along-line point spacing, meters
  double noise = 0.02;
};

struct WaterSpec {
  bool enabled = false;
  double x = 0.0, y = 0.0, width = 20.0, depth = 20.0;
  double level = -0.5;     // z offset below local ground
  double dropout = 0.6;    // fraction of pulses without a return
};

struct TemporarySpec {
  bool enabled = false;
  int objects = 4;  // box-shaped objects (cars, containers) on the ground
};

struct StripSpec {
  double altitude = 600.0;  // flying height above z = 0, meters
  double spacing = 300.0;   // across-track distance between strip axes
  double origin = 0.0;      // x of the first strip axis
};

struct SceneSpec {
  double extent_x = 100.0, extent_y = 100.0;  // meters
  double density = 6.0;                       // points per square meter
  std::uint64_t seed = 1;
  StripSpec strips;
  GroundSpec ground;
  GravelSpec gravel;
  TreeSpec trees;
  BuildingSpec building;
  PowerLineSpec power_line;
  WaterSpec water;
  TemporarySpec temporary;

  void validate() const;  // throws std::invalid_argument

  // Text configuration: "[section]" headers with "key = value" lines.
  static SceneSpec parse(const std::string& text);
  static SceneSpec load(const std::string& path);
};

// Five-class demo layout (ground, gravel, deciduous forest, building roof,
// power line) scaled to the given square extent. The ground/gravel pair is
// geometrically identical and separated by amplitude only.
SceneSpec demo_scene(double extent, std::uint64_t seed);

PointCloud generate(const SceneSpec& spec);

// Reference across-track tangent: scan-angle scaling reaches 1 at
// tan(angle) = 0.25 (150 m offset at 600 m altitude).
constexpr double kBorderTanRef = 0.25;

// Returns a copy whose amplitude is distorted in proportion to the scan
// angle. The distortion has one term recoverable from the unsigned scan
// angle, one term recoverable only from the signed across-track direction
// (beam vector), and a small irrecoverable noise term. Nadir points are
// unchanged. Throws if beam-vector columns are missing.
PointCloud inject_border_effect(const PointCloud& cloud, double strength);

}  // namespace alsc
