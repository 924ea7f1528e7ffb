#include "alsc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alsc/random.hpp"

namespace alsc {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("scene spec: " + msg);
}

}  // namespace

void SceneSpec::validate() const {
  require(extent_x > 0.0 && extent_y > 0.0, "extent must be positive");
  require(density > 0.0, "density must be positive");
  require(strips.altitude > 0.0, "strip altitude must be positive");
  require(strips.spacing > 0.0, "strip spacing must be positive");
  if (gravel.enabled) {
    require(gravel.patches > 0 && gravel.radius > 0.0,
            "gravel patches and radius must be positive");
  }
  if (trees.enabled) {
    require(trees.clusters > 0 && trees.radius > 0.0 && trees.height > 0.0,
            "tree clusters, radius and height must be positive");
    require(trees.deciduous_fraction >= 0.0 && trees.deciduous_fraction <= 1.0,
            "deciduous fraction must lie in [0,1]");
    require(trees.ground_echo_p >= 0.0 && trees.ground_echo_p <= 1.0,
            "ground echo probability must lie in [0,1]");
  }
  if (building.enabled) {
    require(building.width > 0.0 && building.depth > 0.0 &&
                building.height > 0.0,
            "building dimensions must be positive");
    require(building.x >= 0.0 && building.y >= 0.0 &&
                building.x + building.width <= extent_x &&
                building.y + building.depth <= extent_y,
            "building footprint must lie within the extent");
  }
  if (power_line.enabled) {
    require(power_line.spacing > 0.0, "power line spacing must be positive");
    require(power_line.height > 0.0, "power line height must be positive");
    for (double v : {power_line.x0, power_line.x1}) {
      require(v >= 0.0 && v <= extent_x, "power line must lie within the extent");
    }
    for (double v : {power_line.y0, power_line.y1}) {
      require(v >= 0.0 && v <= extent_y, "power line must lie within the extent");
    }
  }
  if (water.enabled) {
    require(water.width > 0.0 && water.depth > 0.0,
            "water dimensions must be positive");
    require(water.x >= 0.0 && water.y >= 0.0 &&
                water.x + water.width <= extent_x &&
                water.y + water.depth <= extent_y,
            "water body must lie within the extent");
    require(water.dropout >= 0.0 && water.dropout <= 1.0,
            "dropout must lie in [0,1]");
  }
  if (temporary.enabled) {
    require(temporary.objects > 0, "temporary object count must be positive");
  }
}

// ---------------------------------------------------------------------------
// Text configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_num(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) {
    throw std::invalid_argument("scene spec: bad value for " + key + ": " + v);
  }
  return x;
}

}  // namespace

SceneSpec SceneSpec::parse(const std::string& text) {
  SceneSpec spec;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("scene spec: malformed section at line " +
                                    std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section == "gravel") spec.gravel.enabled = true;
      else if (section == "trees") spec.trees.enabled = true;
      else if (section == "building") spec.building.enabled = true;
      else if (section == "power_line") spec.power_line.enabled = true;
      else if (section == "water") spec.water.enabled = true;
      else if (section == "temporary") spec.temporary.enabled = true;
      else if (section != "scene" && section != "ground") {
        throw std::invalid_argument("scene spec: unknown section [" + section +
                                    "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw std::invalid_argument("scene spec: expected key = value at line " +
                                  std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const double v = to_num(key, trim(line.substr(eq + 1)));
    bool known = true;
    if (section == "scene") {
      if (key == "extent_x") spec.extent_x = v;
      else if (key == "extent_y") spec.extent_y = v;
      else if (key == "density") spec.density = v;
      else if (key == "seed") spec.seed = static_cast<std::uint64_t>(v);
      else if (key == "altitude") spec.strips.altitude = v;
      else if (key == "strip_spacing") spec.strips.spacing = v;
      else if (key == "strip_origin") spec.strips.origin = v;
      else known = false;
    } else if (section == "ground") {
      if (key == "z") spec.ground.z0 = v;
      else if (key == "slope_x") spec.ground.slope_x = v;
      else if (key == "slope_y") spec.ground.slope_y = v;
      else if (key == "noise") spec.ground.noise = v;
      else known = false;
    } else if (section == "gravel") {
      if (key == "patches") spec.gravel.patches = static_cast<int>(v);
      else if (key == "radius") spec.gravel.radius = v;
      else if (key == "noise") spec.gravel.noise = v;
      else known = false;
    } else if (section == "trees") {
      if (key == "clusters") spec.trees.clusters = static_cast<int>(v);
      else if (key == "radius") spec.trees.radius = v;
      else if (key == "height") spec.trees.height = v;
      else if (key == "deciduous_fraction") spec.trees.deciduous_fraction = v;
      else if (key == "ground_echo_p") spec.trees.ground_echo_p = v;
      else known = false;
    } else if (section == "building") {
      if (key == "x") spec.building.x = v;
      else if (key == "y") spec.building.y = v;
      else if (key == "width") spec.building.width = v;
      else if (key == "depth") spec.building.depth = v;
      else if (key == "height") spec.building.height = v;
      else if (key == "wall") spec.building.wall = v != 0.0;
      else if (key == "noise") spec.building.noise = v;
      else known = false;
    } else if (section == "power_line") {
      if (key == "x0") spec.power_line.x0 = v;
      else if (key == "y0") spec.power_line.y0 = v;
      else if (key == "x1") spec.power_line.x1 = v;
      else if (key == "y1") spec.power_line.y1 = v;
      else if (key == "height") spec.power_line.height = v;
      else if (key == "sag") spec.power_line.sag = v;
      else if (key == "spacing") spec.power_line.spacing = v;
      else if (key == "noise") spec.power_line.noise = v;
      else known = false;
    } else if (section == "water") {
      if (key == "x") spec.water.x = v;
      else if (key == "y") spec.water.y = v;
      else if (key == "width") spec.water.width = v;
      else if (key == "depth") spec.water.depth = v;
      else if (key == "level") spec.water.level = v;
      else if (key == "dropout") spec.water.dropout = v;
      else known = false;
    } else if (section == "temporary") {
      if (key == "objects") spec.temporary.objects = static_cast<int>(v);
      else known = false;
    }
    if (!known) {
      throw std::invalid_argument("scene spec: unknown key " + key + " in [" +
                                  section + "]");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec SceneSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SceneSpec demo_scene(double extent, std::uint64_t seed) {
  SceneSpec spec;
  spec.extent_x = spec.extent_y = extent;
  spec.seed = seed;
  spec.gravel.enabled = true;
  spec.gravel.patches = std::max(1, static_cast<int>(extent / 30.0));
  spec.gravel.radius = extent * 0.08;
  spec.trees.enabled = true;
  spec.trees.clusters = std::max(1, static_cast<int>(extent / 8.0));
  spec.trees.deciduous_fraction = 1.0;
  spec.building.enabled = true;
  spec.building.width = extent * 0.15;
  spec.building.depth = extent * 0.1;
  spec.building.x = extent * 0.65;
  spec.building.y = extent * 0.1;
  spec.power_line.enabled = true;
  spec.power_line.x0 = extent * 0.05;
  spec.power_line.y0 = extent * 0.9;
  spec.power_line.x1 = extent * 0.95;
  spec.power_line.y1 = extent * 0.85;
  return spec;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct AttributeModel {
  double amp_mean, amp_sd;
  double ew_mean, ew_sd;
  double refl_mean, refl_sd;
};

// Per-class echo attribute distributions. Ground and gravel differ only in
// amplitude; tree echoes are widened.
AttributeModel attributes_for(int code) {
  switch (code) {
    case 2: return {100.0, 3.0, 4.0, 0.3, 0.50, 0.05};
    case 3: return {130.0, 3.0, 4.0, 0.3, 0.50, 0.05};
    case 5: return {70.0, 10.0, 6.0, 0.8, 0.35, 0.10};
    case 6: return {60.0, 10.0, 6.5, 0.8, 0.30, 0.10};
    case 8: return {110.0, 5.0, 4.0, 0.3, 0.60, 0.05};
    case 24: return {90.0, 8.0, 4.5, 0.5, 0.45, 0.08};
    case 13: return {150.0, 5.0, 3.5, 0.2, 0.70, 0.05};
    case 9: return {30.0, 10.0, 5.0, 1.0, 0.10, 0.05};
    case 11: return {105.0, 8.0, 4.0, 0.4, 0.55, 0.08};
    default: return {100.0, 5.0, 4.0, 0.3, 0.50, 0.05};
  }
}

struct Builder {
  const SceneSpec& spec;
  PointCloud cloud;

  double ground_z(double x, double y) const {
    return spec.ground.z0 + spec.ground.slope_x * x + spec.ground.slope_y * y;
  }

  void emit(Rng& rng, double x, double y, double z, int code, int echo_id = 1,
            int echo_count = 1) {
    const AttributeModel a = attributes_for(code);
    const StripSpec& s = spec.strips;
    const double axis =
        s.origin + s.spacing * std::round((x - s.origin) / s.spacing);
    const double dx = x - axis;
    const double n = std::sqrt(dx * dx + s.altitude * s.altitude);
    PointRecord r;
    r.x = x;
    r.y = y;
    r.z = z;
    r.echo_id = echo_id;
    r.echo_count = echo_count;
    r.amplitude = std::max(0.0, normal(rng, a.amp_mean, a.amp_sd));
    r.echo_width = std::max(0.1, normal(rng, a.ew_mean, a.ew_sd));
    r.reflectance =
        std::clamp(normal(rng, a.refl_mean, a.refl_sd), 0.0, 2.0);
    r.vx = dx / n;
    r.vy = 0.0;
    r.vz = -s.altitude / n;
    r.class_code = code;
    cloud.add_record(r);
  }
};

}  // namespace

PointCloud generate(const SceneSpec& spec) {
  spec.validate();
  Builder b{spec, PointCloud{}};
  for (int c = 0; c < kNumColumns; ++c) {
    b.cloud.declare(static_cast<Column>(c));
  }

  // Component footprints, fixed before any points are drawn.
  Rng layout(mix_seed(spec.seed, 0));
  std::vector<std::pair<double, double>> gravel_centers;
  if (spec.gravel.enabled) {
    for (int i = 0; i < spec.gravel.patches; ++i) {
      gravel_centers.emplace_back(uniform_real(layout, 0.0, spec.extent_x),
                                  uniform_real(layout, 0.0, spec.extent_y));
    }
  }
  struct Tree {
    double x, y;
    bool deciduous;
  };
  std::vector<Tree> tree_centers;
  if (spec.trees.enabled) {
    for (int i = 0; i < spec.trees.clusters; ++i) {
      Tree t;
      t.x = uniform_real(layout, 0.0, spec.extent_x);
      t.y = uniform_real(layout, 0.0, spec.extent_y);
      t.deciduous = uniform01(layout) < spec.trees.deciduous_fraction;
      tree_centers.push_back(t);
    }
  }

  const auto in_building = [&](double x, double y) {
    return spec.building.enabled && x >= spec.building.x &&
           x <= spec.building.x + spec.building.width && y >= spec.building.y &&
           y <= spec.building.y + spec.building.depth;
  };
  const auto in_water = [&](double x, double y) {
    return spec.water.enabled && x >= spec.water.x &&
           x <= spec.water.x + spec.water.width && y >= spec.water.y &&
           y <= spec.water.y + spec.water.depth;
  };
  const auto in_gravel = [&](double x, double y) {
    const double r2 = spec.gravel.radius * spec.gravel.radius;
    for (const auto& [cx, cy] : gravel_centers) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r2) return true;
    }
    return false;
  };

  // Ground and gravel share one uniform draw over the extent, so the two
  // classes are geometrically indistinguishable.
  if (spec.ground.enabled) {
    Rng rng(mix_seed(spec.seed, 1));
    const auto n = static_cast<std::size_t>(
        std::llround(spec.extent_x * spec.extent_y * spec.density));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = uniform_real(rng, 0.0, spec.extent_x);
      const double y = uniform_real(rng, 0.0, spec.extent_y);
      if (in_building(x, y) || in_water(x, y)) continue;
      const bool gravel = in_gravel(x, y);
      const double sigma = gravel ? spec.gravel.noise : spec.ground.noise;
      const double z = b.ground_z(x, y) + normal(rng, 0.0, sigma);
      b.emit(rng, x, y, z, gravel ? 3 : 2);
    }
  }

  if (spec.trees.enabled) {
    Rng rng(mix_seed(spec.seed, 2));
    const double crown_base = 1.0;
    const auto per_tree = static_cast<std::size_t>(std::llround(
        M_PI * spec.trees.radius * spec.trees.radius * spec.density * 3.0));
    for (const Tree& t : tree_centers) {
      const double zg = b.ground_z(t.x, t.y);
      for (std::size_t i = 0; i < per_tree; ++i) {
        const double h = uniform_real(rng, crown_base, spec.trees.height);
        // Coniferous crowns narrow toward the top.
        const double frac = (h - crown_base) / (spec.trees.height - crown_base);
        const double rmax =
            t.deciduous ? spec.trees.radius : spec.trees.radius * (1.0 - frac);
        const double rr = rmax * std::sqrt(uniform01(rng));
        const double ang = uniform_real(rng, 0.0, 2.0 * M_PI);
        const double x = t.x + rr * std::cos(ang);
        const double y = t.y + rr * std::sin(ang);
        if (x < 0 || x > spec.extent_x || y < 0 || y > spec.extent_y) continue;
        const int code = t.deciduous ? 5 : 6;
        const bool penetrates = uniform01(rng) < spec.trees.ground_echo_p;
        const int echo_count = penetrates ? 2 : 1;
        b.emit(rng, x, y, zg + h, code, 1, echo_count);
        if (penetrates) {
          b.emit(rng, x, y, b.ground_z(x, y) + normal(rng, 0.0, 0.03), 2, 2,
                 echo_count);
        }
      }
    }
  }

  if (spec.building.enabled) {
    Rng rng(mix_seed(spec.seed, 3));
    const BuildingSpec& bd = spec.building;
    const auto n_roof = static_cast<std::size_t>(
        std::llround(bd.width * bd.depth * spec.density));
    for (std::size_t i = 0; i < n_roof; ++i) {
      const double x = bd.x + uniform_real(rng, 0.0, bd.width);
      const double y = bd.y + uniform_real(rng, 0.0, bd.depth);
      const double z =
          b.ground_z(x, y) + bd.height + normal(rng, 0.0, bd.noise);
      b.emit(rng, x, y, z, 8);
    }
    if (bd.wall) {
      const double perimeter = 2.0 * (bd.width + bd.depth);
      const auto n_wall = static_cast<std::size_t>(
          std::llround(perimeter * bd.height * 2.0));
      for (std::size_t i = 0; i < n_wall; ++i) {
        double along = uniform_real(rng, 0.0, perimeter);
        double x, y;
        if (along < bd.width) {
          x = bd.x + along;
          y = bd.y;
        } else if (along < bd.width + bd.depth) {
          x = bd.x + bd.width;
          y = bd.y + (along - bd.width);
        } else if (along < 2.0 * bd.width + bd.depth) {
          x = bd.x + (along - bd.width - bd.depth);
          y = bd.y + bd.depth;
        } else {
          x = bd.x;
          y = bd.y + (along - 2.0 * bd.width - bd.depth);
        }
        const double z =
            b.ground_z(x, y) + uniform_real(rng, 0.0, bd.height) +
            normal(rng, 0.0, bd.noise);
        b.emit(rng, x, y, z, 24);
      }
    }
  }

  if (spec.power_line.enabled) {
    Rng rng(mix_seed(spec.seed, 4));
    const PowerLineSpec& pl = spec.power_line;
    const double dx = pl.x1 - pl.x0, dy = pl.y1 - pl.y0;
    const double length = std::sqrt(dx * dx + dy * dy);
    const auto n = static_cast<std::size_t>(
        std::max<long long>(2, std::llround(length / pl.spacing)));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = uniform01(rng);
      const double x = pl.x0 + t * dx;
      const double y = pl.y0 + t * dy;
      const double u = 2.0 * t - 1.0;
      const double z = b.ground_z(x, y) + pl.height -
                       pl.sag * (1.0 - u * u) + normal(rng, 0.0, pl.noise);
      b.emit(rng, x + normal(rng, 0.0, pl.noise),
             y + normal(rng, 0.0, pl.noise), z, 13);
    }
  }

  if (spec.water.enabled) {
    Rng rng(mix_seed(spec.seed, 5));
    const WaterSpec& w = spec.water;
    const auto n = static_cast<std::size_t>(std::llround(
        w.width * w.depth * spec.density * (1.0 - w.dropout)));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = w.x + uniform_real(rng, 0.0, w.width);
      const double y = w.y + uniform_real(rng, 0.0, w.depth);
      const double z = b.ground_z(x, y) + w.level + normal(rng, 0.0, 0.005);
      b.emit(rng, x, y, z, 9);
    }
  }

  if (spec.temporary.enabled) {
    Rng rng(mix_seed(spec.seed, 6));
    for (int obj = 0; obj < spec.temporary.objects; ++obj) {
      const double w = 4.0, d = 2.0, h = 1.5;
      const double ox = uniform_real(rng, 0.0, std::max(1e-9, spec.extent_x - w));
      const double oy = uniform_real(rng, 0.0, std::max(1e-9, spec.extent_y - d));
      const auto n = static_cast<std::size_t>(
          std::llround(w * d * spec.density));
      for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
        const double x = ox + uniform_real(rng, 0.0, w);
        const double y = oy + uniform_real(rng, 0.0, d);
        const double z = b.ground_z(x, y) + h + normal(rng, 0.0, 0.02);
        b.emit(rng, x, y, z, 11);
      }
    }
  }

  b.cloud.validate(ValidRanges{});
  return b.cloud;
}

// ---------------------------------------------------------------------------
// Border effect

PointCloud inject_border_effect(const PointCloud& cloud, double strength) {
  for (Column c : {Column::Vx, Column::Vy, Column::Vz}) {
    if (!cloud.has(c)) {
      throw std::invalid_argument(
          "border effect needs beam vectors; missing column " +
          std::string(column_name(c)));
    }
  }
  if (!cloud.has(Column::Amplitude)) {
    throw std::invalid_argument("border effect needs an amplitude column");
  }
  PointCloud out = cloud;
  if (strength == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.is_missing(Column::Amplitude, i) ||
        out.is_missing(Column::Vx, i) || out.is_missing(Column::Vy, i) ||
        out.is_missing(Column::Vz, i)) {
      continue;
    }
    const double vx = out.value(Column::Vx, i);
    const double vy = out.value(Column::Vy, i);
    const double vz = out.value(Column::Vz, i);
    if (vz == 0.0) continue;
    const double r =
        std::sqrt(vx * vx + vy * vy) / std::abs(vz) / kBorderTanRef;
    const double s = vx / std::abs(vz) / kBorderTanRef;
    const int code = out.has(Column::ClassCode) &&
                             !out.is_missing(Column::ClassCode, i)
                         ? static_cast<int>(out.value(Column::ClassCode, i))
                         : -1;
    // Two recoverable terms: one scales with the unsigned scan angle, one
    // with the signed across-track direction (only the beam vector reveals
    // the sign); plus irrecoverable angle-scaled noise.
    double angle_term = 0.0, signed_term = 0.0;
    if (code == 2) {
      angle_term = 60.0;
      signed_term = 20.0;
    } else if (code == 3) {
      angle_term = -60.0;
      signed_term = 20.0;
    }
    Rng noise(mix_seed(0x626f72646572ULL, i));
    const double delta = strength * (angle_term * r + signed_term * s +
                                     2.0 * r * normal(noise));
    const double amp =
        std::max(0.0, out.value(Column::Amplitude, i) + delta);
    out.set_value(Column::Amplitude, i, amp);
  }
  return out;
}

}  // namespace alsc
