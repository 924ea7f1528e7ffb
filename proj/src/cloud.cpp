#include "alsc/cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace alsc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// ClassTable

ClassTable ClassTable::standard() {
  ClassTable t;
  struct Row {
    int code;
    const char* name;
    int parent;
  };
  static const Row level1[] = {
      {0, "unclassified", -1},  {1, "undefined", -1},
      {2, "ground", -1},        {5, "vegetation", -1},
      {8, "building", -1},      {9, "water", -1},
      {10, "artificial objects", -1},
      {23, "technical", -1},    {20, "ground, vegetation", -1},
      {99, "error", -1}};
  static const Row level2[] = {
      {0, "unclassified", 0},
      {1, "undefined", 1},
      {2, "ground", 2},
      {18, "sand", 2},
      {3, "gravel", 2},
      {4, "stone, rock", 2},
      {22, "asphalt", 2},
      {21, "cement", 2},
      {28, "river dam, groyne", 2},
      {5, "deciduous forest", 5},
      {6, "coniferous forest", 5},
      {7, "mixed forest", 5},
      {8, "building roof", 8},
      {24, "wall, building wall", 8},
      {9, "water", 9},
      {10, "car, other moving object", 10},
      {11, "temporary object", 10},
      {12, "bridge", 10},
      {13, "power line", 10},
      {14, "tower, power pole", 10},
      {15, "bridge cable", 10},
      {16, "road protection fence", 10},
      {17, "bridge construction", 10},
      {23, "technical", 23},
      {20, "ground, vegetation", 20},
      {99, "error", 99}};
  for (const Row& r : level1) t.add({r.code, r.name, 1, -1});
  for (const Row& r : level2) t.add({r.code, r.name, 2, r.parent});
  return t;
}

void ClassTable::add(const ClassEntry& e) {
  auto& m = (e.level == 1) ? level1_ : level2_;
  if (m.count(e.code)) {
    throw std::invalid_argument("duplicate class code " + std::to_string(e.code));
  }
  if (e.level == 2 && !level1_.count(e.parent_code)) {
    throw std::invalid_argument("level-2 class " + std::to_string(e.code) +
                                " has unknown parent");
  }
  m[e.code] = e;
}

int ClassTable::parent_of(int level2_code) const {
  auto it = level2_.find(level2_code);
  if (it == level2_.end()) {
    throw std::out_of_range("unknown class code " + std::to_string(level2_code));
  }
  return it->second.parent_code;
}

const std::string& ClassTable::name2(int code) const {
  auto it = level2_.find(code);
  if (it == level2_.end()) {
    throw std::out_of_range("unknown class code " + std::to_string(code));
  }
  return it->second.name;
}

const std::string& ClassTable::name1(int code) const {
  auto it = level1_.find(code);
  if (it == level1_.end()) {
    throw std::out_of_range("unknown class code " + std::to_string(code));
  }
  return it->second.name;
}

std::vector<ClassEntry> ClassTable::entries(int level) const {
  std::vector<ClassEntry> out;
  const auto& m = (level == 1) ? level1_ : level2_;
  for (const auto& [code, e] : m) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// Columns

namespace {
const std::array<const char*, kNumColumns> kColumnNames = {
    "x",  "y",  "z",  "echo_id",     "echo_count", "amplitude",
    "echo_width", "reflectance", "vx", "vy", "vz", "class"};
}

const char* column_name(Column c) {
  return kColumnNames[static_cast<int>(c)];
}

std::optional<Column> column_from_name(const std::string& name) {
  for (int i = 0; i < kNumColumns; ++i) {
    if (name == kColumnNames[i]) return static_cast<Column>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// PointCloud

void PointCloud::declare(Column c) {
  const int i = static_cast<int>(c);
  if (declared_[i]) return;
  if (n_ > 0) {
    throw std::logic_error("cannot declare a column on a non-empty cloud");
  }
  declared_[i] = true;
}

void PointCloud::add_record(const PointRecord& r) {
  auto push = [&](Column c, std::optional<double> v) {
    const int i = static_cast<int>(c);
    if (!declared_[i]) {
      if (v.has_value()) {
        throw std::logic_error(std::string("undeclared column ") +
                               column_name(c));
      }
      return;
    }
    cols_[i].push_back(v.value_or(kNaN));
    valid_[i].push_back(v.has_value() ? 1 : 0);
  };
  push(Column::X, r.x);
  push(Column::Y, r.y);
  push(Column::Z, r.z);
  push(Column::EchoId, r.echo_id);
  push(Column::EchoCount, r.echo_count);
  push(Column::Amplitude, r.amplitude);
  push(Column::EchoWidth, r.echo_width);
  push(Column::Reflectance, r.reflectance);
  push(Column::Vx, r.vx);
  push(Column::Vy, r.vy);
  push(Column::Vz, r.vz);
  push(Column::ClassCode, r.class_code.has_value()
                              ? std::optional<double>(*r.class_code)
                              : std::nullopt);
  ++n_;
}

double PointCloud::value(Column c, std::size_t i) const {
  const int ci = static_cast<int>(c);
  if (!declared_[ci]) return kNaN;
  return cols_[ci][i];
}

bool PointCloud::is_missing(Column c, std::size_t i) const {
  const int ci = static_cast<int>(c);
  if (!declared_[ci]) return true;
  return std::isnan(cols_[ci][i]);
}

bool PointCloud::is_valid(Column c, std::size_t i) const {
  const int ci = static_cast<int>(c);
  if (!declared_[ci]) return false;
  return valid_[ci][i] != 0 && !std::isnan(cols_[ci][i]);
}

void PointCloud::set_value(Column c, std::size_t i, double v) {
  const int ci = static_cast<int>(c);
  if (!declared_[ci]) throw std::logic_error("column not declared");
  cols_[ci][i] = v;
  valid_[ci][i] = std::isnan(v) ? 0 : 1;
}

void PointCloud::set_valid(Column c, std::size_t i, bool valid) {
  const int ci = static_cast<int>(c);
  if (!declared_[ci]) throw std::logic_error("column not declared");
  valid_[ci][i] = valid ? 1 : 0;
}

Vec3 PointCloud::point(std::size_t i) const {
  return {cols_[0][i], cols_[1][i], cols_[2][i]};
}

std::optional<int> PointCloud::class_code(std::size_t i) const {
  if (!has(Column::ClassCode)) return std::nullopt;
  const double v = cols_[static_cast<int>(Column::ClassCode)][i];
  if (std::isnan(v)) return std::nullopt;
  return static_cast<int>(std::llround(v));
}

const std::vector<double>& PointCloud::column(Column c) const {
  return cols_[static_cast<int>(c)];
}

BoundingBox PointCloud::bounding_box() const {
  BoundingBox bb;
  if (n_ == 0) return bb;
  bb.min = bb.max = point(0);
  for (std::size_t i = 1; i < n_; ++i) {
    const Vec3 p = point(i);
    bb.min.x = std::min(bb.min.x, p.x);
    bb.min.y = std::min(bb.min.y, p.y);
    bb.min.z = std::min(bb.min.z, p.z);
    bb.max.x = std::max(bb.max.x, p.x);
    bb.max.y = std::max(bb.max.y, p.y);
    bb.max.z = std::max(bb.max.z, p.z);
  }
  return bb;
}

std::size_t PointCloud::validate(const ValidRanges& ranges) {
  std::size_t flagged = 0;
  auto check = [&](Column c, auto pred) {
    const int ci = static_cast<int>(c);
    if (!declared_[ci]) return;
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::isnan(cols_[ci][i])) continue;
      const bool ok = pred(i);
      if (!ok && valid_[ci][i]) ++flagged;
      valid_[ci][i] = ok ? 1 : 0;
    }
  };
  check(Column::Amplitude, [&](std::size_t i) {
    const double v = cols_[static_cast<int>(Column::Amplitude)][i];
    return v >= ranges.amplitude_min && v <= ranges.amplitude_max;
  });
  check(Column::EchoWidth, [&](std::size_t i) {
    const double v = cols_[static_cast<int>(Column::EchoWidth)][i];
    return v > ranges.echo_width_min && v <= ranges.echo_width_max;
  });
  check(Column::Reflectance, [&](std::size_t i) {
    const double v = cols_[static_cast<int>(Column::Reflectance)][i];
    return v >= ranges.reflectance_min && v <= ranges.reflectance_max;
  });
  // Echo ordinal consistency: 1 <= echo_id <= echo_count. Violations flag
  // both echo attributes.
  if (has(Column::EchoId) && has(Column::EchoCount)) {
    const auto& id = cols_[static_cast<int>(Column::EchoId)];
    const auto& cnt = cols_[static_cast<int>(Column::EchoCount)];
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::isnan(id[i]) || std::isnan(cnt[i])) continue;
      if (id[i] < 1.0 || id[i] > cnt[i]) {
        if (valid_[static_cast<int>(Column::EchoId)][i]) ++flagged;
        if (valid_[static_cast<int>(Column::EchoCount)][i]) ++flagged;
        valid_[static_cast<int>(Column::EchoId)][i] = 0;
        valid_[static_cast<int>(Column::EchoCount)][i] = 0;
      }
    }
  }
  // Beam must point downward; a horizontal or upward beam flags all
  // three components.
  if (has(Column::Vz)) {
    const auto& vz = cols_[static_cast<int>(Column::Vz)];
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::isnan(vz[i])) continue;
      if (vz[i] >= 0.0) {
        for (Column c : {Column::Vx, Column::Vy, Column::Vz}) {
          const int ci = static_cast<int>(c);
          if (declared_[ci] && valid_[ci][i]) {
            ++flagged;
            valid_[ci][i] = 0;
          }
        }
      }
    }
  }
  return flagged;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace {

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<Column> declared_columns(const PointCloud& cloud) {
  std::vector<Column> out;
  for (int i = 0; i < kNumColumns; ++i) {
    const Column c = static_cast<Column>(i);
    if (cloud.has(c)) out.push_back(c);
  }
  return out;
}

void finish_ingest(IngestResult& res, const ClassTable& table,
                   const ValidRanges& ranges) {
  res.report.records = res.cloud.size();
  res.report.invalid_values = res.cloud.validate(ranges);
  if (res.cloud.has(Column::ClassCode)) {
    for (std::size_t i = 0; i < res.cloud.size(); ++i) {
      const auto code = res.cloud.class_code(i);
      if (code && !table.has_level2(*code)) {
        throw std::runtime_error("unknown class code " + std::to_string(*code) +
                                 " at record " + std::to_string(i + 1));
      }
    }
  }
  if (res.report.invalid_values > 0) {
    res.report.warnings.push_back(
        std::to_string(res.report.invalid_values) +
        " attribute values flagged invalid (kept, treated as missing)");
  }
}

}  // namespace

IngestResult read_cloud_text(const std::string& path, const ClassTable& table,
                             const ValidRanges& ranges) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty file: " + path);

  std::vector<Column> cols;
  {
    std::istringstream hs(header);
    std::string name;
    while (hs >> name) {
      auto c = column_from_name(name);
      if (!c) throw std::runtime_error("unknown column '" + name + "'");
      cols.push_back(*c);
    }
  }
  auto have = [&](Column c) {
    return std::find(cols.begin(), cols.end(), c) != cols.end();
  };
  if (!have(Column::X) || !have(Column::Y) || !have(Column::Z)) {
    throw std::runtime_error("columns x, y, z are mandatory");
  }

  IngestResult res;
  for (Column c : cols) res.cloud.declare(c);

  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    PointRecord rec;
    bool bad = false;
    for (Column c : cols) {
      std::string tok;
      if (!(ls >> tok)) {
        bad = true;
        break;
      }
      std::optional<double> v;
      if (tok != "NA") {
        std::size_t used = 0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          bad = true;
          break;
        }
        if (used != tok.size()) {
          bad = true;
          break;
        }
      }
      switch (c) {
        case Column::X: rec.x = v.value_or(kNaN); if (!v) bad = true; break;
        case Column::Y: rec.y = v.value_or(kNaN); if (!v) bad = true; break;
        case Column::Z: rec.z = v.value_or(kNaN); if (!v) bad = true; break;
        case Column::EchoId: rec.echo_id = v; break;
        case Column::EchoCount: rec.echo_count = v; break;
        case Column::Amplitude: rec.amplitude = v; break;
        case Column::EchoWidth: rec.echo_width = v; break;
        case Column::Reflectance: rec.reflectance = v; break;
        case Column::Vx: rec.vx = v; break;
        case Column::Vy: rec.vy = v; break;
        case Column::Vz: rec.vz = v; break;
        case Column::ClassCode:
          if (v) rec.class_code = static_cast<int>(std::llround(*v));
          break;
        default: break;
      }
    }
    if (bad) {
      throw std::runtime_error(path + ": malformed row at line " +
                               std::to_string(lineno));
    }
    res.cloud.add_record(rec);
  }
  finish_ingest(res, table, ranges);
  return res;
}

void write_cloud_text(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto cols = declared_columns(cloud);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? " " : "") << column_name(cols[i]);
  }
  out << "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out << (c ? " " : "") << format_value(cloud.value(cols[c], i));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Binary I/O: "ALSC" + version(1) + u32 ncols + names + u64 nrows + columns

namespace {
constexpr char kMagic[4] = {'A', 'L', 'S', 'C'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 4);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 8);
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}
void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}
double get_f64(std::istream& in) {
  const std::uint64_t v = get_u64(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace

void write_cloud_binary(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  const auto cols = declared_columns(cloud);
  put_u32(out, static_cast<std::uint32_t>(cols.size()));
  for (Column c : cols) {
    const std::string name = column_name(c);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  put_u64(out, cloud.size());
  for (Column c : cols) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      put_f64(out, cloud.value(c, i));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

IngestResult read_cloud_binary(const std::string& path, const ClassTable& table,
                               const ValidRanges& ranges) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not an ALSC binary file");
  }
  const int version = in.get();
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported version");
  }
  const std::uint32_t ncols = get_u32(in);
  std::vector<Column> cols;
  for (std::uint32_t i = 0; i < ncols; ++i) {
    const std::uint32_t len = get_u32(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    auto c = column_from_name(name);
    if (!c) throw std::runtime_error(path + ": unknown column '" + name + "'");
    cols.push_back(*c);
  }
  const std::uint64_t nrows = get_u64(in);

  IngestResult res;
  for (Column c : cols) res.cloud.declare(c);
  // Assemble records row-wise from column-major data.
  std::vector<std::vector<double>> data(cols.size(),
                                        std::vector<double>(nrows));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::uint64_t i = 0; i < nrows; ++i) data[c][i] = get_f64(in);
  }
  if (!in) throw std::runtime_error(path + ": truncated file");
  for (std::uint64_t i = 0; i < nrows; ++i) {
    PointRecord rec;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = data[c][i];
      std::optional<double> ov;
      if (!std::isnan(v)) ov = v;
      switch (cols[c]) {
        case Column::X: rec.x = v; break;
        case Column::Y: rec.y = v; break;
        case Column::Z: rec.z = v; break;
        case Column::EchoId: rec.echo_id = ov; break;
        case Column::EchoCount: rec.echo_count = ov; break;
        case Column::Amplitude: rec.amplitude = ov; break;
        case Column::EchoWidth: rec.echo_width = ov; break;
        case Column::Reflectance: rec.reflectance = ov; break;
        case Column::Vx: rec.vx = ov; break;
        case Column::Vy: rec.vy = ov; break;
        case Column::Vz: rec.vz = ov; break;
        case Column::ClassCode:
          if (ov) rec.class_code = static_cast<int>(std::llround(*ov));
          break;
        default: break;
      }
    }
    res.cloud.add_record(rec);
  }
  finish_ingest(res, table, ranges);
  return res;
}

IngestResult read_cloud(const std::string& path, const ClassTable& table,
                        const ValidRanges& ranges) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagic, 4) == 0) {
    return read_cloud_binary(path, table, ranges);
  }
  return read_cloud_text(path, table, ranges);
}

// ---------------------------------------------------------------------------
// Breakdown

std::vector<BreakdownRow> class_breakdown(const PointCloud& cloud,
                                          const ClassTable& table, int level) {
  if (!cloud.has(Column::ClassCode)) {
    throw std::runtime_error("cloud carries no class labels");
  }
  std::map<int, std::size_t> counts;
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto code = cloud.class_code(i);
    if (!code) continue;
    ++labeled;
    counts[level == 1 ? table.parent_of(*code) : *code]++;
  }
  if (labeled == 0) throw std::runtime_error("cloud has no labeled points");
  std::vector<BreakdownRow> out;
  for (const auto& [code, n] : counts) {
    BreakdownRow row;
    row.code = code;
    row.name = (level == 1) ? table.name1(code) : table.name2(code);
    row.count = n;
    row.fraction = static_cast<double>(n) / static_cast<double>(labeled);
    out.push_back(row);
  }
  return out;
}

PointCloud subset_cloud(const PointCloud& cloud, const std::vector<int>& ids) {
  PointCloud out;
  for (int c = 0; c < kNumColumns; ++c) {
    if (cloud.has(static_cast<Column>(c))) out.declare(static_cast<Column>(c));
  }
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cloud.size()) {
      throw std::invalid_argument("subset id out of range");
    }
    const auto i = static_cast<std::size_t>(id);
    PointRecord r;
    r.x = cloud.value(Column::X, i);
    r.y = cloud.value(Column::Y, i);
    r.z = cloud.value(Column::Z, i);
    const auto opt = [&](Column c) -> std::optional<double> {
      if (!cloud.has(c) || cloud.is_missing(c, i)) return std::nullopt;
      return cloud.value(c, i);
    };
    r.echo_id = opt(Column::EchoId);
    r.echo_count = opt(Column::EchoCount);
    r.amplitude = opt(Column::Amplitude);
    r.echo_width = opt(Column::EchoWidth);
    r.reflectance = opt(Column::Reflectance);
    r.vx = opt(Column::Vx);
    r.vy = opt(Column::Vy);
    r.vz = opt(Column::Vz);
    r.class_code = cloud.class_code(i);
    out.add_record(r);
    // Preserve range-validation flags.
    for (int c = 0; c < kNumColumns; ++c) {
      const auto col = static_cast<Column>(c);
      if (out.has(col) && !out.is_missing(col, out.size() - 1)) {
        out.set_valid(col, out.size() - 1, cloud.is_valid(col, i));
      }
    }
  }
  return out;
}

}  // namespace alsc
