#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alsc/geometry.hpp"

namespace alsc {

// ---------------------------------------------------------------------------
// Class taxonomy

struct ClassEntry {
  int code = 0;
  std::string name;
  int level = 2;                 // 1 or 2
  int parent_code = -1;          // level-2 entries only
};

class ClassTable {
 public:
  // Two-level land-cover taxonomy used throughout the toolkit.
  static ClassTable standard();

  void add(const ClassEntry& e);

  bool has_level2(int code) const { return level2_.count(code) > 0; }
  bool has_level1(int code) const { return level1_.count(code) > 0; }
  // Level-1 parent of a level-2 code.
  int parent_of(int level2_code) const;
  const std::string& name2(int code) const;
  const std::string& name1(int code) const;
  std::vector<ClassEntry> entries(int level) const;

 private:
  std::map<int, ClassEntry> level1_;
  std::map<int, ClassEntry> level2_;
};

// ---------------------------------------------------------------------------
// Point cloud (columnar storage, uniform schema)

enum class Column : int {
  X = 0,
  Y,
  Z,
  EchoId,
  EchoCount,
  Amplitude,
  EchoWidth,
  Reflectance,
  Vx,
  Vy,
  Vz,
  ClassCode,
  Count
};

constexpr int kNumColumns = static_cast<int>(Column::Count);

const char* column_name(Column c);
std::optional<Column> column_from_name(const std::string& name);

// Configurable physical plausibility ranges. Out-of-range values are kept
// but flagged invalid; the classifier then treats them as missing.
struct ValidRanges {
  double amplitude_min = 0.0;
  double amplitude_max = 1e30;
  double echo_width_min = 0.0;   // exclusive
  double echo_width_max = 1e30;
  double reflectance_min = 0.0;
  double reflectance_max = 2.0;
};

struct PointRecord {
  double x = 0, y = 0, z = 0;
  std::optional<double> echo_id, echo_count;
  std::optional<double> amplitude, echo_width, reflectance;
  std::optional<double> vx, vy, vz;
  std::optional<int> class_code;
};

struct BoundingBox {
  Vec3 min, max;
};

class PointCloud {
 public:
  PointCloud() = default;

  // Declares the column set. x,y,z are always declared.
  void declare(Column c);
  bool has(Column c) const { return declared_[static_cast<int>(c)]; }

  void add_record(const PointRecord& r);
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  double value(Column c, std::size_t i) const;        // NaN when missing
  bool is_missing(Column c, std::size_t i) const;
  bool is_valid(Column c, std::size_t i) const;       // present and in range
  void set_value(Column c, std::size_t i, double v);
  void set_valid(Column c, std::size_t i, bool valid);

  Vec3 point(std::size_t i) const;
  std::optional<int> class_code(std::size_t i) const;

  const std::vector<double>& column(Column c) const;

  BoundingBox bounding_box() const;

  // Re-applies range validation to all optional attributes; returns the
  // number of entries flagged invalid. Also enforces the echo ordinal and
  // downward-beam rules.
  std::size_t validate(const ValidRanges& ranges);

 private:
  std::size_t n_ = 0;
  bool declared_[kNumColumns] = {true, true, true, false, false, false,
                                 false, false, false, false, false, false};
  std::vector<double> cols_[kNumColumns];
  std::vector<std::uint8_t> valid_[kNumColumns];
};

// ---------------------------------------------------------------------------
// Ingest / serialize

struct IngestReport {
  std::size_t records = 0;
  std::size_t invalid_values = 0;
  std::vector<std::string> warnings;
};

struct IngestResult {
  PointCloud cloud;
  IngestReport report;
};

// Delimited text: first line column names, whitespace separated, "NA" for
// missing, decimal point '.'. Binary: magic "ALSC", version byte, column
// table, then little-endian 64-bit floats per column (NaN encodes NA).
IngestResult read_cloud_text(const std::string& path, const ClassTable& table,
                             const ValidRanges& ranges = ValidRanges{});
IngestResult read_cloud_binary(const std::string& path, const ClassTable& table,
                               const ValidRanges& ranges = ValidRanges{});
// Dispatches on the magic bytes.
IngestResult read_cloud(const std::string& path, const ClassTable& table,
                        const ValidRanges& ranges = ValidRanges{});

void write_cloud_text(const PointCloud& cloud, const std::string& path);
void write_cloud_binary(const PointCloud& cloud, const std::string& path);

// ---------------------------------------------------------------------------
// Class breakdown

struct BreakdownRow {
  int code = 0;
  std::string name;
  std::size_t count = 0;
  double fraction = 0.0;
};

std::vector<BreakdownRow> class_breakdown(const PointCloud& cloud,
                                          const ClassTable& table, int level);

// New cloud holding the given points (same declared columns, given order).
PointCloud subset_cloud(const PointCloud& cloud, const std::vector<int>& ids);

}  // namespace alsc
