#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "alsc/cloud.hpp"
#include "alsc/sampling.hpp"

namespace alsc {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<int> codes);

  void add(int true_code, int predicted_code, std::int64_t n = 1);
  std::int64_t at(int true_code, int predicted_code) const;
  std::int64_t total() const { return total_; }
  std::int64_t trace() const;
  const std::vector<int>& codes() const { return codes_; }

 private:
  int slot(int code) const;
  std::vector<int> codes_;
  std::vector<std::int64_t> counts_;  // row-major true x predicted
  std::int64_t total_ = 0;
};

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted);

// 1 - trace(M)/J.
double mcr(const ConfusionMatrix& m);

struct BootstrapPoint {
  int size = 0;
  double mean_mcr = 0.0;
  double sd_mcr = 0.0;
};

// Trains and evaluates on a given split; returns held-out MCR.
using PipelineFn = std::function<double(const SplitPlan&)>;

// For each training size, draws `replications` independent stratified
// splits (seed + replication index) and reports mean/sd of held-out MCR.
std::vector<BootstrapPoint> bootstrap_mcr(const PipelineFn& pipeline,
                                          const std::vector<int>& labels,
                                          const std::vector<int>& sizes,
                                          int replications,
                                          std::uint64_t seed);

struct ReportEntry {
  int true_code = 0;
  std::string true_name;
  // (predicted name, whole percent), descending.
  std::vector<std::pair<std::string, int>> predicted;
};

std::vector<ReportEntry> confusion_report(const ConfusionMatrix& m,
                                          const ClassTable& table);
std::string format_confusion_report(const std::vector<ReportEntry>& report);

void write_confusion(const ConfusionMatrix& m, const std::string& path);

}  // namespace alsc
