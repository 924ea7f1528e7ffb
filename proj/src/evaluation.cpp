#include "alsc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace alsc {

ConfusionMatrix::ConfusionMatrix(std::vector<int> codes)
    : codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  counts_.assign(codes_.size() * codes_.size(), 0);
}

int ConfusionMatrix::slot(int code) const {
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) {
    throw std::out_of_range("class code " + std::to_string(code) +
                            " not in confusion matrix");
  }
  return static_cast<int>(it - codes_.begin());
}

void ConfusionMatrix::add(int true_code, int predicted_code, std::int64_t n) {
  counts_[slot(true_code) * codes_.size() + slot(predicted_code)] += n;
  total_ += n;
}

std::int64_t ConfusionMatrix::at(int true_code, int predicted_code) const {
  return counts_[slot(true_code) * codes_.size() + slot(predicted_code)];
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    t += counts_[i * codes_.size() + i];
  }
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("truth/prediction length mismatch");
  }
  std::vector<int> codes(truth);
  codes.insert(codes.end(), predicted.begin(), predicted.end());
  ConfusionMatrix m(std::move(codes));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m.add(truth[i], predicted[i]);
  }
  return m;
}

double mcr(const ConfusionMatrix& m) {
  if (m.total() == 0) throw std::invalid_argument("empty confusion matrix");
  return 1.0 - static_cast<double>(m.trace()) / static_cast<double>(m.total());
}

std::vector<BootstrapPoint> bootstrap_mcr(const PipelineFn& pipeline,
                                          const std::vector<int>& labels,
                                          const std::vector<int>& sizes,
                                          int replications,
                                          std::uint64_t seed) {
  if (replications < 2) {
    throw std::invalid_argument("replications must be >= 2");
  }
  std::size_t labeled = 0;
  for (int l : labels) {
    if (l >= 0) ++labeled;
  }
  std::vector<BootstrapPoint> out;
  for (int size : sizes) {
    if (static_cast<std::size_t>(size) > labeled) {
      throw std::invalid_argument("training size exceeds labeled point count");
    }
    double sum = 0.0, sumsq = 0.0;
    for (int rep = 0; rep < replications; ++rep) {
      const SplitPlan plan =
          stratified_sample(labels, size, seed + static_cast<std::uint64_t>(rep));
      const double e = pipeline(plan);
      sum += e;
      sumsq += e * e;
    }
    BootstrapPoint p;
    p.size = size;
    p.mean_mcr = sum / replications;
    const double var =
        (sumsq - sum * sum / replications) / (replications - 1);
    p.sd_mcr = std::sqrt(std::max(0.0, var));
    out.push_back(p);
  }
  return out;
}

std::vector<ReportEntry> confusion_report(const ConfusionMatrix& m,
                                          const ClassTable& table) {
  std::vector<ReportEntry> out;
  for (int tc : m.codes()) {
    std::int64_t row_total = 0;
    for (int pc : m.codes()) row_total += m.at(tc, pc);
    if (row_total == 0) continue;
    ReportEntry entry;
    entry.true_code = tc;
    entry.true_name = table.has_level2(tc) ? table.name2(tc)
                                           : std::to_string(tc);
    std::vector<std::pair<std::int64_t, int>> preds;  // (count, code)
    for (int pc : m.codes()) {
      const std::int64_t c = m.at(tc, pc);
      if (c > 0) preds.emplace_back(c, pc);
    }
    std::sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [count, code] : preds) {
      const int pct = static_cast<int>(
          std::llround(100.0 * static_cast<double>(count) / row_total));
      entry.predicted.emplace_back(
          table.has_level2(code) ? table.name2(code) : std::to_string(code),
          pct);
    }
    out.push_back(entry);
  }
  return out;
}

std::string format_confusion_report(const std::vector<ReportEntry>& report) {
  std::ostringstream out;
  for (const ReportEntry& e : report) {
    out << e.true_name << ":";
    for (const auto& [name, pct] : e.predicted) {
      out << " " << name << " (" << pct << "%)";
    }
    out << "\n";
  }
  return out.str();
}

void write_confusion(const ConfusionMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "true\\pred";
  for (int c : m.codes()) out << " " << c;
  out << "\n";
  for (int tc : m.codes()) {
    out << tc;
    for (int pc : m.codes()) out << " " << m.at(tc, pc);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace alsc
