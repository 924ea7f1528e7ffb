#include "alsc/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alsc/random.hpp"

namespace alsc {

SplitPlan stratified_sample(const std::vector<int>& labels, int k,
                            std::uint64_t seed) {
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) by_class[labels[i]].push_back(static_cast<int>(i));
  }
  if (by_class.empty()) throw std::invalid_argument("no labeled points");
  const int n_classes = static_cast<int>(by_class.size());
  if (k < n_classes) {
    throw std::invalid_argument("target size k below class count");
  }

  SplitPlan plan;
  plan.seed = seed;
  Rng rng(seed);
  const int per_class_cap = k / n_classes;
  for (auto& [code, ids] : by_class) {
    const int s_avail = static_cast<int>(ids.size());
    int s = std::min(s_avail / 2, per_class_cap);
    if (s_avail == 1 && s == 0) {
      s = 1;
      plan.notes.push_back("class " + std::to_string(code) +
                           ": singleton promoted into training set");
    }
    plan.sampled_counts[code] = s;
    auto drawn = sample_without_replacement(rng, ids, s);
    std::sort(drawn.begin(), drawn.end());
    plan.train_ids.insert(plan.train_ids.end(), drawn.begin(), drawn.end());
  }
  std::sort(plan.train_ids.begin(), plan.train_ids.end());

  std::vector<char> in_train(labels.size(), 0);
  for (int id : plan.train_ids) in_train[id] = 1;
  for (const auto& [code, ids] : by_class) {
    for (int id : ids) {
      if (!in_train[id]) plan.test_ids.push_back(id);
    }
  }
  std::sort(plan.test_ids.begin(), plan.test_ids.end());

  // Correction weights for the stratification bias.
  std::size_t total = 0, sampled = 0;
  for (const auto& [code, ids] : by_class) total += ids.size();
  for (const auto& [code, s] : plan.sampled_counts) sampled += s;
  for (const auto& [code, ids] : by_class) {
    const double pi = static_cast<double>(ids.size()) / total;
    const double q =
        static_cast<double>(plan.sampled_counts[code]) / sampled;
    plan.weights[code] = pi / q;
  }
  return plan;
}

SplitPlan stratified_sample(const PointCloud& cloud, int k,
                            std::uint64_t seed) {
  std::vector<int> labels(cloud.size(), -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto code = cloud.class_code(i);
    if (code) labels[i] = *code;
  }
  return stratified_sample(labels, k, seed);
}

std::map<int, double> class_weights(const std::map<int, double>& population,
                                    const std::map<int, double>& sample) {
  std::map<int, double> w;
  for (const auto& [code, q] : sample) {
    auto it = population.find(code);
    if (it == population.end()) {
      throw std::invalid_argument("class " + std::to_string(code) +
                                  " in sample but not in population");
    }
    if (q <= 0.0) {
      throw std::invalid_argument("sample fraction must be > 0");
    }
    w[code] = it->second / q;
  }
  return w;
}

std::vector<int> simple_random_sample(std::size_t cloud_size, std::size_t n,
                                      std::uint64_t seed) {
  if (n > cloud_size) throw std::invalid_argument("sample larger than cloud");
  std::vector<int> pool(cloud_size);
  for (std::size_t i = 0; i < cloud_size; ++i) pool[i] = static_cast<int>(i);
  Rng rng(seed);
  auto out = sample_without_replacement(rng, std::move(pool), n);
  std::sort(out.begin(), out.end());
  return out;
}

void write_split_plan(const SplitPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "seed " << plan.seed << "\n";
  for (const auto& [code, s] : plan.sampled_counts) {
    out << "class " << code << " sampled " << s << " weight ";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", plan.weights.at(code));
    out << buf << "\n";
  }
  for (const auto& note : plan.notes) out << "note " << note << "\n";
  out << "train " << plan.train_ids.size() << "\n";
  for (int id : plan.train_ids) out << id << "\n";
  out << "test " << plan.test_ids.size() << "\n";
  for (int id : plan.test_ids) out << id << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

SplitPlan read_split_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SplitPlan plan;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "seed") {
      ls >> plan.seed;
    } else if (kw == "class") {
      int code, s;
      double w;
      std::string tmp;
      ls >> code >> tmp >> s >> tmp >> w;
      plan.sampled_counts[code] = s;
      plan.weights[code] = w;
    } else if (kw == "note") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      plan.notes.push_back(rest);
    } else if (kw == "train" || kw == "test") {
      std::size_t count;
      ls >> count;
      auto& ids = (kw == "train") ? plan.train_ids : plan.test_ids;
      ids.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) {
          throw std::runtime_error(path + ": truncated id list");
        }
        ids.push_back(std::stoi(line));
      }
    }
  }
  return plan;
}

}  // namespace alsc
