#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alsc/cloud.hpp"

namespace alsc {

struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  std::map<int, int> sampled_counts;   // s_c per class
  std::map<int, double> weights;       // w_c = pi_c / q_c
  std::vector<std::string> notes;      // logged deviations (singleton promotion)
};

// Per-class quota s_c = min(floor(S_c/2), floor(k/|A|)); singleton classes
// are promoted to s_c = 1 so no class vanishes from the training set.
// labels[i] is the class of point i, or -1 for unlabeled.
SplitPlan stratified_sample(const std::vector<int>& labels, int k,
                            std::uint64_t seed);
SplitPlan stratified_sample(const PointCloud& cloud, int k, std::uint64_t seed);

// w_c = population fraction / sample fraction.
std::map<int, double> class_weights(const std::map<int, double>& population,
                                    const std::map<int, double>& sample);

// n ids drawn uniformly without replacement from [0, cloud_size).
// Result sorted ascending.
std::vector<int> simple_random_sample(std::size_t cloud_size, std::size_t n,
                                      std::uint64_t seed);

void write_split_plan(const SplitPlan& plan, const std::string& path);
SplitPlan read_split_plan(const std::string& path);

}  // namespace alsc
