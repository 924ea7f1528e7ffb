#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alsc/features.hpp"

namespace alsc {

// Gini impurity of a class-fraction vector. Fractions must be nonnegative
// and sum to 1 within 1e-9.
double gini(const std::vector<double>& fractions);

struct Surrogate {
  int feature = -1;
  double threshold = 0.0;
  bool le_left = true;       // value <= threshold sends the case left
  double agreement = 0.0;    // weighted agreement with the primary split
};

struct TreeNode {
  bool leaf = true;
  // Primary rule: value <= threshold goes left.
  int feature = -1;
  double threshold = 0.0;
  std::vector<Surrogate> surrogates;
  bool majority_left = true;  // fallback when every split feature is missing
  int left = -1, right = -1;
  int label_slot = 0;              // argmax of counts, ties to smaller code
  std::vector<double> counts;      // weighted class counts, per slot
  double weight = 0.0;
  double gini_impurity = 0.0;
  int depth = 0;
};

struct GrowControls {
  int min_node_size = 20;
  double min_rel_decrease = 1e-4;  // relative to the root's weighted Gini cost
  int max_depth = 30;
  int max_surrogates = 5;
  int cv_folds = 10;
};

struct ComplexityRow {
  double alpha = 0.0;
  int leaves = 0;
  double resub_error = 0.0;
  double cv_error = 0.0;
  double cv_se = 0.0;
};

struct TrainingData {
  const FeatureMatrix* features = nullptr;
  std::vector<int> labels;       // class code per matrix row, -1 unlabeled
  std::vector<double> weights;   // case weight per matrix row
};

class ClassificationTree {
 public:
  std::vector<int> class_codes;            // slot -> code, ascending
  std::vector<std::string> feature_names;  // column order at training time
  std::vector<TreeNode> nodes;             // preorder, 0 = root
  std::vector<ComplexityRow> complexity;   // filled by prune()

  bool empty() const { return nodes.empty(); }
  std::size_t leaf_count() const;

  // Maps this tree's feature names onto a matrix's columns.
  // Throws when a required column is absent.
  std::vector<int> map_columns(const FeatureMatrix& fm) const;
  int predict_row(const FeatureMatrix& fm, std::size_t row,
                  const std::vector<int>& colmap) const;
  std::vector<int> predict(const FeatureMatrix& fm) const;
  std::vector<int> predict(const FeatureMatrix& fm,
                           const std::vector<int>& row_ids) const;
};

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;  // weighted Gini decrease over present rows
};

// Exhaustive univariate search over midpoint thresholds; missing values are
// excluded from each candidate's evaluation. Returns found=false when no
// candidate achieves decrease > min_decrease.
SplitCandidate best_split(const TrainingData& data,
                          const std::vector<int>& row_ids, int n_classes,
                          const std::vector<int>& label_slots,
                          double min_decrease);

ClassificationTree grow(const TrainingData& data,
                        const std::vector<int>& row_ids,
                        const GrowControls& controls = GrowControls{});

// Cost-complexity pruning with cross-validation and the 1-SE rule.
ClassificationTree prune(const ClassificationTree& tree,
                         const TrainingData& data,
                         const std::vector<int>& row_ids, int folds,
                         std::uint64_t seed,
                         const GrowControls& controls = GrowControls{});

std::string tree_to_text(const ClassificationTree& tree);
ClassificationTree tree_from_text(const std::string& text);
void write_tree(const ClassificationTree& tree, const std::string& path);
ClassificationTree read_tree(const std::string& path);

}  // namespace alsc
