#include "alsc/cart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "alsc/random.hpp"

namespace alsc {

namespace {
constexpr double kEps = 1e-12;
}

double gini(const std::vector<double>& fractions) {
  double sum = 0.0, sq = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("negative class fraction");
    sum += f;
    sq += f * f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("class fractions must sum to 1");
  }
  return 1.0 - sq;
}

// ---------------------------------------------------------------------------
// Splitting

SplitCandidate best_split(const TrainingData& data,
                          const std::vector<int>& row_ids, int n_classes,
                          const std::vector<int>& label_slots,
                          double min_decrease) {
  const FeatureMatrix& fm = *data.features;
  const int n_features = static_cast<int>(fm.columns.size());

  SplitCandidate best;
  std::vector<std::pair<double, int>> vals;  // (value, row)
  std::vector<double> left(n_classes), right(n_classes);

  // Features and thresholds are scanned in ascending order, so keeping only
  // strict improvements realizes the (feature index, threshold) tie rule.
  for (int f = 0; f < n_features; ++f) {
    vals.clear();
    std::fill(right.begin(), right.end(), 0.0);
    double w_present = 0.0, sq_present = 0.0;
    for (int r : row_ids) {
      const double v = fm.at(r, f);
      if (std::isnan(v)) continue;
      vals.emplace_back(v, r);
      right[label_slots[r]] += data.weights[r];
    }
    if (vals.size() < 2) continue;
    std::sort(vals.begin(), vals.end());
    for (double c : right) {
      w_present += c;
      sq_present += c * c;
    }
    if (w_present <= 0.0) continue;
    const double parent_term = sq_present / w_present;

    std::fill(left.begin(), left.end(), 0.0);
    double w_left = 0.0, sq_left = 0.0, sq_right = sq_present;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const auto& [v, r] = vals[i];
      const int slot = label_slots[r];
      const double w = data.weights[r];
      // Incremental sum-of-squares updates on both sides.
      sq_left += w * (2.0 * left[slot] + w);
      sq_right += w * (w - 2.0 * right[slot]);
      left[slot] += w;
      right[slot] -= w;
      w_left += w;
      if (v == vals[i + 1].first) continue;
      const double w_right = w_present - w_left;
      if (w_left <= 0.0 || w_right <= 0.0) continue;
      const double decrease =
          sq_left / w_left + std::max(sq_right, 0.0) / w_right - parent_term;
      if (decrease > min_decrease && decrease > best.decrease + kEps) {
        best.found = true;
        best.feature = f;
        best.threshold = v + (vals[i + 1].first - v) / 2.0;
        best.decrease = decrease;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Growing

namespace {

struct Grower {
  const TrainingData& data;
  const GrowControls& controls;
  std::vector<int> label_slots;  // per matrix row
  int n_classes = 0;
  double min_decrease_abs = 0.0;
  ClassificationTree tree;

  explicit Grower(const TrainingData& d, const GrowControls& c)
      : data(d), controls(c) {}

  bool route_left(const TreeNode& node, int row) const {
    const FeatureMatrix& fm = *data.features;
    const double v = fm.at(row, node.feature);
    if (!std::isnan(v)) return v <= node.threshold;
    for (const Surrogate& s : node.surrogates) {
      const double sv = fm.at(row, s.feature);
      if (!std::isnan(sv)) return (sv <= s.threshold) == s.le_left;
    }
    return node.majority_left;
  }

  void fill_stats(TreeNode& node, const std::vector<int>& rows) const {
    node.counts.assign(n_classes, 0.0);
    for (int r : rows) node.counts[label_slots[r]] += data.weights[r];
    node.weight = 0.0;
    double sq = 0.0;
    for (double c : node.counts) {
      node.weight += c;
      sq += c * c;
    }
    node.gini_impurity =
        node.weight > 0.0 ? 1.0 - sq / (node.weight * node.weight) : 0.0;
    node.label_slot = static_cast<int>(
        std::max_element(node.counts.begin(), node.counts.end()) -
        node.counts.begin());
  }

  void compute_surrogates(TreeNode& node, const std::vector<int>& rows) const {
    const FeatureMatrix& fm = *data.features;
    const int n_features = static_cast<int>(fm.columns.size());

    // Primary direction over rows where the split feature is present.
    std::vector<std::pair<int, bool>> dir;  // (row, goes_left)
    double wl = 0.0, wr = 0.0;
    for (int r : rows) {
      const double v = fm.at(r, node.feature);
      if (std::isnan(v)) continue;
      const bool l = v <= node.threshold;
      dir.emplace_back(r, l);
      (l ? wl : wr) += data.weights[r];
    }
    node.majority_left = wl >= wr;
    if (controls.max_surrogates <= 0) return;

    std::vector<Surrogate> found;
    std::vector<std::tuple<double, bool, double>> vals;  // (value, left, w)
    for (int g = 0; g < n_features; ++g) {
      if (g == node.feature) continue;
      vals.clear();
      double tl = 0.0, tr = 0.0;
      for (const auto& [r, l] : dir) {
        const double v = fm.at(r, g);
        if (std::isnan(v)) continue;
        vals.emplace_back(v, l, data.weights[r]);
        (l ? tl : tr) += data.weights[r];
      }
      if (vals.size() < 2) continue;
      const double total = tl + tr;
      if (total <= 0.0) continue;
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) {
                  return std::get<0>(a) < std::get<0>(b);
                });
      const double baseline = std::max(tl, tr) / total;
      double pl = 0.0, pr = 0.0;
      double best_agree = 0.0, best_thr = 0.0;
      bool best_le_left = true, any = false;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        const auto& [v, l, w] = vals[i];
        (l ? pl : pr) += w;
        if (v == std::get<0>(vals[i + 1])) continue;
        const double agree_ll = (pl + (tr - pr)) / total;
        const double agree_lr = (pr + (tl - pl)) / total;
        const double thr = v + (std::get<0>(vals[i + 1]) - v) / 2.0;
        if (agree_ll > best_agree + kEps) {
          best_agree = agree_ll;
          best_thr = thr;
          best_le_left = true;
          any = true;
        }
        if (agree_lr > best_agree + kEps) {
          best_agree = agree_lr;
          best_thr = thr;
          best_le_left = false;
          any = true;
        }
      }
      if (any && best_agree > baseline + kEps) {
        found.push_back({g, best_thr, best_le_left, best_agree});
      }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Surrogate& a, const Surrogate& b) {
                       return a.agreement > b.agreement;
                     });
    if (static_cast<int>(found.size()) > controls.max_surrogates) {
      found.resize(controls.max_surrogates);
    }
    node.surrogates = std::move(found);
  }

  int build(const std::vector<int>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].depth = depth;
    fill_stats(tree.nodes[index], rows);

    if (depth >= controls.max_depth ||
        static_cast<int>(rows.size()) < controls.min_node_size ||
        tree.nodes[index].gini_impurity <= 0.0) {
      return index;
    }
    const SplitCandidate sc =
        best_split(data, rows, n_classes, label_slots, min_decrease_abs);
    if (!sc.found) return index;

    tree.nodes[index].leaf = false;
    tree.nodes[index].feature = sc.feature;
    tree.nodes[index].threshold = sc.threshold;
    compute_surrogates(tree.nodes[index], rows);

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      (route_left(tree.nodes[index], r) ? left_rows : right_rows).push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) {
      tree.nodes[index].leaf = true;
      tree.nodes[index].feature = -1;
      tree.nodes[index].surrogates.clear();
      return index;
    }
    const int li = build(left_rows, depth + 1);
    const int ri = build(right_rows, depth + 1);
    tree.nodes[index].left = li;
    tree.nodes[index].right = ri;
    return index;
  }
};

}  // namespace

ClassificationTree grow(const TrainingData& data,
                        const std::vector<int>& row_ids,
                        const GrowControls& controls) {
  if (row_ids.empty()) throw std::invalid_argument("empty training set");
  Grower g(data, controls);
  // Class slots, ascending code order.
  for (int r : row_ids) {
    if (data.labels[r] < 0) {
      throw std::invalid_argument("unlabeled row in training set");
    }
    g.tree.class_codes.push_back(data.labels[r]);
  }
  std::sort(g.tree.class_codes.begin(), g.tree.class_codes.end());
  g.tree.class_codes.erase(
      std::unique(g.tree.class_codes.begin(), g.tree.class_codes.end()),
      g.tree.class_codes.end());
  g.n_classes = static_cast<int>(g.tree.class_codes.size());
  g.label_slots.assign(data.labels.size(), -1);
  for (std::size_t r = 0; r < data.labels.size(); ++r) {
    if (data.labels[r] < 0) continue;
    const auto it = std::lower_bound(g.tree.class_codes.begin(),
                                     g.tree.class_codes.end(), data.labels[r]);
    if (it != g.tree.class_codes.end() && *it == data.labels[r]) {
      g.label_slots[r] =
          static_cast<int>(it - g.tree.class_codes.begin());
    }
  }
  g.tree.feature_names = data.features->columns;

  // Root cost anchors the relative-decrease stopping rule.
  TreeNode root_stats;
  g.fill_stats(root_stats, row_ids);
  g.min_decrease_abs =
      std::max(kEps, controls.min_rel_decrease * root_stats.weight *
                         root_stats.gini_impurity);

  g.build(row_ids, 0);
  return g.tree;
}

// ---------------------------------------------------------------------------
// Prediction

std::size_t ClassificationTree::leaf_count() const {
  std::size_t n = 0;
  for (const TreeNode& node : nodes) {
    if (node.leaf) ++n;
  }
  return n;
}

std::vector<int> ClassificationTree::map_columns(const FeatureMatrix& fm) const {
  std::vector<int> map;
  map.reserve(feature_names.size());
  for (const std::string& name : feature_names) {
    const int c = fm.col_index(name);
    if (c < 0) {
      throw std::runtime_error("feature matrix lacks column '" + name +
                               "' required by the tree");
    }
    map.push_back(c);
  }
  return map;
}

int ClassificationTree::predict_row(const FeatureMatrix& fm, std::size_t row,
                                    const std::vector<int>& colmap) const {
  int i = 0;
  while (!nodes[i].leaf) {
    const TreeNode& node = nodes[i];
    bool go_left = node.majority_left;
    const double v = fm.at(row, colmap[node.feature]);
    if (!std::isnan(v)) {
      go_left = v <= node.threshold;
    } else {
      bool decided = false;
      for (const Surrogate& s : node.surrogates) {
        const double sv = fm.at(row, colmap[s.feature]);
        if (!std::isnan(sv)) {
          go_left = (sv <= s.threshold) == s.le_left;
          decided = true;
          break;
        }
      }
      if (!decided) go_left = node.majority_left;
    }
    i = go_left ? node.left : node.right;
  }
  return class_codes[nodes[i].label_slot];
}

std::vector<int> ClassificationTree::predict(const FeatureMatrix& fm) const {
  const auto colmap = map_columns(fm);
  std::vector<int> out(fm.rows);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    out[r] = predict_row(fm, r, colmap);
  }
  return out;
}

std::vector<int> ClassificationTree::predict(
    const FeatureMatrix& fm, const std::vector<int>& row_ids) const {
  const auto colmap = map_columns(fm);
  std::vector<int> out;
  out.reserve(row_ids.size());
  for (int r : row_ids) out.push_back(predict_row(fm, r, colmap));
  return out;
}

// ---------------------------------------------------------------------------
// Cost-complexity pruning

namespace {

// Error mass of a node taken as a leaf.
double node_error(const TreeNode& n) {
  return n.weight - *std::max_element(n.counts.begin(), n.counts.end());
}

struct PruneWork {
  std::vector<TreeNode> nodes;  // leaf flags are mutated in place

  void subtree_stats(int i, double& err, int& leaves) const {
    if (nodes[i].leaf) {
      err = node_error(nodes[i]);
      leaves = 1;
      return;
    }
    double el, er;
    int ll, lr;
    subtree_stats(nodes[i].left, el, ll);
    subtree_stats(nodes[i].right, er, lr);
    err = el + er;
    leaves = ll + lr;
  }

  // Weakest-link value per internal node; infinity for leaves.
  double link_value(int i) const {
    if (nodes[i].leaf) return std::numeric_limits<double>::infinity();
    double err;
    int leaves;
    subtree_stats(i, err, leaves);
    if (leaves <= 1) return std::numeric_limits<double>::infinity();
    return (node_error(nodes[i]) - err) / (leaves - 1);
  }

  double min_link(int& argmin) const {
    double m = std::numeric_limits<double>::infinity();
    argmin = -1;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const double g = link_value(i);
      if (g < m) {
        m = g;
        argmin = i;
      }
    }
    return m;
  }

  // Weakest-link pruning: repeatedly collapse the node(s) with the
  // smallest link value until that value exceeds alpha. Collapsing only
  // the minimum each round matters — a node's link value rises as its
  // weak descendants are removed, so a single sweep would over-prune.
  void prune_at(double alpha) {
    for (;;) {
      int argmin;
      const double g = min_link(argmin);
      if (argmin < 0 || g > alpha + kEps) break;
      for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        if (!nodes[i].leaf && link_value(i) <= g + kEps) {
          nodes[i].leaf = true;
        }
      }
    }
  }

  int predict_slot(const FeatureMatrix& fm, int row,
                   const std::vector<int>& colmap) const {
    int i = 0;
    while (!nodes[i].leaf) {
      const TreeNode& node = nodes[i];
      bool go_left = node.majority_left;
      const double v = fm.at(row, colmap[node.feature]);
      if (!std::isnan(v)) {
        go_left = v <= node.threshold;
      } else {
        bool decided = false;
        for (const Surrogate& s : node.surrogates) {
          const double sv = fm.at(row, colmap[s.feature]);
          if (!std::isnan(sv)) {
            go_left = (sv <= s.threshold) == s.le_left;
            decided = true;
            break;
          }
        }
        if (!decided) go_left = node.majority_left;
      }
      i = go_left ? node.left : node.right;
    }
    return nodes[i].label_slot;
  }
};

// Alpha sequence of the nested weakest-link subtrees, ascending.
std::vector<double> alpha_sequence(const ClassificationTree& tree) {
  PruneWork work{tree.nodes};
  std::vector<double> alphas;
  for (;;) {
    int argmin;
    const double g = work.min_link(argmin);
    if (argmin < 0) break;
    alphas.push_back(std::max(g, 0.0));
    work.prune_at(g);
    if (work.nodes[0].leaf) break;
  }
  return alphas;
}

ClassificationTree compact(const ClassificationTree& tree,
                           const PruneWork& work) {
  ClassificationTree out;
  out.class_codes = tree.class_codes;
  out.feature_names = tree.feature_names;
  out.complexity = tree.complexity;
  std::function<int(int)> copy = [&](int i) -> int {
    const int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back(work.nodes[i]);
    if (work.nodes[i].leaf) {
      out.nodes[idx].left = out.nodes[idx].right = -1;
      out.nodes[idx].feature = -1;
      out.nodes[idx].surrogates.clear();
      return idx;
    }
    const int li = copy(work.nodes[i].left);
    const int ri = copy(work.nodes[i].right);
    out.nodes[idx].left = li;
    out.nodes[idx].right = ri;
    return idx;
  };
  copy(0);
  return out;
}

}  // namespace

ClassificationTree prune(const ClassificationTree& tree,
                         const TrainingData& data,
                         const std::vector<int>& row_ids, int folds,
                         std::uint64_t seed, const GrowControls& controls) {
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (static_cast<int>(row_ids.size()) < folds) {
    throw std::invalid_argument("fewer rows than folds");
  }
  if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
  if (tree.nodes[0].leaf) return tree;

  const std::vector<double> alphas = alpha_sequence(tree);
  std::vector<double> betas;
  betas.push_back(0.0);
  for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
    betas.push_back(std::sqrt(alphas[i] * alphas[i + 1]));
  }
  if (!alphas.empty()) betas.push_back(alphas.back());
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

  // Deterministic fold assignment.
  std::vector<int> shuffled = row_ids;
  Rng rng(seed);
  shuffle_vec(rng, shuffled);
  std::vector<std::vector<int>> fold_rows(folds);
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    fold_rows[i % folds].push_back(shuffled[i]);
  }

  const FeatureMatrix& fm = *data.features;
  std::vector<double> err_mass(betas.size(), 0.0);
  double total_weight = 0.0;
  std::size_t total_rows = 0;

  std::vector<int> slot_of_code(
      *std::max_element(tree.class_codes.begin(), tree.class_codes.end()) + 1,
      -1);
  for (std::size_t s = 0; s < tree.class_codes.size(); ++s) {
    slot_of_code[tree.class_codes[s]] = static_cast<int>(s);
  }

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows;
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      train_rows.insert(train_rows.end(), fold_rows[g].begin(),
                        fold_rows[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    const ClassificationTree fold_tree = grow(data, train_rows, controls);
    const auto colmap = fold_tree.map_columns(fm);

    PruneWork work{fold_tree.nodes};
    for (std::size_t b = 0; b < betas.size(); ++b) {
      work.prune_at(betas[b]);
      for (int r : fold_rows[f]) {
        const int pred =
            fold_tree.class_codes[work.predict_slot(fm, r, colmap)];
        if (pred != data.labels[r]) err_mass[b] += data.weights[r];
      }
    }
  }
  for (int r : row_ids) {
    total_weight += data.weights[r];
    ++total_rows;
  }

  std::vector<double> cv_err(betas.size()), cv_se(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const double e = err_mass[b] / total_weight;
    cv_err[b] = e;
    cv_se[b] = std::sqrt(std::max(0.0, e * (1.0 - e)) /
                         static_cast<double>(total_rows));
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < betas.size(); ++b) {
    if (cv_err[b] < cv_err[best]) best = b;
  }
  const double limit = cv_err[best] + cv_se[best];
  std::size_t chosen = best;
  for (std::size_t b = betas.size(); b-- > 0;) {
    if (cv_err[b] <= limit + kEps) {
      chosen = b;
      break;
    }
  }

  PruneWork work{tree.nodes};
  work.prune_at(betas[chosen]);

  ClassificationTree pruned = compact(tree, work);
  pruned.complexity.clear();
  for (std::size_t b = 0; b < betas.size(); ++b) {
    PruneWork w2{tree.nodes};
    w2.prune_at(betas[b]);
    double resub_mass;
    int leaves;
    w2.subtree_stats(0, resub_mass, leaves);
    pruned.complexity.push_back(
        {betas[b], leaves, resub_mass / total_weight, cv_err[b], cv_se[b]});
  }
  return pruned;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string tree_to_text(const ClassificationTree& tree) {
  std::ostringstream out;
  out << "alsc-tree 1\n";
  out << "classes";
  for (int c : tree.class_codes) out << " " << c;
  out << "\nfeatures";
  for (const auto& f : tree.feature_names) out << " " << f;
  out << "\nnodes " << tree.nodes.size() << "\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (n.leaf) {
      out << "L " << i << " " << tree.class_codes[n.label_slot] << " "
          << fmt(n.weight);
    } else {
      out << "S " << i << " " << tree.feature_names[n.feature] << " "
          << fmt(n.threshold) << " " << n.left << " " << n.right << " "
          << (n.majority_left ? "L" : "R") << " " << fmt(n.weight) << " surr "
          << n.surrogates.size();
      for (const Surrogate& s : n.surrogates) {
        out << " " << tree.feature_names[s.feature] << " " << fmt(s.threshold)
            << " " << (s.le_left ? "L" : "R") << " " << fmt(s.agreement);
      }
    }
    out << " counts";
    for (double c : n.counts) out << " " << fmt(c);
    out << "\n";
  }
  out << "complexity " << tree.complexity.size() << "\n";
  for (const ComplexityRow& row : tree.complexity) {
    out << fmt(row.alpha) << " " << row.leaves << " " << fmt(row.resub_error)
        << " " << fmt(row.cv_error) << " " << fmt(row.cv_se) << "\n";
  }
  return out.str();
}

ClassificationTree tree_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string kw;
  int version;
  in >> kw >> version;
  if (kw != "alsc-tree" || version != 1) {
    throw std::runtime_error("not an alsc tree file");
  }
  ClassificationTree tree;
  std::string line;
  std::getline(in, line);
  // classes
  std::getline(in, line);
  {
    std::istringstream ls(line);
    ls >> kw;
    int c;
    while (ls >> c) tree.class_codes.push_back(c);
  }
  // features
  std::getline(in, line);
  {
    std::istringstream ls(line);
    ls >> kw;
    std::string f;
    while (ls >> f) tree.feature_names.push_back(f);
  }
  auto feature_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < tree.feature_names.size(); ++i) {
      if (tree.feature_names[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error("unknown feature '" + name + "' in tree file");
  };
  auto slot_of = [&](int code) {
    for (std::size_t i = 0; i < tree.class_codes.size(); ++i) {
      if (tree.class_codes[i] == code) return static_cast<int>(i);
    }
    throw std::runtime_error("unknown class code in tree file");
  };
  std::size_t n_nodes;
  in >> kw >> n_nodes;
  std::getline(in, line);
  tree.nodes.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    std::getline(in, line);
    std::istringstream ls(line);
    std::string tag;
    std::size_t id;
    ls >> tag >> id;
    TreeNode& n = tree.nodes[id];
    if (tag == "L") {
      int code;
      ls >> code;
      n.leaf = true;
      n.label_slot = slot_of(code);
      ls >> n.weight;
    } else if (tag == "S") {
      n.leaf = false;
      std::string fname, dir;
      ls >> fname >> n.threshold >> n.left >> n.right >> dir >> n.weight;
      n.feature = feature_index(fname);
      n.majority_left = dir == "L";
      std::size_t n_surr;
      ls >> kw >> n_surr;  // "surr"
      for (std::size_t s = 0; s < n_surr; ++s) {
        Surrogate sur;
        ls >> fname >> sur.threshold >> dir >> sur.agreement;
        sur.feature = feature_index(fname);
        sur.le_left = dir == "L";
        n.surrogates.push_back(sur);
      }
    } else {
      throw std::runtime_error("bad node line in tree file");
    }
    ls >> kw;  // "counts"
    n.counts.assign(tree.class_codes.size(), 0.0);
    for (double& c : n.counts) ls >> c;
    n.label_slot = static_cast<int>(
        std::max_element(n.counts.begin(), n.counts.end()) - n.counts.begin());
  }
  if (in >> kw) {
    std::size_t n_rows;
    in >> n_rows;
    for (std::size_t i = 0; i < n_rows; ++i) {
      ComplexityRow row;
      in >> row.alpha >> row.leaves >> row.resub_error >> row.cv_error >>
          row.cv_se;
      tree.complexity.push_back(row);
    }
  }
  return tree;
}

void write_tree(const ClassificationTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << tree_to_text(tree);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ClassificationTree read_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return tree_from_text(ss.str());
}

}  // namespace alsc
