#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csnet/util.hpp"

namespace csnet {

struct Dataset {
  std::size_t width = 0;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // 0 = reliable, 1 = unreliable
  std::vector<std::pair<std::string, std::string>> row_meta;  // (article, source)

  std::size_t size() const { return rows.size(); }
  void validate() const;
};

struct ForestParams {
  int n_trees = 100;
  int min_leaf = 1;
  int max_depth = 0;  // 0 = unlimited
  bool bootstrap = true;
  bool all_features = false;  // per split: all vs ceil(sqrt(width))
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  long n0 = 0;  // class counts reaching the node
  long n1 = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict_proba(const std::vector<double>& row) const;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t width = 0;
  ForestParams params;
  std::uint64_t seed = 0;
  bool single_class_warning = false;

  std::string serialize() const;
  static ForestModel deserialize(const std::string& json_text);
};

struct Prediction {
  double proba = 0.0;           // probability of class 1 (unreliable)
  int label() const { return proba >= 0.5 ? 1 : 0; }
};

// Gini-impurity trees on bootstrap resamples; per-tree seeds derive from
// the tree index, so training is deterministic for any worker count.
ForestModel train_forest(const Dataset& d, const ForestParams& params,
                         std::uint64_t seed, int workers = 0);

Prediction predict_proba(const ForestModel& m, const std::vector<double>& row);

// Unweighted mean of two member probabilities.
Prediction soft_vote(const Prediction& a, const Prediction& b);

// Mean impurity decrease per feature, normalized to sum to 1.
std::vector<double> feature_importance(const ForestModel& m);
void write_importance_csv(const ForestModel& m,
                          const std::vector<std::string>& names,
                          const std::string& path);

}  // namespace csnet
