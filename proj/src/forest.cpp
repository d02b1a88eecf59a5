#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "csnet/forest.hpp"
#include "json.hpp"

namespace csnet {

void Dataset::validate() const {
  if (rows.size() != labels.size())
    throw Error("dataset: row/label count mismatch");
  for (const auto& r : rows)
    if (r.size() != width) throw Error("dataset: ragged row width");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error("dataset: labels must be 0 or 1");
}

double DecisionTree::predict_proba(const std::vector<double>& row) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = row[nodes[node].feature] < nodes[node].threshold
               ? nodes[node].left
               : nodes[node].right;
  }
  long total = nodes[node].n0 + nodes[node].n1;
  return total > 0 ? static_cast<double>(nodes[node].n1) / total : 0.5;
}

namespace {

struct TreeBuilder {
  const Dataset& data;
  const ForestParams& params;
  Rng rng;
  DecisionTree tree;

  TreeBuilder(const Dataset& d, const ForestParams& p, std::uint64_t seed)
      : data(d), params(p), rng(seed) {}

  static double gini(long n0, long n1) {
    long n = n0 + n1;
    if (n == 0) return 0.0;
    double p0 = static_cast<double>(n0) / n;
    double p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
  }

  int build(std::vector<std::size_t>& idx, int depth) {
    long n0 = 0, n1 = 0;
    for (auto i : idx) (data.labels[i] == 0 ? n0 : n1)++;

    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({-1, 0.0, -1, -1, n0, n1});

    const long n = n0 + n1;
    bool splittable = n0 > 0 && n1 > 0 &&
                      n >= 2 * static_cast<long>(params.min_leaf) &&
                      (params.max_depth == 0 || depth < params.max_depth);
    if (!splittable) return node_id;

    // candidate features for this split
    std::size_t k = params.all_features
                        ? data.width
                        : static_cast<std::size_t>(
                              std::ceil(std::sqrt(static_cast<double>(data.width))));
    auto candidates = rng.sample_without_replacement(data.width, k);

    // split whenever a valid boundary exists, even at zero gain; recursion
    // still terminates because both children are nonempty
    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0;

    std::vector<std::pair<double, int>> vals(idx.size());
    for (std::size_t f : candidates) {
      for (std::size_t i = 0; i < idx.size(); ++i)
        vals[i] = {data.rows[idx[i]][f], data.labels[idx[i]]};
      std::sort(vals.begin(), vals.end());
      long l0 = 0, l1 = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        (vals[i].second == 0 ? l0 : l1)++;
        if (vals[i].first == vals[i + 1].first) continue;
        long left = l0 + l1;
        long right = n - left;
        if (left < params.min_leaf || right < params.min_leaf) continue;
        double score = (left * gini(l0, l1) + right * gini(n0 - l0, n1 - l1)) /
                       static_cast<double>(n);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx)
      (data.rows[i][best_feature] < best_threshold ? left_idx : right_idx)
          .push_back(i);
    if (left_idx.empty() || right_idx.empty()) return node_id;

    idx.clear();
    idx.shrink_to_fit();
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    int l = build(left_idx, depth + 1);
    tree.nodes[node_id].left = l;
    int r = build(right_idx, depth + 1);
    tree.nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace

ForestModel train_forest(const Dataset& d, const ForestParams& params,
                         std::uint64_t seed, int workers) {
  d.validate();
  if (d.size() < 2) throw Error("train_forest: need at least 2 rows");
  if (d.width < 1) throw Error("train_forest: need at least 1 feature");
  if (params.n_trees < 1) throw Error("train_forest: n_trees must be >= 1");
  if (workers <= 0) workers = omp_get_max_threads();

  ForestModel m;
  m.width = d.width;
  m.params = params;
  m.seed = seed;
  bool has0 = false, has1 = false;
  for (int l : d.labels) (l == 0 ? has0 : has1) = true;
  m.single_class_warning = !(has0 && has1);

  m.trees.resize(params.n_trees);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int t = 0; t < params.n_trees; ++t) {
    std::uint64_t tree_seed = derive_seed(seed, "tree", t);
    Rng boot(derive_seed(tree_seed, "bootstrap"));
    std::vector<std::size_t> idx(d.size());
    if (params.bootstrap) {
      for (auto& i : idx) i = static_cast<std::size_t>(boot.next_below(d.size()));
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder(d, params, derive_seed(tree_seed, "splits"));
    builder.build(idx, 0);
    m.trees[t] = std::move(builder.tree);
  }
  return m;
}

Prediction predict_proba(const ForestModel& m, const std::vector<double>& row) {
  if (row.size() != m.width)
    throw Error("predict_proba: row width " + std::to_string(row.size()) +
                " does not match model width " + std::to_string(m.width));
  double acc = 0;
  for (const auto& t : m.trees) acc += t.predict_proba(row);
  return {acc / static_cast<double>(m.trees.size())};
}

Prediction soft_vote(const Prediction& a, const Prediction& b) {
  return {(a.proba + b.proba) / 2.0};
}

std::vector<double> feature_importance(const ForestModel& m) {
  std::vector<double> imp(m.width, 0.0);
  auto gini = [](long n0, long n1) {
    long n = n0 + n1;
    if (n == 0) return 0.0;
    double p0 = static_cast<double>(n0) / n, p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
  };
  for (const auto& tree : m.trees) {
    if (tree.nodes.empty()) continue;
    double root_n = static_cast<double>(tree.nodes[0].n0 + tree.nodes[0].n1);
    for (const auto& node : tree.nodes) {
      if (node.feature < 0) continue;
      const auto& l = tree.nodes[node.left];
      const auto& r = tree.nodes[node.right];
      double n = static_cast<double>(node.n0 + node.n1);
      double nl = static_cast<double>(l.n0 + l.n1);
      double nr = static_cast<double>(r.n0 + r.n1);
      double decrease = gini(node.n0, node.n1) -
                        (nl * gini(l.n0, l.n1) + nr * gini(r.n0, r.n1)) / n;
      imp[node.feature] += (n / root_n) * decrease;
    }
  }
  double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0)
    for (auto& v : imp) v /= total;
  return imp;
}

void write_importance_csv(const ForestModel& m,
                          const std::vector<std::string>& names,
                          const std::string& path) {
  auto imp = feature_importance(m);
  std::ostringstream out;
  out << "feature,importance\n";
  for (std::size_t i = 0; i < imp.size(); ++i) {
    out << (i < names.size() ? names[i] : "f" + std::to_string(i)) << ','
        << fmt_double(imp[i]) << '\n';
  }
  write_file(path, out.str());
}

std::string ForestModel::serialize() const {
  nlohmann::ordered_json j;
  j["format"] = "forest-v1";
  j["width"] = width;
  j["seed"] = seed;
  j["single_class_warning"] = single_class_warning;
  j["params"] = {{"n_trees", params.n_trees},
                 {"min_leaf", params.min_leaf},
                 {"max_depth", params.max_depth},
                 {"bootstrap", params.bootstrap},
                 {"all_features", params.all_features}};
  nlohmann::ordered_json trees_json = nlohmann::ordered_json::array();
  for (const auto& t : trees) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n0, n.n1});
    trees_json.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees_json);
  return j.dump();
}

ForestModel ForestModel::deserialize(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  if (j.value("format", "") != "forest-v1")
    throw Error("unsupported forest model format");
  ForestModel m;
  m.width = j["width"].get<std::size_t>();
  m.seed = j["seed"].get<std::uint64_t>();
  m.single_class_warning = j["single_class_warning"].get<bool>();
  m.params.n_trees = j["params"]["n_trees"].get<int>();
  m.params.min_leaf = j["params"]["min_leaf"].get<int>();
  m.params.max_depth = j["params"]["max_depth"].get<int>();
  m.params.bootstrap = j["params"]["bootstrap"].get<bool>();
  m.params.all_features = j["params"]["all_features"].get<bool>();
  for (const auto& tree_json : j["trees"]) {
    DecisionTree t;
    for (const auto& n : tree_json) {
      t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(),
                         n[3].get<int>(), n[4].get<long>(), n[5].get<long>()});
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace csnet
