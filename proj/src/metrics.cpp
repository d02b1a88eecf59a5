#include <algorithm>
#include <cmath>
#include <map>

#include "csnet/metrics.hpp"

namespace csnet {

Metrics compute_metrics(const std::vector<int>& preds,
                        const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw Error("compute_metrics: prediction/label length mismatch");
  if (preds.empty()) throw Error("compute_metrics: empty input");
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) ++tp;
    if (preds[i] == 1 && labels[i] == 0) ++fp;
    if (preds[i] == 0 && labels[i] == 1) ++fn;
    if (preds[i] == 0 && labels[i] == 0) ++tn;
  }
  Metrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(preds.size());
  if (tp + fp > 0)
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  else
    m.zero_division = true;
  if (tp + fn > 0)
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  else
    m.zero_division = true;
  if (m.precision + m.recall > 0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.zero_division = true;
  return m;
}

ConditionalReport conditional_accuracy(const std::vector<int>& preds_a,
                                       const std::vector<int>& preds_b,
                                       const std::vector<int>& labels) {
  if (preds_a.size() != labels.size() || preds_b.size() != labels.size())
    throw Error("conditional_accuracy: misaligned prediction vectors");
  if (labels.empty()) throw Error("conditional_accuracy: empty input");
  ConditionalReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool a_wrong = preds_a[i] != labels[i];
    bool b_right = preds_b[i] == labels[i];
    if (a_wrong) {
      ++r.a_wrong_count;
      if (b_right) ++r.a_wrong_b_right_count;
    }
  }
  r.p_a_wrong =
      static_cast<double>(r.a_wrong_count) / static_cast<double>(labels.size());
  if (r.a_wrong_count > 0)
    r.cond_b_right = static_cast<double>(r.a_wrong_b_right_count) /
                     static_cast<double>(r.a_wrong_count);
  return r;
}

ErrorDistribution error_distribution(const std::vector<int>& preds,
                                     const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw Error("error_distribution: prediction/label length mismatch");
  long err_reliable = 0, err_unreliable = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) continue;
    (labels[i] == 0 ? err_reliable : err_unreliable)++;
  }
  ErrorDistribution d;
  long total = err_reliable + err_unreliable;
  if (total == 0) {
    d.no_errors = true;
    return d;
  }
  d.reliable_share = static_cast<double>(err_reliable) / total;
  d.unreliable_share = static_cast<double>(err_unreliable) / total;
  return d;
}

std::vector<SplitPlan> make_splits(
    const std::vector<std::pair<std::string, SourceLabel>>& labeled_sources,
    double frac, int runs, std::uint64_t seed) {
  if (frac <= 0 || frac >= 1) throw Error("make_splits: frac must be in (0,1)");
  if (runs < 1) throw Error("make_splits: runs must be >= 1");

  std::vector<std::string> reliable, unreliable;
  for (const auto& [id, label] : labeled_sources) {
    if (label == SourceLabel::Reliable) reliable.push_back(id);
    if (label == SourceLabel::Unreliable) unreliable.push_back(id);
  }
  std::sort(reliable.begin(), reliable.end());
  std::sort(unreliable.begin(), unreliable.end());
  if (reliable.size() < 2 || unreliable.size() < 2)
    throw Error("make_splits: need at least 2 labeled sources per class");

  std::vector<SplitPlan> plans;
  plans.reserve(runs);
  for (int run = 0; run < runs; ++run) {
    SplitPlan plan;
    plan.run_index = run;
    plan.seed = derive_seed(seed, "split", static_cast<std::uint64_t>(run));
    Rng rng(plan.seed);
    for (const auto* cls : {&reliable, &unreliable}) {
      // at least one test and one train source per class
      std::size_t n_test = static_cast<std::size_t>(
          std::floor(frac * static_cast<double>(cls->size()) + 0.5));
      n_test = std::clamp<std::size_t>(n_test, 1, cls->size() - 1);
      auto chosen = rng.sample_without_replacement(cls->size(), n_test);
      std::vector<char> is_test(cls->size(), 0);
      for (auto i : chosen) is_test[i] = 1;
      for (std::size_t i = 0; i < cls->size(); ++i)
        (is_test[i] ? plan.test_sources : plan.train_sources)
            .push_back((*cls)[i]);
    }
    std::sort(plan.train_sources.begin(), plan.train_sources.end());
    std::sort(plan.test_sources.begin(), plan.test_sources.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace csnet
