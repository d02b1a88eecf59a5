#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csnet/corpus.hpp"

namespace csnet {

// Positive class is Unreliable (1) throughout.
struct Metrics {
  double accuracy = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  bool zero_division = false;  // a ratio had an empty denominator
};

Metrics compute_metrics(const std::vector<int>& preds,
                        const std::vector<int>& labels);

// P(A wrong) and P(B right | A wrong) as joint-event count ratios.
struct ConditionalReport {
  std::string feature_a;
  std::string feature_b;
  double p_a_wrong = 0;
  std::optional<double> cond_b_right;  // absent when A makes no mistakes
  long a_wrong_count = 0;
  long a_wrong_b_right_count = 0;
};

ConditionalReport conditional_accuracy(const std::vector<int>& preds_a,
                                       const std::vector<int>& preds_b,
                                       const std::vector<int>& labels);

// Share of misclassifications per true class.
struct ErrorDistribution {
  double reliable_share = 0;
  double unreliable_share = 0;
  bool no_errors = false;
};

ErrorDistribution error_distribution(const std::vector<int>& preds,
                                     const std::vector<int>& labels);

// Source-level train/test split; never splits a source across sides.
struct SplitPlan {
  int run_index = 0;
  std::vector<std::string> train_sources;
  std::vector<std::string> test_sources;
  std::uint64_t seed = 0;
};

// `runs` independent splits holding out about `frac` of the labeled
// sources per class, with at least one source of each class on both sides.
std::vector<SplitPlan> make_splits(
    const std::vector<std::pair<std::string, SourceLabel>>& labeled_sources,
    double frac, int runs, std::uint64_t seed);

}  // namespace csnet
