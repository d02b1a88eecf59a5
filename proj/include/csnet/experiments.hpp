#pragma once

#include <functional>
#include <map>
#include <unordered_set>

#include "csnet/features.hpp"
#include "csnet/forest.hpp"
#include "csnet/metrics.hpp"
#include "csnet/netfeat.hpp"
#include "csnet/skipgram.hpp"

namespace csnet {

// One named feature family, keyed by article id or by source id.
struct FeatureSet {
  std::string name;
  SchemaPtr schema;
  bool source_level = false;
  std::unordered_map<std::string, std::vector<double>> by_key;
};

struct FeatureBank {
  std::map<std::string, FeatureSet> sets;

  void add(FeatureSet set);
  const FeatureSet& at(const std::string& name) const;
  std::vector<std::string> names() const;

  static FeatureSet from_embedding(const std::string& name,
                                   const Embedding& e);
  static FeatureSet from_hcnf(const HcnfTable& t);
};

// Combination spec: a single set, a concatenation "A+B", or a two-model
// soft-voting ensemble "ensemble:A,B" (members may themselves be
// concatenations).
struct FeatureSpec {
  std::string text;
  bool ensemble = false;
  std::vector<std::vector<std::string>> members;

  static FeatureSpec parse(const std::string& text, const FeatureBank& bank);
};

// Rows for labeled-source articles, in corpus order; source-level feature
// values are replicated onto each of the source's articles.
Dataset build_dataset(const Corpus& pool, const FeatureBank& bank,
                      const std::vector<std::string>& concat_sets);

// Throws if any article in the pool is in the forbidden (leakage) set.
void assert_no_leakage(const Corpus& pool,
                       const std::unordered_set<std::string>& forbidden_ids);

// ---- holdout -----------------------------------------------------------------

struct HoldoutResult {
  std::string spec;
  std::vector<Metrics> per_run;
  Metrics mean;
};

std::vector<HoldoutResult> holdout_experiment(
    const Corpus& pool, const FeatureBank& bank,
    const std::vector<std::string>& specs,
    const std::vector<SplitPlan>& splits, const ForestParams& forest,
    std::uint64_t seed,
    const std::unordered_set<std::string>* forbidden_ids = nullptr,
    int workers = 0);

// ---- leave one source out ------------------------------------------------------

struct LosoResult {
  std::vector<std::string> article_ids;  // identical alignment for all specs
  std::vector<std::string> source_ids;
  std::vector<int> labels;
  std::map<std::string, std::vector<int>> preds;
  std::map<std::string, std::vector<double>> probas;
};

LosoResult leave_one_source_out(
    const Corpus& pool, const FeatureBank& bank,
    const std::vector<std::string>& specs, const ForestParams& forest,
    std::uint64_t seed,
    const std::unordered_set<std::string>* forbidden_ids = nullptr,
    int workers = 0);

// ---- temporal ------------------------------------------------------------------

struct TemporalParams {
  int train_days = 30;
  int slice_days = 14;
  int runs = 50;
  double frac = 0.2;
  std::size_t per_source_n = 1000;
  ForestParams forest;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct TimeSlice {
  std::int64_t start = 0;
  std::int64_t end = 0;
  double accuracy = 0;
  std::size_t rows = 0;
};

struct TimeSeriesReport {
  std::string spec;
  double in_time = 0;
  double forecast = 0;  // mean over post-training slices; 0 if none
  std::vector<TimeSlice> slices;
};

// Builds the feature bank from first-month information only and reports
// the ids that must stay out of train/test (pair articles, text-repr
// sample). The classifier trains on the first train_days of data and is
// evaluated on held-out sources per subsequent slice.
using BankBuilder = std::function<FeatureBank(
    const Corpus& train_month, std::unordered_set<std::string>& exclusions)>;

std::vector<TimeSeriesReport> temporal_experiment(
    const Corpus& corpus, const BankBuilder& build_bank,
    const std::vector<std::string>& specs, const TemporalParams& params);

// ---- report files ----------------------------------------------------------------

void write_holdout_csv(const std::vector<HoldoutResult>& results,
                       const std::string& runs_path,
                       const std::string& summary_path);
void write_loso_csv(const LosoResult& r, const std::string& path);
void write_conditional_csv(const std::vector<ConditionalReport>& reports,
                           const std::string& path);
void write_error_distribution_csv(
    const std::vector<std::pair<std::string, ErrorDistribution>>& rows,
    const std::string& path);
void write_timeseries_csv(const std::vector<TimeSeriesReport>& reports,
                          const std::string& path);

}  // namespace csnet
