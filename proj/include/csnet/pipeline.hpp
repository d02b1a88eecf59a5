#pragma once

#include <set>
#include <string>

#include "csnet/embed.hpp"
#include "csnet/experiments.hpp"
#include "csnet/nela.hpp"
#include "json.hpp"

namespace csnet {

struct PipelineConfig {
  struct Paths {
    std::string corpus;
    std::string labels;
    std::string word_vectors;
    std::string lexicons = "data/lexicons";
    std::string workdir = "work";
  };
  struct CsnParams {
    int window_days = 5;
    double theta = 0.85;
    bool export_gexf = true;
    bool persist_tfidf = false;
  };
  struct ExperimentParams {
    int runs = 50;
    double frac = 0.2;
    std::size_t per_source_n = 1000;
    std::vector<std::string> specs = {"NELA", "FT", "N2V"};
  };
  struct TemporalParamsCfg {
    int train_days = 30;
    int slice_days = 14;
  };

  Paths paths;
  CsnParams csn;
  WalkConfig n2v;           // defaults p = q = 0.5
  WalkConfig nt2v;          // defaults t = 0.8, p = 0.5, q = 0.4
  double nt2v_sample_fraction = 0.2;
  SkipgramConfig skipgram;  // dim 40
  ForestParams forest;
  ExperimentParams experiment;
  TemporalParamsCfg temporal;
  bool dump_walks = false;  // also write walks_<mode>.txt
  std::uint64_t seed = 0;
  int workers = 0;

  PipelineConfig();

  static PipelineConfig from_file(const std::string& path);
  nlohmann::ordered_json to_json() const;  // resolved snapshot (config echo)
  void validate() const;
};

// Staged execution over a workdir with content-hash caching: a stage is
// skipped when its config hash, inputs, and outputs all match the
// manifest.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  // returns false when the stage was skipped via the cache
  bool ingest();
  bool build_csn_stage();
  bool hcnf_stage();
  bool embed_stage(EmbedMode mode);
  bool features_stage();
  bool train_stage();
  bool evaluate_stage(const std::string& protocol);
  bool temporal_stage();
  bool report_stage();

  const PipelineConfig& config() const { return cfg_; }
  std::string artifact(const std::string& name) const;

 private:
  PipelineConfig cfg_;
  nlohmann::json manifest_;

  void load_manifest();
  void save_manifest();
  std::string stage_config_hash(const std::string& stage,
                                const nlohmann::ordered_json& stage_cfg,
                                const std::vector<std::string>& inputs) const;
  bool stage_cached(const std::string& stage, const std::string& config_hash,
                    const std::vector<std::string>& outputs) const;
  void record_stage(const std::string& stage, const std::string& config_hash,
                    const std::vector<std::string>& outputs);
  void require_artifact(const std::string& name,
                        const std::string& producing_stage) const;

  Corpus load_normalized_corpus() const;
  FeatureBank load_bank(const std::vector<std::string>& spec_texts,
                        bool temporal_mode = false) const;
  std::unordered_set<std::string> load_exclusion_ids() const;
  Corpus build_pool(const Corpus& corpus,
                    const std::unordered_set<std::string>& excluded) const;
};

// Derives per-stage seeds from the master seed (documented fan-out).
std::uint64_t stage_seed(std::uint64_t master, const std::string& stage);

// Feature matrix CSV: "article,<name>,..." with one row per article.
void write_feature_csv(const std::string& path, SchemaPtr schema,
                       const std::vector<std::pair<std::string,
                                                   std::vector<double>>>& rows);
FeatureSet load_feature_csv(const std::string& path, const std::string& name,
                            SchemaPtr schema, bool source_level);

}  // namespace csnet
