#include <omp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csnet/pipeline.hpp"

namespace fs = std::filesystem;

namespace csnet {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::uint64_t stage_seed(std::uint64_t master, const std::string& stage) {
  return derive_seed(master, "stage:" + stage);
}

PipelineConfig::PipelineConfig() {
  n2v.p = 0.5;
  n2v.q = 0.5;
  n2v.t = 0.0;
  nt2v.p = 0.5;
  nt2v.q = 0.4;
  nt2v.t = 0.8;
}

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_walks(const json& j, WalkConfig& w) {
  get_if(j, "p", w.p);
  get_if(j, "q", w.q);
  get_if(j, "t", w.t);
  get_if(j, "k", w.k);
  get_if(j, "min_sim", w.min_sim);
  get_if(j, "num_walks", w.num_walks);
  get_if(j, "walk_length", w.walk_length);
  get_if(j, "directed", w.directed);
}

ojson walks_json(const WalkConfig& w, bool with_text_params) {
  ojson j;
  j["p"] = w.p;
  j["q"] = w.q;
  if (with_text_params) {
    j["t"] = w.t;
    j["k"] = w.k;
    j["min_sim"] = w.min_sim;
  }
  j["num_walks"] = w.num_walks;
  j["walk_length"] = w.walk_length;
  j["directed"] = w.directed;
  return j;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (unsigned char c : name)
    out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// base feature tokens referenced by a spec string
std::vector<std::string> spec_tokens(const std::string& text) {
  std::string body = text;
  if (body.rfind("ensemble:", 0) == 0) body = body.substr(9);
  std::vector<std::string> tokens;
  for (const auto& member : split(body, ','))
    for (const auto& tok : split(member, '+')) tokens.push_back(tok);
  return tokens;
}

const std::vector<std::string> kKnownTokens = {"NELA", "FT", "HCNF", "N2V",
                                               "NT2V"};

void validate_spec_tokens(const std::vector<std::string>& specs) {
  for (const auto& spec : specs) {
    for (const auto& tok : spec_tokens(spec)) {
      if (std::find(kKnownTokens.begin(), kKnownTokens.end(), tok) ==
          kKnownTokens.end())
        throw Error("unknown feature token '" + tok + "' in spec '" + spec +
                    "'; valid tokens: {NELA, FT, HCNF, N2V, NT2V}, "
                    "combinations: A+B, ensemble:A,B");
    }
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  json j = json::parse(read_file(path));
  PipelineConfig cfg;
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    get_if(p, "corpus", cfg.paths.corpus);
    get_if(p, "labels", cfg.paths.labels);
    get_if(p, "word_vectors", cfg.paths.word_vectors);
    get_if(p, "lexicons", cfg.paths.lexicons);
    get_if(p, "workdir", cfg.paths.workdir);
  }
  if (j.contains("csn")) {
    const auto& c = j["csn"];
    get_if(c, "window_days", cfg.csn.window_days);
    get_if(c, "theta", cfg.csn.theta);
    get_if(c, "export_gexf", cfg.csn.export_gexf);
    get_if(c, "persist_tfidf", cfg.csn.persist_tfidf);
  }
  if (j.contains("n2v")) read_walks(j["n2v"], cfg.n2v);
  if (j.contains("nt2v")) {
    read_walks(j["nt2v"], cfg.nt2v);
    get_if(j["nt2v"], "sample_fraction", cfg.nt2v_sample_fraction);
  }
  if (j.contains("skipgram")) {
    const auto& s = j["skipgram"];
    get_if(s, "dim", cfg.skipgram.dim);
    get_if(s, "window", cfg.skipgram.window);
    get_if(s, "negatives", cfg.skipgram.negatives);
    get_if(s, "epochs", cfg.skipgram.epochs);
    get_if(s, "learning_rate", cfg.skipgram.learning_rate);
  }
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    get_if(f, "n_trees", cfg.forest.n_trees);
    get_if(f, "min_leaf", cfg.forest.min_leaf);
    get_if(f, "max_depth", cfg.forest.max_depth);
    get_if(f, "bootstrap", cfg.forest.bootstrap);
    get_if(f, "all_features", cfg.forest.all_features);
  }
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    get_if(e, "runs", cfg.experiment.runs);
    get_if(e, "frac", cfg.experiment.frac);
    get_if(e, "per_source_n", cfg.experiment.per_source_n);
    get_if(e, "specs", cfg.experiment.specs);
  }
  if (j.contains("temporal")) {
    const auto& t = j["temporal"];
    get_if(t, "train_days", cfg.temporal.train_days);
    get_if(t, "slice_days", cfg.temporal.slice_days);
  }
  get_if(j, "dump_walks", cfg.dump_walks);
  get_if(j, "seed", cfg.seed);
  get_if(j, "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["paths"] = {{"corpus", paths.corpus},
                {"labels", paths.labels},
                {"word_vectors", paths.word_vectors},
                {"lexicons", paths.lexicons},
                {"workdir", paths.workdir}};
  j["csn"] = {{"window_days", csn.window_days},
              {"theta", csn.theta},
              {"export_gexf", csn.export_gexf},
              {"persist_tfidf", csn.persist_tfidf}};
  j["n2v"] = walks_json(n2v, false);
  j["nt2v"] = walks_json(nt2v, true);
  j["nt2v"]["sample_fraction"] = nt2v_sample_fraction;
  j["skipgram"] = {{"dim", skipgram.dim},
                   {"window", skipgram.window},
                   {"negatives", skipgram.negatives},
                   {"epochs", skipgram.epochs},
                   {"learning_rate", skipgram.learning_rate}};
  j["forest"] = {{"n_trees", forest.n_trees},
                 {"min_leaf", forest.min_leaf},
                 {"max_depth", forest.max_depth},
                 {"bootstrap", forest.bootstrap},
                 {"all_features", forest.all_features}};
  j["experiment"] = {{"runs", experiment.runs},
                     {"frac", experiment.frac},
                     {"per_source_n", experiment.per_source_n},
                     {"specs", experiment.specs}};
  j["temporal"] = {{"train_days", temporal.train_days},
                   {"slice_days", temporal.slice_days}};
  j["dump_walks"] = dump_walks;
  j["seed"] = seed;
  j["workers"] = workers;
  return j;
}

void PipelineConfig::validate() const {
  if (csn.window_days < 1) throw Error("config: csn.window_days must be >= 1");
  if (csn.theta <= 0.0 || csn.theta > 1.0)
    throw Error("config: csn.theta must be in (0, 1]");
  n2v.validate();
  nt2v.validate();
  skipgram.validate();
  if (nt2v_sample_fraction <= 0 || nt2v_sample_fraction > 1)
    throw Error("config: nt2v.sample_fraction must be in (0, 1]");
  if (experiment.runs < 1) throw Error("config: experiment.runs must be >= 1");
  if (experiment.frac <= 0 || experiment.frac >= 1)
    throw Error("config: experiment.frac must be in (0, 1)");
  if (experiment.per_source_n < 1)
    throw Error("config: experiment.per_source_n must be >= 1");
  if (temporal.train_days < 1 || temporal.slice_days < 1)
    throw Error("config: temporal periods must be >= 1 day");
  validate_spec_tokens(experiment.specs);
}

// ---- manifest --------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  fs::create_directories(cfg_.paths.workdir);
  load_manifest();
}

std::string Pipeline::artifact(const std::string& name) const {
  return (fs::path(cfg_.paths.workdir) / name).string();
}

void Pipeline::load_manifest() {
  std::string path = artifact("manifest.json");
  if (fs::exists(path))
    manifest_ = json::parse(read_file(path));
  else
    manifest_ = json{{"stages", json::object()}};
}

void Pipeline::save_manifest() {
  write_file(artifact("manifest.json"), manifest_.dump(2));
}

std::string Pipeline::stage_config_hash(
    const std::string& stage, const ojson& stage_cfg,
    const std::vector<std::string>& inputs) const {
  std::uint64_t h = fnv1a64(stage);
  h = fnv1a64(stage_cfg.dump(), h);
  for (const auto& input : inputs) {
    if (!fs::exists(input))
      throw Error("stage '" + stage + "' is missing input file: " + input);
    h = fnv1a64(input, h);
    h = mix64(h ^ hash_file(input));
  }
  return hex64(h);
}

bool Pipeline::stage_cached(const std::string& stage,
                            const std::string& config_hash,
                            const std::vector<std::string>& outputs) const {
  const auto& stages = manifest_["stages"];
  if (!stages.contains(stage)) return false;
  const auto& entry = stages.at(stage);
  if (entry.value("config_hash", "") != config_hash) return false;
  if (!entry.contains("outputs")) return false;
  const auto& recorded = entry.at("outputs");
  for (const auto& name : outputs) {
    if (!recorded.contains(name)) return false;
    std::string path = artifact(name);
    if (!fs::exists(path)) return false;
    if (recorded.at(name).get<std::string>() != hex64(hash_file(path)))
      return false;
  }
  return true;
}

void Pipeline::record_stage(const std::string& stage,
                            const std::string& config_hash,
                            const std::vector<std::string>& outputs) {
  json out = json::object();
  for (const auto& name : outputs) out[name] = hex64(hash_file(artifact(name)));
  manifest_["stages"][stage] = {{"config_hash", config_hash},
                                {"outputs", out}};
  save_manifest();
}

void Pipeline::require_artifact(const std::string& name,
                                const std::string& producing_stage) const {
  if (!fs::exists(artifact(name)))
    throw Error("missing artifact '" + name + "' in " + cfg_.paths.workdir +
                "; run the '" + producing_stage + "' stage first");
}

// ---- feature matrix files -----------------------------------------------------

void write_feature_csv(
    const std::string& path, SchemaPtr schema,
    const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::ostringstream out;
  out << "article";
  for (const auto& d : schema->defs) out << ',' << d.name;
  out << '\n';
  for (const auto& [id, values] : rows) {
    if (values.size() != schema->size())
      throw Error("feature row width mismatch for " + id);
    out << id;
    for (double v : values) out << ',' << fmt_double(v);
    out << '\n';
  }
  write_file(path, out.str());
}

FeatureSet load_feature_csv(const std::string& path, const std::string& name,
                            SchemaPtr schema, bool source_level) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error("empty feature file: " + path);
  auto header = split(line, ',');
  if (header.size() != schema->size() + 1)
    throw Error("feature file " + path + " does not match the registry (" +
                std::to_string(header.size() - 1) + " vs " +
                std::to_string(schema->size()) + " columns)");
  for (std::size_t i = 0; i < schema->size(); ++i)
    if (header[i + 1] != schema->defs[i].name)
      throw Error("feature file " + path + " column '" + header[i + 1] +
                  "' does not match registry name '" + schema->defs[i].name +
                  "'");
  FeatureSet set;
  set.name = name;
  set.schema = schema;
  set.source_level = source_level;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != schema->size() + 1)
      throw Error("ragged feature row in " + path);
    std::vector<double> values(schema->size());
    for (std::size_t i = 0; i < schema->size(); ++i)
      values[i] = std::stod(cols[i + 1]);
    set.by_key.emplace(cols[0], std::move(values));
  }
  return set;
}

// ---- stages ---------------------------------------------------------------------

bool Pipeline::ingest() {
  ojson stage_cfg;
  stage_cfg["format"] = "ingest-v1";  // outputs depend only on the inputs
  auto hash = stage_config_hash("ingest", stage_cfg,
                                {cfg_.paths.corpus, cfg_.paths.labels});
  std::vector<std::string> outputs = {"corpus.norm.jsonl", "labels.norm.tsv",
                                      "ingest_report.json"};
  if (stage_cached("ingest", hash, outputs)) return false;

  LoadReport report;
  Corpus corpus = load_corpus(cfg_.paths.corpus, cfg_.paths.labels, &report);
  write_corpus(corpus, artifact("corpus.norm.jsonl"));
  write_labels(corpus, artifact("labels.norm.tsv"));

  ojson summary;
  summary["records_read"] = report.records_read;
  summary["rejected_timestamps"] = report.rejected_timestamps;
  summary["articles"] = corpus.articles.size();
  summary["sources"] = corpus.sources.size();
  summary["warnings"] = report.warnings;
  summary["config"] = cfg_.to_json();
  write_file(artifact("ingest_report.json"), summary.dump(2));

  record_stage("ingest", hash, outputs);
  return true;
}

Corpus Pipeline::load_normalized_corpus() const {
  require_artifact("corpus.norm.jsonl", "ingest");
  require_artifact("labels.norm.tsv", "ingest");
  return load_corpus(artifact("corpus.norm.jsonl"), artifact("labels.norm.tsv"));
}

bool Pipeline::build_csn_stage() {
  ojson stage_cfg;
  stage_cfg["window_days"] = cfg_.csn.window_days;
  stage_cfg["theta"] = cfg_.csn.theta;
  stage_cfg["export_gexf"] = cfg_.csn.export_gexf;
  stage_cfg["persist_tfidf"] = cfg_.csn.persist_tfidf;
  stage_cfg["workers_independent"] = true;
  require_artifact("corpus.norm.jsonl", "ingest");
  auto hash = stage_config_hash(
      "build-csn", stage_cfg,
      {artifact("corpus.norm.jsonl"), artifact("labels.norm.tsv")});
  std::vector<std::string> outputs = {"pairs.jsonl", "csn_edges.tsv",
                                      "csn_nodes.tsv", "csn_exclusions.txt"};
  if (cfg_.csn.export_gexf) outputs.push_back("csn.gexf");
  if (cfg_.csn.persist_tfidf) outputs.push_back("tfidf.json");
  if (stage_cached("build-csn", hash, outputs)) return false;

  Corpus corpus = load_normalized_corpus();
  auto model = fit_tfidf(corpus);
  auto pairs = find_shared_pairs(corpus, model, cfg_.csn.window_days,
                                 cfg_.csn.theta, cfg_.workers);
  write_pairs(pairs, artifact("pairs.jsonl"));
  auto graph = build_csn(pairs, corpus);
  write_csn(graph, artifact("csn_edges.tsv"), artifact("csn_nodes.tsv"));

  auto excluded = csn_exclusion_set(pairs);
  std::vector<std::string> sorted_ids(excluded.begin(), excluded.end());
  std::sort(sorted_ids.begin(), sorted_ids.end());
  std::ostringstream ex;
  for (const auto& id : sorted_ids) ex << id << '\n';
  write_file(artifact("csn_exclusions.txt"), ex.str());

  if (cfg_.csn.export_gexf) write_gexf(graph, artifact("csn.gexf"));
  if (cfg_.csn.persist_tfidf) save_tfidf(model, artifact("tfidf.json"));

  record_stage("build-csn", hash, outputs);
  return true;
}

bool Pipeline::hcnf_stage() {
  require_artifact("csn_edges.tsv", "build-csn");
  require_artifact("csn_nodes.tsv", "build-csn");
  ojson stage_cfg;
  stage_cfg["seed"] = stage_seed(cfg_.seed, "communities");
  auto hash = stage_config_hash(
      "hcnf", stage_cfg,
      {artifact("csn_edges.tsv"), artifact("csn_nodes.tsv")});
  std::vector<std::string> outputs = {"communities.csv", "hcnf.csv"};
  if (stage_cached("hcnf", hash, outputs)) return false;

  auto graph = load_csn(artifact("csn_edges.tsv"), artifact("csn_nodes.tsv"));
  auto communities =
      detect_communities(graph, stage_seed(cfg_.seed, "communities"));
  auto table = compute_hcnf(graph, communities, cfg_.workers);
  write_communities_csv(graph, communities, artifact("communities.csv"));
  write_hcnf_csv(table, artifact("hcnf.csv"));

  record_stage("hcnf", hash, outputs);
  return true;
}

bool Pipeline::embed_stage(EmbedMode mode) {
  const bool nt2v = mode == EmbedMode::NT2V;
  const std::string stage = nt2v ? "embed-nt2v" : "embed-n2v";
  require_artifact("csn_edges.tsv", "build-csn");
  require_artifact("csn_nodes.tsv", "build-csn");

  WalkConfig wcfg = nt2v ? cfg_.nt2v : cfg_.n2v;
  wcfg.seed = stage_seed(cfg_.seed, stage + ":walks");
  wcfg.workers = cfg_.workers;
  SkipgramConfig scfg = cfg_.skipgram;
  scfg.seed = stage_seed(cfg_.seed, stage + ":skipgram");
  scfg.workers = cfg_.workers > 0 ? cfg_.workers : 1;

  ojson stage_cfg;
  stage_cfg["walks"] = walks_json(wcfg, nt2v);
  stage_cfg["walks"]["seed"] = wcfg.seed;
  stage_cfg["skipgram"] = {{"dim", scfg.dim},
                           {"window", scfg.window},
                           {"negatives", scfg.negatives},
                           {"epochs", scfg.epochs},
                           {"learning_rate", scfg.learning_rate},
                           {"seed", scfg.seed},
                           {"workers", scfg.workers}};
  std::vector<std::string> inputs = {artifact("csn_edges.tsv"),
                                     artifact("csn_nodes.tsv")};
  if (nt2v) {
    stage_cfg["sample_fraction"] = cfg_.nt2v_sample_fraction;
    require_artifact("corpus.norm.jsonl", "ingest");
    if (cfg_.paths.word_vectors.empty())
      throw Error("embed-nt2v needs paths.word_vectors in the config");
    inputs.push_back(artifact("corpus.norm.jsonl"));
    inputs.push_back(cfg_.paths.word_vectors);
  }
  auto hash = stage_config_hash(stage, stage_cfg, inputs);
  stage_cfg["dump_walks"] = cfg_.dump_walks;
  const std::string vec_name = nt2v ? "embedding_nt2v.vec" : "embedding_n2v.vec";
  const std::string report_name = nt2v ? "embed_nt2v.json" : "embed_n2v.json";
  std::vector<std::string> outputs = {vec_name, report_name};
  if (nt2v) outputs.push_back("nt2v_sample_ids.txt");
  if (cfg_.dump_walks)
    outputs.push_back(nt2v ? "walks_nt2v.txt" : "walks_n2v.txt");
  if (stage_cached(stage, hash, outputs)) return false;

  auto graph = load_csn(artifact("csn_edges.tsv"), artifact("csn_nodes.tsv"));
  std::map<std::string, DenseVector> reprs;
  if (nt2v) {
    Corpus corpus = load_normalized_corpus();
    Corpus sample = sample_fraction_per_source(
        corpus, cfg_.nt2v_sample_fraction,
        stage_seed(cfg_.seed, "nt2v-sample"));
    std::vector<std::string> ids;
    for (const auto& a : sample.articles) ids.push_back(a.id);
    std::sort(ids.begin(), ids.end());
    std::ostringstream out;
    for (const auto& id : ids) out << id << '\n';
    write_file(artifact("nt2v_sample_ids.txt"), out.str());

    auto table = load_word_vectors(cfg_.paths.word_vectors);
    reprs = source_text_repr(sample, table);
  }

  std::vector<Walk> walks;
  Embedding emb = embed_sources(graph, reprs, wcfg, scfg, mode,
                                cfg_.dump_walks ? &walks : nullptr);
  save_embedding(emb, artifact(vec_name));
  if (cfg_.dump_walks)
    write_walks(walks, graph.node_ids,
                artifact(nt2v ? "walks_nt2v.txt" : "walks_n2v.txt"));

  ojson summary;
  summary["mode"] = emb.mode;
  summary["dim"] = emb.dim;
  summary["num_walks"] = emb.num_walks;
  summary["walk_length"] = emb.walk_length;
  summary["epoch_loss"] = emb.epoch_loss;
  std::vector<std::string> untrained;
  for (std::size_t i = 0; i < emb.ids.size(); ++i)
    if (!emb.trained[i]) untrained.push_back(emb.ids[i]);
  summary["untrained_sources"] = untrained;
  summary["config"] = cfg_.to_json();
  write_file(artifact(report_name), summary.dump(2));

  record_stage(stage, hash, outputs);
  return true;
}

namespace {

bool specs_need(const std::vector<std::string>& specs, const std::string& tok) {
  for (const auto& spec : specs)
    for (const auto& t : spec_tokens(spec))
      if (t == tok) return true;
  return false;
}

}  // namespace

bool Pipeline::features_stage() {
  require_artifact("corpus.norm.jsonl", "ingest");
  const bool want_ft = !cfg_.paths.word_vectors.empty();

  ojson stage_cfg;
  stage_cfg["lexicons"] = cfg_.paths.lexicons;
  stage_cfg["ft"] = want_ft;
  std::vector<std::string> inputs = {artifact("corpus.norm.jsonl")};
  if (want_ft) inputs.push_back(cfg_.paths.word_vectors);
  auto hash = stage_config_hash("features", stage_cfg, inputs);
  std::vector<std::string> outputs = {"features_nela.csv"};
  if (want_ft) outputs.push_back("features_ft.csv");
  if (stage_cached("features", hash, outputs)) return false;

  Corpus corpus = load_normalized_corpus();
  auto lexicons = LexiconSet::load(cfg_.paths.lexicons);

  std::vector<std::pair<std::string, std::vector<double>>> nela_rows(
      corpus.articles.size());
  int workers = cfg_.workers > 0 ? cfg_.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 32) num_threads(workers)
  for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
    auto fv = compute_nela_features(corpus.articles[i], lexicons);
    nela_rows[i] = {corpus.articles[i].id, std::move(fv.values)};
  }
  write_feature_csv(artifact("features_nela.csv"), lexicons.schema, nela_rows);

  if (want_ft) {
    auto table = load_word_vectors(cfg_.paths.word_vectors);
    auto schema = indexed_schema("ft", table.dim, FeatureGroup::Embedding,
                                 FeatureScope::Article);
    std::vector<std::pair<std::string, std::vector<double>>> ft_rows(
        corpus.articles.size());
#pragma omp parallel for schedule(dynamic, 32) num_threads(workers)
    for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
      auto fv = compute_ft_features(corpus.articles[i], table);
      ft_rows[i] = {corpus.articles[i].id, std::move(fv.values)};
    }
    write_feature_csv(artifact("features_ft.csv"), schema, ft_rows);
  }

  record_stage("features", hash, outputs);
  return true;
}

std::unordered_set<std::string> Pipeline::load_exclusion_ids() const {
  std::unordered_set<std::string> ids;
  for (const char* name : {"csn_exclusions.txt", "nt2v_sample_ids.txt"}) {
    std::string path = artifact(name);
    if (!fs::exists(path)) continue;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ids.insert(line);
  }
  return ids;
}

Corpus Pipeline::build_pool(
    const Corpus& corpus,
    const std::unordered_set<std::string>& excluded) const {
  Corpus pool = corpus;
  add_exclusions(pool, excluded);
  pool = drop_excluded(pool);
  return sample_per_source(pool, cfg_.experiment.per_source_n,
                           stage_seed(cfg_.seed, "pool-sample"));
}

FeatureBank Pipeline::load_bank(const std::vector<std::string>& spec_texts,
                                bool) const {
  validate_spec_tokens(spec_texts);
  FeatureBank bank;
  auto need = [&](const char* tok) { return specs_need(spec_texts, tok); };

  if (need("NELA")) {
    require_artifact("features_nela.csv", "features");
    bank.add(load_feature_csv(artifact("features_nela.csv"), "NELA",
                              nela_schema(), false));
  }
  if (need("FT")) {
    require_artifact("features_ft.csv", "features");
    // recover the table dimension from the header
    std::ifstream in(artifact("features_ft.csv"));
    std::string header;
    std::getline(in, header);
    std::size_t dim = split(header, ',').size() - 1;
    bank.add(load_feature_csv(
        artifact("features_ft.csv"), "FT",
        indexed_schema("ft", dim, FeatureGroup::Embedding,
                       FeatureScope::Article),
        false));
  }
  if (need("HCNF")) {
    require_artifact("hcnf.csv", "hcnf");
    FeatureSet set;
    set.name = "HCNF";
    auto schema = std::make_shared<FeatureSchema>();
    for (const auto& n : HcnfVector::names())
      schema->defs.push_back(
          {"hcnf_" + n, FeatureGroup::Network, FeatureScope::Source});
    set.schema = schema;
    set.source_level = true;
    std::istringstream in(read_file(artifact("hcnf.csv")));
    std::string line;
    std::getline(in, line);
    auto header = split(line, ',');
    if (header.size() != HcnfVector::names().size() + 1)
      throw Error("hcnf.csv does not have the 11 documented columns");
    for (std::size_t i = 0; i < HcnfVector::names().size(); ++i)
      if (header[i + 1] != HcnfVector::names()[i])
        throw Error("hcnf.csv column mismatch: " + header[i + 1]);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cols = split(line, ',');
      std::vector<double> values(cols.size() - 1);
      for (std::size_t i = 1; i < cols.size(); ++i)
        values[i - 1] = std::stod(cols[i]);
      set.by_key.emplace(cols[0], std::move(values));
    }
    bank.add(std::move(set));
  }
  if (need("N2V")) {
    require_artifact("embedding_n2v.vec", "embed-n2v");
    bank.add(FeatureBank::from_embedding(
        "N2V", load_embedding(artifact("embedding_n2v.vec"))));
  }
  if (need("NT2V")) {
    require_artifact("embedding_nt2v.vec", "embed-nt2v");
    bank.add(FeatureBank::from_embedding(
        "NT2V", load_embedding(artifact("embedding_nt2v.vec"))));
  }
  return bank;
}

bool Pipeline::train_stage() {
  require_artifact("corpus.norm.jsonl", "ingest");
  ojson stage_cfg;
  stage_cfg["specs"] = cfg_.experiment.specs;
  stage_cfg["forest"] = cfg_.to_json()["forest"];
  stage_cfg["per_source_n"] = cfg_.experiment.per_source_n;
  stage_cfg["seed"] = stage_seed(cfg_.seed, "train");

  FeatureBank bank = load_bank(cfg_.experiment.specs);
  std::vector<std::string> inputs = {artifact("corpus.norm.jsonl")};
  std::vector<std::string> outputs = {"train_report.json"};
  std::vector<std::string> model_names;
  for (const auto& spec : cfg_.experiment.specs) {
    model_names.push_back("model_" + sanitize(spec) + ".json");
    outputs.push_back(model_names.back());
  }
  auto hash = stage_config_hash("train", stage_cfg, inputs);
  if (stage_cached("train", hash, outputs)) return false;

  Corpus corpus = load_normalized_corpus();
  auto excluded = load_exclusion_ids();
  Corpus pool = build_pool(corpus, excluded);
  assert_no_leakage(pool, excluded);

  ojson summary;
  summary["models"] = ojson::array();
  for (std::size_t si = 0; si < cfg_.experiment.specs.size(); ++si) {
    const auto& spec_text = cfg_.experiment.specs[si];
    auto spec = FeatureSpec::parse(spec_text, bank);
    if (spec.ensemble)
      throw Error("train stage trains single models; ensemble specs are "
                  "evaluated by 'evaluate': " + spec_text);
    Dataset d = build_dataset(pool, bank, spec.members[0]);
    auto model = train_forest(d, cfg_.forest,
                              derive_seed(stage_seed(cfg_.seed, "train"),
                                          spec_text),
                              cfg_.workers);
    write_file(artifact(model_names[si]), model.serialize());
    std::vector<SchemaPtr> schemas;
    for (const auto& tok : spec.members[0])
      schemas.push_back(bank.at(tok).schema);
    write_importance_csv(model, assemble_schemas(schemas)->names(),
                         artifact("importance_" + sanitize(spec_text) + ".csv"));
    ojson entry;
    entry["spec"] = spec_text;
    entry["rows"] = d.size();
    entry["width"] = d.width;
    entry["model"] = model_names[si];
    entry["single_class_warning"] = model.single_class_warning;
    summary["models"].push_back(entry);
  }
  summary["config"] = cfg_.to_json();
  write_file(artifact("train_report.json"), summary.dump(2));
  record_stage("train", hash, outputs);
  return true;
}

namespace {

LosoResult parse_loso_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty loso predictions file");
  auto header = split(line, ',');
  if (header.size() < 4 || header[0] != "article")
    throw Error("unexpected loso predictions header");
  LosoResult r;
  std::vector<std::string> specs;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].rfind("pred:", 0) != 0)
      throw Error("unexpected loso predictions column: " + header[i]);
    specs.push_back(header[i].substr(5));
    r.preds[specs.back()] = {};
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != header.size())
      throw Error("ragged loso predictions row");
    r.article_ids.push_back(cols[0]);
    r.source_ids.push_back(cols[1]);
    r.labels.push_back(std::stoi(cols[2]));
    for (std::size_t i = 0; i < specs.size(); ++i)
      r.preds[specs[i]].push_back(std::stoi(cols[3 + i]));
  }
  return r;
}

}  // namespace

bool Pipeline::evaluate_stage(const std::string& protocol) {
  const std::vector<std::string> known = {"holdout", "loso", "conditional",
                                          "error-dist"};
  if (std::find(known.begin(), known.end(), protocol) == known.end())
    throw Error("unknown evaluate protocol '" + protocol +
                "'; expected one of holdout, loso, conditional, error-dist");
  const std::string stage = "evaluate-" + protocol;

  if (protocol == "conditional" || protocol == "error-dist") {
    // derived from the stored leave-one-source-out predictions
    require_artifact("loso_predictions.csv", "evaluate loso");
    ojson stage_cfg;
    stage_cfg["protocol"] = protocol;
    auto hash = stage_config_hash(stage, stage_cfg,
                                  {artifact("loso_predictions.csv")});
    std::vector<std::string> outputs =
        protocol == "conditional"
            ? std::vector<std::string>{"conditional.csv",
                                       "evaluate_conditional.json"}
            : std::vector<std::string>{"error_distribution.csv",
                                       "evaluate_error_dist.json"};
    if (stage_cached(stage, hash, outputs)) return false;

    auto loso = parse_loso_csv(read_file(artifact("loso_predictions.csv")));
    ojson summary;
    if (protocol == "conditional") {
      std::vector<ConditionalReport> reports;
      for (const auto& [spec_a, preds_a] : loso.preds) {
        for (const auto& [spec_b, preds_b] : loso.preds) {
          if (spec_a == spec_b) continue;
          auto r = conditional_accuracy(preds_a, preds_b, loso.labels);
          r.feature_a = spec_a;
          r.feature_b = spec_b;
          reports.push_back(std::move(r));
        }
      }
      write_conditional_csv(reports, artifact("conditional.csv"));
      summary["pairs"] = reports.size();
    } else {
      std::vector<std::pair<std::string, ErrorDistribution>> rows;
      for (const auto& [spec, preds] : loso.preds)
        rows.emplace_back(spec, error_distribution(preds, loso.labels));
      write_error_distribution_csv(rows, artifact("error_distribution.csv"));
      summary["specs"] = rows.size();
    }
    summary["config"] = cfg_.to_json();
    write_file(artifact(protocol == "conditional"
                            ? "evaluate_conditional.json"
                            : "evaluate_error_dist.json"),
               summary.dump(2));
    record_stage(stage, hash, outputs);
    return true;
  }

  require_artifact("corpus.norm.jsonl", "ingest");
  FeatureBank bank = load_bank(cfg_.experiment.specs);
  ojson stage_cfg;
  stage_cfg["protocol"] = protocol;
  stage_cfg["config"] = cfg_.to_json();
  auto hash =
      stage_config_hash(stage, stage_cfg, {artifact("corpus.norm.jsonl")});
  std::vector<std::string> outputs =
      protocol == "holdout"
          ? std::vector<std::string>{"holdout_runs.csv", "holdout_summary.csv",
                                     "evaluate_holdout.json"}
          : std::vector<std::string>{"loso_predictions.csv",
                                     "evaluate_loso.json"};
  if (stage_cached(stage, hash, outputs)) return false;

  Corpus corpus = load_normalized_corpus();
  auto excluded = load_exclusion_ids();
  Corpus pool = build_pool(corpus, excluded);

  ojson summary;
  if (protocol == "holdout") {
    std::vector<std::pair<std::string, SourceLabel>> labeled;
    for (const auto& s : pool.sources)
      if (s.label != SourceLabel::Unlabeled)
        labeled.emplace_back(s.id, s.label);
    auto splits = make_splits(labeled, cfg_.experiment.frac,
                              cfg_.experiment.runs,
                              stage_seed(cfg_.seed, "splits"));
    auto results = holdout_experiment(
        pool, bank, cfg_.experiment.specs, splits, cfg_.forest,
        stage_seed(cfg_.seed, "holdout"), &excluded, cfg_.workers);
    write_holdout_csv(results, artifact("holdout_runs.csv"),
                      artifact("holdout_summary.csv"));
    summary["means"] = ojson::array();
    for (const auto& r : results) {
      ojson entry;
      entry["spec"] = r.spec;
      entry["accuracy"] = r.mean.accuracy;
      entry["f1"] = r.mean.f1;
      entry["precision"] = r.mean.precision;
      entry["recall"] = r.mean.recall;
      summary["means"].push_back(entry);
    }
  } else {
    auto loso = leave_one_source_out(pool, bank, cfg_.experiment.specs,
                                     cfg_.forest,
                                     stage_seed(cfg_.seed, "loso"), &excluded,
                                     cfg_.workers);
    write_loso_csv(loso, artifact("loso_predictions.csv"));
    summary["rows"] = loso.article_ids.size();
  }
  summary["config"] = cfg_.to_json();
  write_file(artifact(protocol == "holdout" ? "evaluate_holdout.json"
                                            : "evaluate_loso.json"),
             summary.dump(2));
  record_stage(stage, hash, outputs);
  return true;
}

bool Pipeline::temporal_stage() {
  require_artifact("corpus.norm.jsonl", "ingest");
  ojson stage_cfg;
  stage_cfg["config"] = cfg_.to_json();
  std::vector<std::string> inputs = {artifact("corpus.norm.jsonl")};
  const bool want_ft = specs_need(cfg_.experiment.specs, "FT") ||
                       specs_need(cfg_.experiment.specs, "NT2V");
  if (want_ft) {
    if (cfg_.paths.word_vectors.empty())
      throw Error("temporal: FT/NT2V specs need paths.word_vectors");
    inputs.push_back(cfg_.paths.word_vectors);
  }
  auto hash = stage_config_hash("temporal", stage_cfg, inputs);
  std::vector<std::string> outputs = {"temporal_timeseries.csv",
                                      "temporal_report.json"};
  if (stage_cached("temporal", hash, outputs)) return false;

  Corpus corpus = load_normalized_corpus();
  auto lexicons_path = cfg_.paths.lexicons;
  const auto& specs = cfg_.experiment.specs;

  WordVectorTable table;
  if (want_ft) table = load_word_vectors(cfg_.paths.word_vectors);

  BankBuilder builder = [&](const Corpus& month1,
                            std::unordered_set<std::string>& exclusions) {
    FeatureBank bank;
    const bool need_net = specs_need(specs, "HCNF") ||
                          specs_need(specs, "N2V") || specs_need(specs, "NT2V");
    CsnGraph graph;
    if (need_net) {
      auto model = fit_tfidf(month1);
      auto pairs = find_shared_pairs(month1, model, cfg_.csn.window_days,
                                     cfg_.csn.theta, cfg_.workers);
      graph = build_csn(pairs, month1);
      exclusions = csn_exclusion_set(pairs);
    }
    if (specs_need(specs, "HCNF")) {
      auto communities = detect_communities(
          graph, stage_seed(cfg_.seed, "temporal-communities"));
      bank.add(FeatureBank::from_hcnf(
          compute_hcnf(graph, communities, cfg_.workers)));
    }
    if (specs_need(specs, "N2V")) {
      WalkConfig wcfg = cfg_.n2v;
      wcfg.seed = stage_seed(cfg_.seed, "temporal-n2v-walks");
      wcfg.workers = cfg_.workers;
      SkipgramConfig scfg = cfg_.skipgram;
      scfg.seed = stage_seed(cfg_.seed, "temporal-n2v-skipgram");
      scfg.workers = cfg_.workers > 0 ? cfg_.workers : 1;
      bank.add(FeatureBank::from_embedding(
          "N2V", embed_sources(graph, {}, wcfg, scfg, EmbedMode::N2V)));
    }
    if (specs_need(specs, "NT2V")) {
      Corpus sample = sample_fraction_per_source(
          month1, cfg_.nt2v_sample_fraction,
          stage_seed(cfg_.seed, "temporal-nt2v-sample"));
      for (const auto& a : sample.articles) exclusions.insert(a.id);
      auto reprs = source_text_repr(sample, table);
      WalkConfig wcfg = cfg_.nt2v;
      wcfg.seed = stage_seed(cfg_.seed, "temporal-nt2v-walks");
      wcfg.workers = cfg_.workers;
      SkipgramConfig scfg = cfg_.skipgram;
      scfg.seed = stage_seed(cfg_.seed, "temporal-nt2v-skipgram");
      scfg.workers = cfg_.workers > 0 ? cfg_.workers : 1;
      bank.add(FeatureBank::from_embedding(
          "NT2V", embed_sources(graph, reprs, wcfg, scfg, EmbedMode::NT2V)));
    }
    if (specs_need(specs, "NELA")) {
      auto lexicons = LexiconSet::load(lexicons_path);
      FeatureSet set;
      set.name = "NELA";
      set.schema = lexicons.schema;
      for (const auto& a : corpus.articles)
        set.by_key.emplace(a.id,
                           compute_nela_features(a, lexicons).values);
      bank.add(std::move(set));
    }
    if (specs_need(specs, "FT")) {
      FeatureSet set;
      set.name = "FT";
      set.schema = indexed_schema("ft", table.dim, FeatureGroup::Embedding,
                                  FeatureScope::Article);
      for (const auto& a : corpus.articles)
        set.by_key.emplace(a.id, compute_ft_features(a, table).values);
      bank.add(std::move(set));
    }
    return bank;
  };

  TemporalParams params;
  params.train_days = cfg_.temporal.train_days;
  params.slice_days = cfg_.temporal.slice_days;
  params.runs = cfg_.experiment.runs;
  params.frac = cfg_.experiment.frac;
  params.per_source_n = cfg_.experiment.per_source_n;
  params.forest = cfg_.forest;
  params.seed = stage_seed(cfg_.seed, "temporal");
  params.workers = cfg_.workers;

  auto reports = temporal_experiment(corpus, builder, specs, params);
  write_timeseries_csv(reports, artifact("temporal_timeseries.csv"));

  ojson summary;
  summary["series"] = ojson::array();
  for (const auto& r : reports) {
    ojson entry;
    entry["spec"] = r.spec;
    entry["in_time"] = r.in_time;
    entry["forecast"] = r.forecast;
    entry["slices"] = r.slices.size();
    summary["series"].push_back(entry);
  }
  summary["config"] = cfg_.to_json();
  write_file(artifact("temporal_report.json"), summary.dump(2));
  record_stage("temporal", hash, outputs);
  return true;
}

bool Pipeline::report_stage() {
  ojson report;
  report["workdir"] = cfg_.paths.workdir;
  report["manifest"] = manifest_;
  for (const char* name :
       {"ingest_report.json", "embed_n2v.json", "embed_nt2v.json",
        "train_report.json", "evaluate_holdout.json", "evaluate_loso.json",
        "evaluate_conditional.json", "evaluate_error_dist.json",
        "temporal_report.json"}) {
    std::string path = artifact(name);
    if (fs::exists(path)) report["summaries"][name] = json::parse(read_file(path));
  }
  report["config"] = cfg_.to_json();
  write_file(artifact("report.json"), report.dump(2));
  return true;
}

}  // namespace csnet

