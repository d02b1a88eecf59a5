#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "csnet/pipeline.hpp"
#include "doctest.h"
#include "synth.hpp"

using namespace csnet;
namespace fs = std::filesystem;

namespace {

// Labeled stream plus planted cross-source copies so the network stages
// have real edges, plus a word-vector file covering the vocabulary.
struct Fixture {
  fs::path dir;
  PipelineConfig cfg;
};

Corpus fixture_corpus(std::uint64_t seed) {
  auto corpus = synth::labeled_stream(3, 3, 40, 42, seed);
  Rng rng(seed + 1);
  std::vector<Article> articles = corpus.articles;
  int copy_id = 0;
  for (std::size_t i = 0; i < articles.size(); i += 7) {
    const auto& origin = articles[i];
    Article copy = origin;
    copy.id = "copy" + std::to_string(copy_id++);
    copy.source_id = origin.source_id[0] == 'r'
                         ? "u" + std::to_string(rng.next_below(3))
                         : "r" + std::to_string(rng.next_below(3));
    copy.published_at = origin.published_at + 3600 * (1 + rng.next_below(48));
    articles.push_back(std::move(copy));
  }
  std::unordered_map<std::string, SourceLabel> labels;
  for (const auto& s : corpus.sources) labels[s.id] = s.label;
  return make_corpus(std::move(articles), labels);
}

Fixture make_fixture(const std::string& name, std::uint64_t seed = 3) {
  Fixture f;
  f.dir = fs::temp_directory_path() / ("csnet_pipe_" + name);
  fs::remove_all(f.dir);
  fs::create_directories(f.dir);

  auto corpus = fixture_corpus(seed);
  write_corpus(corpus, (f.dir / "corpus.jsonl").string());
  write_labels(corpus, (f.dir / "labels.tsv").string());

  {
    std::ofstream out(f.dir / "vectors.vec");
    Rng rng(seed + 2);
    for (int w = 0; w < 500; ++w) {
      out << "word" << w;
      for (int d = 0; d < 6; ++d) out << ' ' << (0.5 + rng.next_double());
      out << '\n';
    }
  }

  auto& cfg = f.cfg;
  cfg.paths.corpus = (f.dir / "corpus.jsonl").string();
  cfg.paths.labels = (f.dir / "labels.tsv").string();
  cfg.paths.word_vectors = (f.dir / "vectors.vec").string();
  cfg.paths.lexicons = CSNET_LEXICON_DIR;
  cfg.paths.workdir = (f.dir / "work").string();
  cfg.n2v.num_walks = 10;
  cfg.n2v.walk_length = 8;
  cfg.nt2v.num_walks = 10;
  cfg.nt2v.walk_length = 8;
  cfg.nt2v.k = 3;
  cfg.skipgram.dim = 6;
  cfg.skipgram.epochs = 2;
  cfg.forest.n_trees = 10;
  cfg.experiment.runs = 3;
  cfg.experiment.frac = 0.34;
  cfg.experiment.per_source_n = 12;
  cfg.experiment.specs = {"NELA", "N2V", "NELA+N2V"};
  cfg.seed = 11;
  cfg.workers = 2;
  return f;
}

}  // namespace

TEST_CASE("config validation") {
  auto f = make_fixture("cfg");

  SUBCASE("theta out of range") {
    auto path = (f.dir / "bad.json").string();
    write_file(path, R"({"csn": {"theta": 1.01}})");
    CHECK_THROWS_WITH_AS(PipelineConfig::from_file(path),
                         doctest::Contains("theta"), Error);
  }

  SUBCASE("unknown feature token lists the valid ones") {
    auto path = (f.dir / "bad2.json").string();
    write_file(path, R"({"experiment": {"specs": ["NELA", "BERT"]}})");
    CHECK_THROWS_WITH_AS(PipelineConfig::from_file(path),
                         doctest::Contains("NELA, FT, HCNF, N2V, NT2V"),
                         Error);
  }

  SUBCASE("defaults carry the documented constants") {
    PipelineConfig cfg;
    CHECK(cfg.csn.theta == 0.85);
    CHECK(cfg.csn.window_days == 5);
    CHECK(cfg.skipgram.dim == 40);
    CHECK(cfg.n2v.num_walks == 1000);
    CHECK(cfg.n2v.walk_length == 80);
    CHECK(cfg.n2v.p == 0.5);
    CHECK(cfg.n2v.q == 0.5);
    CHECK(cfg.nt2v.t == 0.8);
    CHECK(cfg.nt2v.p == 0.5);
    CHECK(cfg.nt2v.q == 0.4);
    CHECK(cfg.nt2v.min_sim == 0.5);
    CHECK(cfg.nt2v_sample_fraction == 0.2);
    CHECK(cfg.experiment.runs == 50);
    CHECK(cfg.experiment.frac == 0.2);
    CHECK(cfg.experiment.per_source_n == 1000);
  }

  SUBCASE("round-trips through json") {
    auto path = (f.dir / "echo.json").string();
    write_file(path, f.cfg.to_json().dump());
    auto cfg2 = PipelineConfig::from_file(path);
    CHECK(cfg2.to_json() == f.cfg.to_json());
  }
}

TEST_CASE("stage caching and artifact hashes") {
  auto f = make_fixture("cache");
  Pipeline p(f.cfg);
  CHECK(p.ingest());
  CHECK(p.build_csn_stage());

  auto manifest1 = read_file(p.artifact("manifest.json"));

  SUBCASE("second run is skipped and hashes are unchanged") {
    Pipeline p2(f.cfg);
    CHECK_FALSE(p2.ingest());
    CHECK_FALSE(p2.build_csn_stage());
    CHECK(read_file(p2.artifact("manifest.json")) == manifest1);
  }

  SUBCASE("changed input re-runs the stage") {
    auto corpus = fixture_corpus(99);  // different content
    write_corpus(corpus, f.cfg.paths.corpus);
    write_labels(corpus, f.cfg.paths.labels);
    Pipeline p2(f.cfg);
    CHECK(p2.ingest());
    CHECK(p2.build_csn_stage());
  }

  SUBCASE("changed parameter re-runs the stage") {
    auto cfg = f.cfg;
    cfg.csn.theta = 0.9;
    Pipeline p2(cfg);
    CHECK_FALSE(p2.ingest());  // ingest does not depend on theta? it hashes
                               // the whole config, so it re-runs
    CHECK(p2.build_csn_stage());
  }
}

TEST_CASE("missing upstream artifact names the producing stage") {
  auto f = make_fixture("missing");
  Pipeline p(f.cfg);
  CHECK_THROWS_WITH_AS(p.build_csn_stage(), doctest::Contains("ingest"),
                       Error);
  CHECK_THROWS_WITH_AS(p.evaluate_stage("conditional"),
                       doctest::Contains("evaluate loso"), Error);
}

TEST_CASE("full stage sequence produces the documented reports") {
  auto f = make_fixture("full");
  Pipeline p(f.cfg);
  p.ingest();
  p.build_csn_stage();
  p.hcnf_stage();
  p.embed_stage(EmbedMode::N2V);
  p.features_stage();

  SUBCASE("bank width matches registry plus embedding dimension") {
    auto corpus = load_corpus(p.artifact("corpus.norm.jsonl"),
                              p.artifact("labels.norm.tsv"));
    FeatureBank bank;
    // exercised through evaluate; here just rebuild via the stage outputs
    CHECK(fs::exists(p.artifact("features_nela.csv")));
    CHECK(fs::exists(p.artifact("embedding_n2v.vec")));
  }

  SUBCASE("evaluate holdout emits one row per spec and run plus means") {
    CHECK(p.evaluate_stage("holdout"));
    auto runs = read_file(p.artifact("holdout_runs.csv"));
    std::size_t lines = std::count(runs.begin(), runs.end(), '\n');
    CHECK(lines == 1 + f.cfg.experiment.specs.size() *
                           static_cast<std::size_t>(f.cfg.experiment.runs));
    auto summary = read_file(p.artifact("holdout_summary.csv"));
    CHECK(std::count(summary.begin(), summary.end(), '\n') ==
          1 + f.cfg.experiment.specs.size());
    auto echo = nlohmann::json::parse(read_file(p.artifact("evaluate_holdout.json")));
    CHECK(echo.contains("config"));
    CHECK(echo["config"]["csn"]["theta"] == 0.85);
  }

  SUBCASE("loso then conditional and error distribution") {
    CHECK(p.evaluate_stage("loso"));
    CHECK(p.evaluate_stage("conditional"));
    CHECK(p.evaluate_stage("error-dist"));
    auto cond = read_file(p.artifact("conditional.csv"));
    // one ordered pair per spec pair
    std::size_t n_specs = f.cfg.experiment.specs.size();
    CHECK(std::count(cond.begin(), cond.end(), '\n') ==
          1 + n_specs * (n_specs - 1));
    CHECK(fs::exists(p.artifact("error_distribution.csv")));
  }

  SUBCASE("train writes one model per non-ensemble spec") {
    CHECK(p.train_stage());
    CHECK(fs::exists(p.artifact("model_nela.json")));
    CHECK(fs::exists(p.artifact("model_n2v.json")));
    CHECK(fs::exists(p.artifact("model_nela_n2v.json")));
    auto model = ForestModel::deserialize(
        read_file(p.artifact("model_nela_n2v.json")));
    CHECK(model.width == nela_schema()->size() + 6);
  }

  SUBCASE("report aggregates the summaries") {
    p.evaluate_stage("holdout");
    CHECK(p.report_stage());
    auto report = nlohmann::json::parse(read_file(p.artifact("report.json")));
    CHECK(report.contains("manifest"));
    CHECK(report["summaries"].contains("evaluate_holdout.json"));
  }
}

TEST_CASE("temporal stage on a six-week fixture yields one forecast slice") {
  auto f = make_fixture("temporal");
  f.cfg.experiment.specs = {"NELA"};
  f.cfg.experiment.runs = 3;
  Pipeline p(f.cfg);
  p.ingest();
  CHECK(p.temporal_stage());
  auto report =
      nlohmann::json::parse(read_file(p.artifact("temporal_report.json")));
  REQUIRE(report["series"].size() == 1);
  CHECK(report["series"][0]["slices"] == 1);
  CHECK(fs::exists(p.artifact("temporal_timeseries.csv")));
}

TEST_CASE("evaluate rejects unknown protocols") {
  auto f = make_fixture("proto");
  Pipeline p(f.cfg);
  CHECK_THROWS_WITH_AS(p.evaluate_stage("bootstrap"),
                       doctest::Contains("holdout"), Error);
}

TEST_CASE("nt2v embed records the sample and keeps it out of pools") {
  auto f = make_fixture("nt2v");
  f.cfg.experiment.specs = {"NT2V"};
  Pipeline p(f.cfg);
  p.ingest();
  p.build_csn_stage();
  p.embed_stage(EmbedMode::NT2V);
  CHECK(fs::exists(p.artifact("embedding_nt2v.vec")));
  CHECK(fs::exists(p.artifact("nt2v_sample_ids.txt")));
  CHECK(p.evaluate_stage("holdout"));
  // pool must exclude both the pair articles and the text-repr sample
  auto sample = read_file(p.artifact("nt2v_sample_ids.txt"));
  CHECK(!sample.empty());
}
