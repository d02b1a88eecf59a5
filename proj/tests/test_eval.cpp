#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "csnet/experiments.hpp"
#include "doctest.h"
#include "json.hpp"
#include "synth.hpp"

using namespace csnet;

TEST_CASE("compute_metrics") {
  SUBCASE("perfect predictions") {
    auto m = compute_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
  }
  SUBCASE("all wrong on balanced data") {
    auto m = compute_metrics({1, 0, 1, 0}, {0, 1, 0, 1});
    CHECK(m.accuracy == 0.0);
  }
  SUBCASE("hand confusion: TP=3 FP=1 FN=1 TN=5") {
    std::vector<int> labels = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
    std::vector<int> preds = {1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
    auto m = compute_metrics(preds, labels);
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.75));
    CHECK(m.accuracy == doctest::Approx(0.8));
    CHECK(m.f1 == doctest::Approx(2 * 0.75 * 0.75 / 1.5).epsilon(1e-12));
  }
  SUBCASE("zero-division flag") {
    auto m = compute_metrics({0, 0}, {0, 0});
    CHECK(m.zero_division);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(compute_metrics({1}, {1, 0}), Error);
  }
  SUBCASE("f1 identity holds on random inputs") {
    Rng rng(4);
    for (int t = 0; t < 30; ++t) {
      std::vector<int> preds(40), labels(40);
      for (auto& v : preds) v = static_cast<int>(rng.next_below(2));
      for (auto& v : labels) v = static_cast<int>(rng.next_below(2));
      auto m = compute_metrics(preds, labels);
      if (m.precision + m.recall > 0)
        CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall /
                                      (m.precision + m.recall))
                          .epsilon(1e-12));
      long agree = 0;
      for (int i = 0; i < 40; ++i) agree += preds[i] == labels[i];
      CHECK(m.accuracy == doctest::Approx(agree / 40.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("make_splits") {
  std::vector<std::pair<std::string, SourceLabel>> sources;
  for (int i = 0; i < 5; ++i)
    sources.emplace_back("r" + std::to_string(i), SourceLabel::Reliable);
  for (int i = 0; i < 5; ++i)
    sources.emplace_back("u" + std::to_string(i), SourceLabel::Unreliable);

  SUBCASE("10 sources at frac 0.2 give 2 test sources per run") {
    auto plans = make_splits(sources, 0.2, 10, 1);
    for (const auto& p : plans) {
      CHECK(p.test_sources.size() == 2);
      CHECK(p.train_sources.size() == 8);
    }
  }
  SUBCASE("same seed gives identical plans") {
    auto p1 = make_splits(sources, 0.2, 5, 9);
    auto p2 = make_splits(sources, 0.2, 5, 9);
    for (int r = 0; r < 5; ++r) {
      CHECK(p1[r].test_sources == p2[r].test_sources);
      CHECK(p1[r].train_sources == p2[r].train_sources);
    }
  }
  SUBCASE("both classes present on both sides") {
    auto plans = make_splits(sources, 0.2, 20, 3);
    for (const auto& p : plans) {
      std::set<std::string> test(p.test_sources.begin(), p.test_sources.end());
      bool test_r = false, test_u = false, train_r = false, train_u = false;
      for (const auto& [id, label] : sources) {
        bool in_test = test.count(id) > 0;
        if (label == SourceLabel::Reliable) (in_test ? test_r : train_r) = true;
        if (label == SourceLabel::Unreliable)
          (in_test ? test_u : train_u) = true;
      }
      CHECK(test_r);
      CHECK(test_u);
      CHECK(train_r);
      CHECK(train_u);
    }
  }
  SUBCASE("50 runs over 52 sources cover every source in some test set") {
    std::vector<std::pair<std::string, SourceLabel>> many;
    for (int i = 0; i < 25; ++i)
      many.emplace_back("r" + std::to_string(i), SourceLabel::Reliable);
    for (int i = 0; i < 27; ++i)
      many.emplace_back("u" + std::to_string(i), SourceLabel::Unreliable);
    auto plans = make_splits(many, 0.2, 50, 7);
    std::set<std::string> covered;
    for (const auto& p : plans)
      covered.insert(p.test_sources.begin(), p.test_sources.end());
    CHECK(covered.size() == many.size());
  }
  SUBCASE("train and test never overlap") {
    auto plans = make_splits(sources, 0.3, 10, 5);
    for (const auto& p : plans) {
      std::set<std::string> test(p.test_sources.begin(), p.test_sources.end());
      for (const auto& s : p.train_sources) CHECK(test.count(s) == 0);
    }
  }
  SUBCASE("too few sources per class is an error") {
    std::vector<std::pair<std::string, SourceLabel>> few = {
        {"r0", SourceLabel::Reliable}, {"u0", SourceLabel::Unreliable}};
    CHECK_THROWS_AS(make_splits(few, 0.2, 5, 1), Error);
  }
}

TEST_CASE("conditional_accuracy") {
  SUBCASE("B perfect while A errs gives conditional 1.0") {
    std::vector<int> labels = {1, 1, 0, 0};
    std::vector<int> a = {0, 1, 0, 1};  // wrong on rows 0 and 3
    std::vector<int> b = labels;
    auto r = conditional_accuracy(a, b, labels);
    CHECK(r.p_a_wrong == doctest::Approx(0.5));
    REQUIRE(r.cond_b_right.has_value());
    CHECK(*r.cond_b_right == doctest::Approx(1.0));
  }
  SUBCASE("hand fixture: A wrong on 4 rows, B right on 2 of those") {
    std::vector<int> labels = {1, 1, 1, 1, 0, 0};
    std::vector<int> a = {0, 0, 0, 0, 0, 0};  // wrong on rows 0-3
    std::vector<int> b = {1, 1, 0, 0, 0, 0};  // right on rows 0,1 of those
    auto r = conditional_accuracy(a, b, labels);
    CHECK(r.p_a_wrong == doctest::Approx(4.0 / 6.0));
    CHECK(*r.cond_b_right == doctest::Approx(0.5));
  }
  SUBCASE("A without errors reports an absent conditional") {
    std::vector<int> labels = {1, 0};
    auto r = conditional_accuracy(labels, {0, 1}, labels);
    CHECK(r.p_a_wrong == 0.0);
    CHECK_FALSE(r.cond_b_right.has_value());
  }
  SUBCASE("law of total mistakes on random vectors") {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
      std::vector<int> labels(30), a(30), b(30);
      for (auto& v : labels) v = static_cast<int>(rng.next_below(2));
      for (auto& v : a) v = static_cast<int>(rng.next_below(2));
      for (auto& v : b) v = static_cast<int>(rng.next_below(2));
      auto r = conditional_accuracy(a, b, labels);
      long a_wrong_b_wrong = 0;
      for (int i = 0; i < 30; ++i)
        if (a[i] != labels[i] && b[i] != labels[i]) ++a_wrong_b_wrong;
      CHECK(r.a_wrong_b_right_count + a_wrong_b_wrong == r.a_wrong_count);
    }
  }
}

TEST_CASE("error_distribution") {
  SUBCASE("errors only on unreliable rows") {
    std::vector<int> labels = {0, 0, 1, 1};
    std::vector<int> preds = {0, 0, 0, 0};
    auto d = error_distribution(preds, labels);
    CHECK(d.reliable_share == 0.0);
    CHECK(d.unreliable_share == 1.0);
  }
  SUBCASE("2 reliable and 6 unreliable errors") {
    std::vector<int> labels, preds;
    for (int i = 0; i < 2; ++i) {
      labels.push_back(0);
      preds.push_back(1);
    }
    for (int i = 0; i < 6; ++i) {
      labels.push_back(1);
      preds.push_back(0);
    }
    for (int i = 0; i < 4; ++i) {
      labels.push_back(0);
      preds.push_back(0);
    }
    auto d = error_distribution(preds, labels);
    CHECK(d.reliable_share == doctest::Approx(0.25));
    CHECK(d.unreliable_share == doctest::Approx(0.75));
    CHECK(d.reliable_share + d.unreliable_share == doctest::Approx(1.0));
  }
  SUBCASE("no errors sets the flag") {
    auto d = error_distribution({1, 0}, {1, 0});
    CHECK(d.no_errors);
    CHECK(d.reliable_share == 0.0);
    CHECK(d.unreliable_share == 0.0);
  }
}

TEST_CASE("build_dataset replicates source-level features per article") {
  auto corpus = synth::labeled_stream(2, 2, 5, 10, 1);
  FeatureBank bank;
  bank.add(synth::planted_article_signal("ART", corpus, 1.0, 0.1, 2));
  bank.add(synth::planted_source_signal("SRC", corpus, 1.0, 0.1, 3));

  auto d = build_dataset(corpus, bank, {"ART", "SRC"});
  CHECK(d.width == 2 + 3);
  CHECK(d.size() == corpus.articles.size());
  // all rows of one source share the source block
  std::map<std::string, std::vector<double>> seen;
  for (std::size_t r = 0; r < d.size(); ++r) {
    std::vector<double> block(d.rows[r].begin() + 2, d.rows[r].end());
    auto [it, inserted] = seen.emplace(d.row_meta[r].second, block);
    if (!inserted) CHECK(it->second == block);
  }

  SUBCASE("unknown set name lists the available ones") {
    CHECK_THROWS_WITH_AS(build_dataset(corpus, bank, {"NOPE"}),
                         doctest::Contains("unknown feature set"), Error);
  }
  SUBCASE("missing key is an error") {
    FeatureBank partial;
    auto set = synth::planted_article_signal("PART", corpus, 1.0, 0.1, 2);
    set.by_key.erase(corpus.articles.front().id);
    partial.add(std::move(set));
    CHECK_THROWS_AS(build_dataset(corpus, partial, {"PART"}), Error);
  }
}

TEST_CASE("feature spec parsing") {
  auto corpus = synth::labeled_stream(2, 2, 3, 5, 1);
  FeatureBank bank;
  bank.add(synth::planted_article_signal("A", corpus, 1, 0.1, 1));
  bank.add(synth::planted_article_signal("B", corpus, 1, 0.1, 2));

  auto single = FeatureSpec::parse("A", bank);
  CHECK_FALSE(single.ensemble);
  CHECK(single.members == std::vector<std::vector<std::string>>{{"A"}});

  auto concat = FeatureSpec::parse("A+B", bank);
  CHECK(concat.members == std::vector<std::vector<std::string>>{{"A", "B"}});

  auto ens = FeatureSpec::parse("ensemble:A,B", bank);
  CHECK(ens.ensemble);
  REQUIRE(ens.members.size() == 2);

  CHECK_THROWS_AS(FeatureSpec::parse("ensemble:A", bank), Error);
  CHECK_THROWS_AS(FeatureSpec::parse("C", bank), Error);
}

TEST_CASE("leave one source out") {
  auto corpus = synth::labeled_stream(3, 3, 8, 10, 5);
  FeatureBank bank;
  bank.add(synth::planted_article_signal("STRONG", corpus, 2.0, 0.2, 7));
  bank.add(synth::planted_article_signal("WEAK", corpus, 0.1, 1.0, 8));

  ForestParams params;
  params.n_trees = 30;
  auto result =
      leave_one_source_out(corpus, bank, {"STRONG", "WEAK"}, params, 11);

  SUBCASE("alignment identical across feature sets") {
    CHECK(result.preds.at("STRONG").size() == result.article_ids.size());
    CHECK(result.preds.at("WEAK").size() == result.article_ids.size());
    CHECK(result.article_ids.size() == corpus.articles.size());
  }

  SUBCASE("planted signal classifies held-out sources perfectly") {
    const auto& preds = result.preds.at("STRONG");
    for (std::size_t i = 0; i < preds.size(); ++i)
      CHECK(preds[i] == result.labels[i]);
  }

  SUBCASE("two-source smallest case") {
    auto tiny = synth::labeled_stream(1, 1, 6, 5, 2);
    FeatureBank tb;
    tb.add(synth::planted_article_signal("S", tiny, 2.0, 0.1, 3));
    auto r = leave_one_source_out(tiny, tb, {"S"}, params, 1);
    CHECK(r.article_ids.size() == tiny.articles.size());
    std::set<std::string> held(r.source_ids.begin(), r.source_ids.end());
    CHECK(held.size() == 2);
  }
}

TEST_CASE("holdout experiment") {
  auto corpus = synth::labeled_stream(4, 4, 12, 10, 21);
  FeatureBank bank;
  bank.add(synth::planted_source_signal("NET", corpus, 2.0, 0.3, 22));
  bank.add(synth::planted_article_signal("TEXT", corpus, 0.35, 0.5, 23));
  bank.add(synth::constant_feature("CONST", corpus));

  std::vector<std::pair<std::string, SourceLabel>> labeled;
  for (const auto& s : corpus.sources) labeled.emplace_back(s.id, s.label);
  auto splits = make_splits(labeled, 0.25, 12, 31);

  ForestParams params;
  params.n_trees = 40;
  auto results = holdout_experiment(
      corpus, bank, {"TEXT", "NET", "TEXT+NET", "ensemble:TEXT,NET", "CONST"},
      splits, params, 17);

  std::map<std::string, Metrics> means;
  for (const auto& r : results) means[r.spec] = r.mean;

  SUBCASE("mean equals the mean of per-run metrics") {
    for (const auto& r : results) {
      double acc = 0;
      for (const auto& m : r.per_run) acc += m.accuracy;
      CHECK(r.mean.accuracy ==
            doctest::Approx(acc / r.per_run.size()).epsilon(1e-12));
      CHECK(r.per_run.size() == splits.size());
    }
  }

  SUBCASE("combined features beat weak text alone") {
    CHECK(means.at("TEXT+NET").accuracy > means.at("TEXT").accuracy);
    CHECK(means.at("NET").accuracy > means.at("TEXT").accuracy);
  }

  SUBCASE("constant feature lands near the majority rate") {
    CHECK(means.at("CONST").accuracy == doctest::Approx(0.5).epsilon(0.25));
  }

  SUBCASE("leakage assertion fires on forbidden pool articles") {
    std::unordered_set<std::string> forbidden = {corpus.articles.front().id};
    CHECK_THROWS_AS(holdout_experiment(corpus, bank, {"TEXT"}, splits, params,
                                       17, &forbidden),
                    Error);
  }
}

TEST_CASE("bundled reference metrics parse and stay in range") {
  auto path = std::string(CSNET_LEXICON_DIR) + "/../reference_metrics.json";
  auto j = nlohmann::json::parse(read_file(path));
  REQUIRE(j.contains("holdout"));
  for (const auto& [spec, m] : j["holdout"].items()) {
    for (const char* key : {"accuracy", "f1", "precision", "recall"}) {
      double v = m[key].get<double>();
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(j["holdout"].size() == 14);
  CHECK(j["conditional"].size() == 16);
  for (const auto& row : j["conditional"]) {
    CHECK(row["p_a_wrong"].get<double>() <= 1.0);
    CHECK(row["p_b_right_given_a_wrong"].get<double>() <= 1.0);
  }
  for (const auto& [spec, m] : j["error_distribution"].items())
    CHECK(m["reliable"].get<double>() + m["unreliable"].get<double>() ==
          doctest::Approx(1.0));
  CHECK(j["temporal"].size() == 6);
}

TEST_CASE("temporal experiment") {
  ForestParams forest;
  forest.n_trees = 25;

  SUBCASE("stationary stream stays near the in-time accuracy") {
    auto corpus = synth::labeled_stream(4, 4, 60, 100, 41);
    auto builder = [&](const Corpus&, std::unordered_set<std::string>&) {
      FeatureBank bank;
      bank.add(synth::planted_article_signal("SIG", corpus, 1.2, 0.5, 42));
      return bank;
    };
    TemporalParams params;
    params.runs = 10;
    params.frac = 0.25;
    params.per_source_n = 100;
    params.forest = forest;
    params.seed = 5;
    auto reports = temporal_experiment(corpus, builder, {"SIG"}, params);
    REQUIRE(reports.size() == 1);
    const auto& r = reports[0];
    CHECK(r.slices.size() >= 5);
    for (const auto& s : r.slices)
      CHECK(std::abs(s.accuracy - r.in_time) <= 0.05);
  }

  SUBCASE("corpus ending at the training month has no forecast slices") {
    auto corpus = synth::labeled_stream(3, 3, 10, 29, 43);
    auto builder = [&](const Corpus&, std::unordered_set<std::string>&) {
      FeatureBank bank;
      bank.add(synth::planted_article_signal("SIG", corpus, 1.0, 0.3, 44));
      return bank;
    };
    TemporalParams params;
    params.runs = 5;
    params.frac = 0.34;
    params.per_source_n = 50;
    params.forest = forest;
    auto reports = temporal_experiment(corpus, builder, {"SIG"}, params);
    CHECK(reports[0].slices.empty());
    CHECK(reports[0].in_time > 0.0);
  }

  SUBCASE("builder exclusions are honored") {
    auto corpus = synth::labeled_stream(3, 3, 20, 60, 45);
    std::string excluded_id = corpus.articles.front().id;
    auto builder = [&](const Corpus&,
                       std::unordered_set<std::string>& exclusions) {
      exclusions.insert(excluded_id);
      FeatureBank bank;
      auto set = synth::planted_article_signal("SIG", corpus, 1.0, 0.3, 46);
      set.by_key.erase(excluded_id);  // would throw if the row survived
      bank.add(std::move(set));
      return bank;
    };
    TemporalParams params;
    params.runs = 3;
    params.frac = 0.34;
    params.per_source_n = 30;
    params.forest = forest;
    auto reports = temporal_experiment(corpus, builder, {"SIG"}, params);
    CHECK(reports[0].in_time >= 0.0);
  }
}
