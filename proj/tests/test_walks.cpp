#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <map>

#include "csnet/walks.hpp"
#include "doctest.h"
#include "synth.hpp"

using namespace csnet;

namespace {

// undirected edge list as a digraph both ways
CsnGraph undirected_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::tuple<int, int, int>> both;
  for (auto [a, b] : edges) {
    both.push_back({a, b, 1});
    both.push_back({b, a, 1});
  }
  return synth::graph_from_edges(n, both);
}

// empirical second-step frequencies from (prev, cur), using the production
// sampler
std::vector<double> empirical_kernel(const WalkGraph& wg, int prev, int cur,
                                     double p, double q, int samples,
                                     std::uint64_t seed) {
  std::vector<double> freq(wg.size(), 0.0);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    int next = node2vec_step(wg, prev, cur, p, q, rng);
    if (next >= 0) freq[next] += 1.0;
  }
  for (auto& f : freq) f /= samples;
  return freq;
}

}  // namespace

TEST_CASE("isolated node walks have length 1") {
  auto g = synth::graph_from_edges(2, {});
  WalkConfig cfg;
  cfg.num_walks = 10;
  cfg.walk_length = 20;
  cfg.seed = 1;
  auto walks = node2vec_walks(g, cfg);
  REQUIRE(walks.size() == 20);
  for (const auto& w : walks) CHECK(w.nodes.size() == 1);
}

TEST_CASE("triangle with p=q=1: uniform over the two continuations") {
  auto g = undirected_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto wg = WalkGraph::from(g, false);
  auto freq = empirical_kernel(wg, 0, 1, 1.0, 1.0, 100000, 7);
  CHECK(freq[0] == doctest::Approx(0.5).epsilon(0.06));
  CHECK(freq[2] == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("line a-b-c second-step kernel matches the alpha normalization") {
  auto g = undirected_graph(3, {{0, 1}, {1, 2}});
  auto wg = WalkGraph::from(g, false);

  SUBCASE("exact kernel, p=0.5 q=0.5: returning and advancing tie at 1/2") {
    // weights: back to a = 1/p = 2, on to c (distance 2 from a) = 1/q = 2
    auto kernel = node2vec_kernel(wg, 0, 1, 0.5, 0.5);
    CHECK(kernel[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(kernel[2] == doctest::Approx(0.5).epsilon(1e-12));
    auto freq = empirical_kernel(wg, 0, 1, 0.5, 0.5, 100000, 11);
    CHECK(freq[0] == doctest::Approx(kernel[0]).epsilon(0.05));
    CHECK(freq[2] == doctest::Approx(kernel[2]).epsilon(0.05));
  }

  SUBCASE("p=0.5 q=1.0 biases back: (2/3, 1/3)") {
    auto kernel = node2vec_kernel(wg, 0, 1, 0.5, 1.0);
    CHECK(kernel[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(kernel[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    auto freq = empirical_kernel(wg, 0, 1, 0.5, 1.0, 100000, 13);
    CHECK(freq[0] == doctest::Approx(2.0 / 3.0).epsilon(0.04));
    CHECK(freq[2] == doctest::Approx(1.0 / 3.0).epsilon(0.07));
  }
}

TEST_CASE("kernel distributions sum to 1 and respect edge weights") {
  auto g = synth::graph_from_edges(
      5, {{0, 1, 3}, {1, 0, 1}, {1, 2, 2}, {2, 3, 1}, {3, 1, 2}, {4, 0, 1}});
  auto wg = WalkGraph::from(g, false);
  for (std::size_t cur = 0; cur < wg.size(); ++cur) {
    if (wg.neighbors[cur].empty()) continue;
    for (std::size_t prev = 0; prev < wg.size(); ++prev) {
      if (!wg.has_edge(static_cast<int>(prev), static_cast<int>(cur))) continue;
      auto kernel = node2vec_kernel(wg, static_cast<int>(prev),
                                    static_cast<int>(cur), 0.7, 0.3);
      double total = 0;
      for (double v : kernel) total += v;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("walks are bit-reproducible and worker-count independent") {
  auto g = undirected_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  WalkConfig cfg;
  cfg.num_walks = 25;
  cfg.walk_length = 15;
  cfg.seed = 321;

  cfg.workers = 1;
  auto w1 = node2vec_walks(g, cfg);
  auto w2 = node2vec_walks(g, cfg);
  cfg.workers = 4;
  auto w3 = node2vec_walks(g, cfg);
  REQUIRE(w1.size() == w2.size());
  REQUIRE(w1.size() == w3.size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    CHECK(w1[i].nodes == w2[i].nodes);
    CHECK(w1[i].nodes == w3[i].nodes);
  }
}

TEST_CASE("every node starts its configured number of walks") {
  auto g = undirected_graph(4, {{0, 1}, {2, 3}});
  WalkConfig cfg;
  cfg.num_walks = 7;
  cfg.walk_length = 5;
  cfg.seed = 2;
  auto walks = node2vec_walks(g, cfg);
  REQUIRE(walks.size() == 4 * 7);
  std::map<int, int> starts;
  for (const auto& w : walks) ++starts[w.nodes.front()];
  for (int u = 0; u < 4; ++u) CHECK(starts[u] == 7);
}

TEST_CASE("text transitions") {
  SUBCASE("all pairwise cosines below the cutoff isolate every source") {
    std::map<std::string, DenseVector> reprs = {
        {"a", {1, 0, 0}}, {"b", {0, 1, 0}}, {"c", {0, 0, 1}}};
    auto tg = build_text_transitions(reprs, 2, 0.5);
    for (const auto& t : tg.transitions) CHECK(t.empty());
  }

  SUBCASE("three identical representations, k=2: uniform halves") {
    std::map<std::string, DenseVector> reprs = {
        {"a", {1, 1}}, {"b", {1, 1}}, {"c", {1, 1}}};
    auto tg = build_text_transitions(reprs, 2, 0.5);
    for (const auto& t : tg.transitions) {
      REQUIRE(t.size() == 2);
      CHECK(t[0].second == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(t[1].second == doctest::Approx(0.5).epsilon(1e-12));
    }
  }

  SUBCASE("four-source fixture matches hand-normalized cosines") {
    // cos(a,b)=1, cos(a,c)=cos(2 deg apart)... pick exact vectors:
    // a=(1,0), b=(1,0) -> cos 1; c=(1,1)/ -> cos(a,c)=1/sqrt(2);
    // d=(0,1) -> cos(a,d)=0 (dropped by cutoff)
    std::map<std::string, DenseVector> reprs = {{"a", {1, 0}},
                                                {"b", {1, 0}},
                                                {"c", {1, 1}},
                                                {"d", {0, 1}}};
    auto tg = build_text_transitions(reprs, 3, 0.5);
    int a = tg.node_index.at("a");
    const auto& ta = tg.transitions[a];
    REQUIRE(ta.size() == 2);  // b and c survive, d is below the cutoff
    double cb = 1.0, cc = 1.0 / std::sqrt(2.0);
    double total = cb + cc;
    std::map<int, double> probs(ta.begin(), ta.end());
    CHECK(probs.at(tg.node_index.at("b")) ==
          doctest::Approx(cb / total).epsilon(1e-9));
    CHECK(probs.at(tg.node_index.at("c")) ==
          doctest::Approx(cc / total).epsilon(1e-9));
  }

  SUBCASE("probabilities sum to one when non-empty") {
    Rng rng(5);
    std::map<std::string, DenseVector> reprs;
    for (int i = 0; i < 12; ++i) {
      DenseVector v(6);
      for (auto& x : v) x = rng.next_double();
      reprs["s" + std::to_string(i)] = v;
    }
    auto tg = build_text_transitions(reprs, 4, 0.5);
    for (const auto& t : tg.transitions) {
      if (t.empty()) continue;
      double total = 0;
      for (const auto& [j, prob] : t) total += prob;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("no self transitions") {
    std::map<std::string, DenseVector> reprs = {
        {"a", {1, 0}}, {"b", {1, 0.01}}, {"c", {1, 0.02}}};
    auto tg = build_text_transitions(reprs, 3, 0.5);
    for (std::size_t i = 0; i < tg.transitions.size(); ++i)
      for (const auto& [j, prob] : tg.transitions[i])
        CHECK(j != static_cast<int>(i));
  }
}

TEST_CASE("interleaved walks: degeneracies and mixing fraction") {
  auto g = undirected_graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}});
  Rng rng(8);
  std::map<std::string, DenseVector> reprs;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    DenseVector v(4);
    for (auto& x : v) x = 0.5 + rng.next_double();  // all similar, cos > 0.5
    reprs[g.node_ids[i]] = v;
  }
  auto tg = build_text_transitions(reprs, 3, 0.5);

  WalkConfig cfg;
  cfg.num_walks = 50;
  cfg.walk_length = 10;
  cfg.seed = 99;

  SUBCASE("t=0 reproduces node2vec walks exactly") {
    cfg.t = 0.0;
    auto nv = node2vec_walks(g, cfg);
    auto mixed = nt2v_walks(g, tg, cfg);
    REQUIRE(nv.size() == mixed.size());
    for (std::size_t i = 0; i < nv.size(); ++i) {
      CHECK(mixed[i].space == WalkSpace::Network);
      CHECK(mixed[i].nodes == nv[i].nodes);
    }
  }

  SUBCASE("t=1 walks entirely in the text space") {
    cfg.t = 1.0;
    auto walks = nt2v_walks(g, tg, cfg);
    for (const auto& w : walks) CHECK(w.space == WalkSpace::Text);
  }

  SUBCASE("t=0.8 yields about 80% text walks") {
    cfg.t = 0.8;
    cfg.num_walks = 2000;  // 6 nodes -> 12000 walks
    auto walks = nt2v_walks(g, tg, cfg);
    double text = 0;
    for (const auto& w : walks)
      if (w.space == WalkSpace::Text) text += 1;
    CHECK(text / static_cast<double>(walks.size()) ==
          doctest::Approx(0.8).epsilon(0.0125));
  }

  SUBCASE("text walks follow text transitions only") {
    cfg.t = 1.0;
    auto walks = nt2v_walks(g, tg, cfg);
    for (const auto& w : walks) {
      for (std::size_t s = 1; s < w.nodes.size(); ++s) {
        int prev_text = tg.node_index.at(g.node_ids[w.nodes[s - 1]]);
        bool found = false;
        for (const auto& [j, prob] : tg.transitions[prev_text])
          if (tg.node_ids[j] == g.node_ids[w.nodes[s]]) found = true;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("directed mode walks only along edge direction") {
  // chain s0 -> s1 -> s2; directed walks can never step backwards
  auto g = synth::graph_from_edges(3, {{0, 1, 1}, {1, 2, 1}});
  WalkConfig cfg;
  cfg.num_walks = 20;
  cfg.walk_length = 6;
  cfg.seed = 12;
  cfg.directed = true;
  auto walks = node2vec_walks(g, cfg);
  auto wg = WalkGraph::from(g, true);
  for (const auto& w : walks) {
    for (std::size_t s = 1; s < w.nodes.size(); ++s)
      CHECK(wg.has_edge(w.nodes[s - 1], w.nodes[s]));
    // sink node s2 dead-ends immediately
    if (w.nodes.front() == g.index_of("s2")) CHECK(w.nodes.size() == 1);
  }
  // the undirected projection has no dead ends on this chain
  cfg.directed = false;
  for (const auto& w : node2vec_walks(g, cfg))
    CHECK(w.nodes.size() == static_cast<std::size_t>(cfg.walk_length));
}

TEST_CASE("walk dump writes one id line per walk") {
  auto g = undirected_graph(3, {{0, 1}, {1, 2}});
  WalkConfig cfg;
  cfg.num_walks = 4;
  cfg.walk_length = 3;
  cfg.seed = 1;
  auto walks = node2vec_walks(g, cfg);
  auto path =
      (std::filesystem::temp_directory_path() / "csnet_walks.txt").string();
  write_walks(walks, g.node_ids, path);
  auto text = read_file(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 12);  // 3 nodes x 4
  CHECK(text.rfind("net ", 0) == 0);
}

TEST_CASE("walk config validation") {
  WalkConfig cfg;
  cfg.p = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.t = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.num_walks = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
