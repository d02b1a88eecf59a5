// Timings of the parallel kernels against their serial references on
// synthetic inputs. Sizes are chosen so a full run stays under a minute.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "csnet/csn.hpp"
#include "csnet/embed.hpp"
#include "csnet/forest.hpp"
#include "csnet/ref.hpp"

using namespace csnet;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <class F>
double timed(F&& fn) {
  double t0 = now_seconds();
  fn();
  return now_seconds() - t0;
}

std::string random_text(Rng& rng, int words, int vocab) {
  std::string text;
  for (int i = 0; i < words; ++i) {
    if (i) text += ' ';
    text += "word" + std::to_string(rng.next_below(vocab));
  }
  return text;
}

Corpus synth_corpus(int n_articles, int n_sources, double copy_rate,
                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Article> articles;
  articles.reserve(n_articles);
  for (int i = 0; i < n_articles; ++i) {
    Article a;
    a.id = "a" + std::to_string(i);
    a.source_id = "s" + std::to_string(rng.next_below(n_sources));
    a.published_at = 1000000 + static_cast<std::int64_t>(
                                   rng.next_below(90ull * 86400));
    if (!articles.empty() && rng.next_double() < copy_rate) {
      const auto& origin = articles[rng.next_below(articles.size())];
      a.title = origin.title;
      a.body = origin.body;
    } else {
      a.title = random_text(rng, 8, 5000);
      a.body = random_text(rng, 120, 5000);
    }
    articles.push_back(std::move(a));
  }
  return make_corpus(std::move(articles), {});
}

CsnGraph synth_graph(int n, double edge_prob, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Article> articles;
  for (int i = 0; i < n; ++i) {
    Article a;
    a.id = "a" + std::to_string(i);
    a.source_id = "s" + std::to_string(i);
    a.published_at = i;
    articles.push_back(a);
  }
  Corpus c = make_corpus(std::move(articles), {});
  std::vector<SharedPair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || rng.next_double() >= edge_prob) continue;
      SharedPair p;
      p.origin_article = "a" + std::to_string(i);
      p.copier_article = "a" + std::to_string(j);
      p.origin_source = "s" + std::to_string(i);
      p.copier_source = "s" + std::to_string(j);
      p.similarity = 1.0;
      pairs.push_back(p);
    }
  }
  return build_csn(pairs, c);
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3fs %10.3fs %9.2fx\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  const int threads = omp_get_max_threads();
  std::printf("threads: %d, scale: %d\n", threads, scale);
  std::printf("%-28s %11s %11s %10s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    Corpus corpus = synth_corpus(1200 * scale, 40, 0.15, 7);
    auto model = fit_tfidf(corpus);
    std::vector<SharedPair> serial_pairs, parallel_pairs;
    double ts = timed([&] {
      serial_pairs = ref::find_shared_pairs_serial(corpus, model, 5, 0.85);
    });
    double tp = timed([&] {
      parallel_pairs = find_shared_pairs(corpus, model, 5, 0.85, threads);
    });
    row("pair scan (indexed vs n^2)", ts, tp);
    if (serial_pairs.size() != parallel_pairs.size())
      std::printf("  !! pair count mismatch: %zu vs %zu\n",
                  serial_pairs.size(), parallel_pairs.size());
  }

  {
    CsnGraph g = synth_graph(250 * scale, 0.05, 11);
    std::vector<double> serial_b, parallel_b;
    double ts = timed([&] { serial_b = betweenness_centrality(g, 1); });
    double tp = timed([&] { parallel_b = betweenness_centrality(g, threads); });
    row("betweenness (brandes)", ts, tp);
  }

  {
    CsnGraph g = synth_graph(120 * scale, 0.08, 13);
    WalkConfig cfg;
    cfg.num_walks = 200;
    cfg.walk_length = 80;
    cfg.seed = 3;
    std::vector<Walk> w1, w2;
    double ts = timed([&] {
      WalkConfig c = cfg;
      c.workers = 1;
      w1 = node2vec_walks(g, c);
    });
    double tp = timed([&] {
      WalkConfig c = cfg;
      c.workers = threads;
      w2 = node2vec_walks(g, c);
    });
    row("node2vec walks", ts, tp);
    for (std::size_t i = 0; i < w1.size(); ++i)
      if (w1[i].nodes != w2[i].nodes) {
        std::printf("  !! walk %zu differs across worker counts\n", i);
        break;
      }

  }

  {
    // lock-free updates only pay off when the vocabulary is large enough
    // that concurrent rows rarely collide
    CsnGraph g = synth_graph(1500 * scale, 0.004, 19);
    WalkConfig wcfg;
    wcfg.num_walks = 6;
    wcfg.walk_length = 40;
    wcfg.seed = 23;
    wcfg.workers = threads;
    auto walks = node2vec_walks(g, wcfg);
    SkipgramConfig scfg;
    scfg.dim = 40;
    scfg.epochs = 1;
    double ss = timed([&] {
      SkipgramConfig c = scfg;
      c.workers = 1;
      train_skipgram(walks, g.node_count(), c);
    });
    double sp = timed([&] {
      SkipgramConfig c = scfg;
      c.workers = threads;
      train_skipgram(walks, g.node_count(), c);
    });
    row("skipgram (lock-free)", ss, sp);
  }

  {
    Rng rng(17);
    Dataset d;
    d.width = 60;
    const int rows = 4000 * scale;
    for (int i = 0; i < rows; ++i) {
      std::vector<double> r(d.width);
      int label = static_cast<int>(rng.next_below(2));
      for (auto& v : r) v = rng.next_double() + 0.15 * label;
      d.rows.push_back(std::move(r));
      d.labels.push_back(label);
      d.row_meta.emplace_back("a" + std::to_string(i), "s");
    }
    ForestParams params;
    params.n_trees = 60;
    double ts = timed([&] { train_forest(d, params, 5, 1); });
    double tp = timed([&] { train_forest(d, params, 5, threads); });
    row("random forest", ts, tp);
  }

  return 0;
}
