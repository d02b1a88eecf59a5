#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csnet/walks.hpp"

namespace csnet {

void WalkConfig::validate() const {
  if (p <= 0 || q <= 0) throw Error("walk config: p and q must be > 0");
  if (t < 0 || t > 1) throw Error("walk config: t must be in [0, 1]");
  if (k < 1) throw Error("walk config: k must be >= 1");
  if (num_walks < 1 || walk_length < 1)
    throw Error("walk config: num_walks and walk_length must be >= 1");
}

WalkGraph WalkGraph::from(const CsnGraph& g, bool directed) {
  WalkGraph wg;
  wg.neighbors.assign(g.node_count(), {});
  if (directed) {
    for (const auto& e : g.edges)
      wg.neighbors[e.from].emplace_back(e.to, e.weight);
  } else {
    std::map<std::pair<int, int>, double> sym;
    for (const auto& e : g.edges) {
      sym[{e.from, e.to}] += e.weight;
      sym[{e.to, e.from}] += e.weight;
    }
    for (const auto& [key, w] : sym)
      wg.neighbors[key.first].emplace_back(key.second, w);
  }
  for (auto& nb : wg.neighbors) std::sort(nb.begin(), nb.end());
  return wg;
}

bool WalkGraph::has_edge(int u, int v) const {
  const auto& nb = neighbors[u];
  auto it = std::lower_bound(
      nb.begin(), nb.end(), v,
      [](const std::pair<int, double>& e, int x) { return e.first < x; });
  return it != nb.end() && it->first == v;
}

namespace {

int sample_weighted(const std::vector<double>& weights, double total,
                    Rng& rng) {
  double r = rng.next_double() * total;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

int node2vec_step(const WalkGraph& g, int prev, int cur, double p, double q,
                  Rng& rng, std::vector<double>& scratch) {
  const auto& nb = g.neighbors[cur];
  if (nb.empty()) return -1;
  scratch.resize(nb.size());
  double total = 0;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    auto [x, w] = nb[i];
    double alpha = 1.0;
    if (prev >= 0) {
      if (x == prev)
        alpha = 1.0 / p;
      else if (!g.has_edge(prev, x))
        alpha = 1.0 / q;
    }
    scratch[i] = w * alpha;
    total += scratch[i];
  }
  if (total <= 0) return -1;
  return nb[sample_weighted(scratch, total, rng)].first;
}

int node2vec_step(const WalkGraph& g, int prev, int cur, double p, double q,
                  Rng& rng) {
  std::vector<double> scratch;
  return node2vec_step(g, prev, cur, p, q, rng, scratch);
}

std::vector<double> node2vec_kernel(const WalkGraph& g, int prev, int cur,
                                    double p, double q) {
  std::vector<double> probs(g.size(), 0.0);
  double total = 0;
  for (auto [x, w] : g.neighbors[cur]) {
    double alpha = 1.0;
    if (prev >= 0) {
      if (x == prev)
        alpha = 1.0 / p;
      else if (!g.has_edge(prev, x))
        alpha = 1.0 / q;
    }
    probs[x] = w * alpha;
    total += probs[x];
  }
  if (total > 0)
    for (auto& v : probs) v /= total;
  return probs;
}

namespace {

Walk network_walk(const WalkGraph& wg, int start, const WalkConfig& cfg,
                  std::uint64_t walk_idx, std::vector<double>& scratch) {
  Rng rng(derive_seed(cfg.seed, "network-step", static_cast<std::uint64_t>(start),
                      walk_idx));
  Walk walk;
  walk.space = WalkSpace::Network;
  walk.nodes.reserve(cfg.walk_length);
  walk.nodes.push_back(start);
  int prev = -1;
  while (static_cast<int>(walk.nodes.size()) < cfg.walk_length) {
    int cur = walk.nodes.back();
    int next = node2vec_step(wg, prev, cur, cfg.p, cfg.q, rng, scratch);
    if (next < 0) break;
    walk.nodes.push_back(next);
    prev = cur;
  }
  return walk;
}

Walk text_walk(const TextTransitionGraph& tg, const std::vector<int>& to_text,
               int start, const WalkConfig& cfg, std::uint64_t walk_idx) {
  Rng rng(derive_seed(cfg.seed, "text-step", static_cast<std::uint64_t>(start),
                      walk_idx));
  Walk walk;
  walk.space = WalkSpace::Text;
  walk.nodes.reserve(cfg.walk_length);
  walk.nodes.push_back(start);
  while (static_cast<int>(walk.nodes.size()) < cfg.walk_length) {
    int cur_text = to_text[walk.nodes.back()];
    if (cur_text < 0) break;
    const auto& trans = tg.transitions[cur_text];
    if (trans.empty()) break;
    double r = rng.next_double();
    double acc = 0;
    int chosen = trans.back().first;
    for (const auto& [nbr, prob] : trans) {
      acc += prob;
      if (r < acc) {
        chosen = nbr;
        break;
      }
    }
    walk.nodes.push_back(chosen);
  }
  return walk;
}

}  // namespace

std::vector<Walk> node2vec_walks(const CsnGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.node_count() == 0) throw Error("node2vec_walks: empty graph");
  auto wg = WalkGraph::from(g, cfg.directed);
  const std::int64_t n = static_cast<std::int64_t>(g.node_count());
  const std::int64_t total = n * cfg.num_walks;
  std::vector<Walk> walks(total);
  int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < total; ++i) {
      int node = static_cast<int>(i / cfg.num_walks);
      std::uint64_t w = static_cast<std::uint64_t>(i % cfg.num_walks);
      walks[i] = network_walk(wg, node, cfg, w, scratch);
    }
  }
  return walks;
}

TextTransitionGraph build_text_transitions(
    const std::map<std::string, DenseVector>& reprs, int k, double min_sim) {
  if (k < 1) throw Error("build_text_transitions: k must be >= 1");
  TextTransitionGraph tg;
  tg.node_ids.reserve(reprs.size());
  for (const auto& [id, vec] : reprs) {
    tg.node_index.emplace(id, static_cast<int>(tg.node_ids.size()));
    tg.node_ids.push_back(id);
  }
  const int n = static_cast<int>(tg.node_ids.size());
  std::vector<const DenseVector*> vecs(n);
  for (int i = 0; i < n; ++i) vecs[i] = &reprs.at(tg.node_ids[i]);

  tg.transitions.assign(n, {});
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> sims;  // (-cos, j) for stable sort
    sims.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double cs = cosine_similarity(*vecs[i], *vecs[j]);
      if (cs >= min_sim) sims.emplace_back(-cs, j);
    }
    std::sort(sims.begin(), sims.end());
    if (static_cast<int>(sims.size()) > k) sims.resize(k);
    double total = 0;
    for (const auto& [neg, j] : sims) total += -neg;
    if (total <= 0) continue;
    auto& out = tg.transitions[i];
    out.reserve(sims.size());
    for (const auto& [neg, j] : sims) out.emplace_back(j, -neg / total);
    std::sort(out.begin(), out.end());  // deterministic traversal order
  }
  return tg;
}

std::vector<Walk> nt2v_walks(const CsnGraph& g, const TextTransitionGraph& tg,
                             const WalkConfig& cfg) {
  cfg.validate();
  if (g.node_count() == 0) throw Error("nt2v_walks: empty graph");
  auto wg = WalkGraph::from(g, cfg.directed);

  // graph node -> text node (sources without a text representation walk
  // only the network)
  std::vector<int> to_text(g.node_count(), -1);
  std::vector<int> to_graph(tg.node_ids.size(), -1);
  for (std::size_t i = 0; i < tg.node_ids.size(); ++i) {
    auto it = g.node_index.find(tg.node_ids[i]);
    if (it != g.node_index.end()) {
      to_text[it->second] = static_cast<int>(i);
      to_graph[i] = it->second;
    }
  }
  // remap text transitions onto graph indices once
  TextTransitionGraph mapped = tg;
  for (auto& trans : mapped.transitions) {
    std::vector<std::pair<int, double>> kept;
    double total = 0;
    for (auto& [j, prob] : trans) {
      if (to_graph[j] >= 0) {
        kept.emplace_back(to_graph[j], prob);
        total += prob;
      }
    }
    if (total > 0)
      for (auto& [j, prob] : kept) prob /= total;
    trans = std::move(kept);
  }

  const std::int64_t n = static_cast<std::int64_t>(g.node_count());
  const std::int64_t total = n * cfg.num_walks;
  std::vector<Walk> walks(total);
  int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < total; ++i) {
      int node = static_cast<int>(i / cfg.num_walks);
      std::uint64_t w = static_cast<std::uint64_t>(i % cfg.num_walks);
      // independent stream for the space choice keeps network walks
      // bit-identical to node2vec_walks at t = 0
      Rng coin(derive_seed(cfg.seed, "walk-space",
                           static_cast<std::uint64_t>(node), w));
      if (coin.next_double() < cfg.t)
        walks[i] = text_walk(mapped, to_text, node, cfg, w);
      else
        walks[i] = network_walk(wg, node, cfg, w, scratch);
    }
  }
  return walks;
}

void write_walks(const std::vector<Walk>& walks,
                 const std::vector<std::string>& ids,
                 const std::string& path) {
  std::ostringstream out;
  for (const auto& w : walks) {
    out << (w.space == WalkSpace::Network ? "net" : "text");
    for (int u : w.nodes) out << ' ' << ids[u];
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace csnet
