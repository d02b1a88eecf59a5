#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csnet/csn.hpp"
#include "csnet/textrep.hpp"

namespace csnet {

struct WalkConfig {
  double p = 0.5;        // return parameter
  double q = 0.5;        // in-out parameter
  double t = 0.8;        // probability a walk runs in the text space
  int k = 10;            // text-space nearest neighbors
  double min_sim = 0.5;  // text transition similarity cutoff
  int num_walks = 1000;  // walks started per node
  int walk_length = 80;
  std::uint64_t seed = 0;
  bool directed = false;  // walk the directed graph instead of the
                          // undirected projection
  int workers = 0;

  void validate() const;
};

enum class WalkSpace { Network, Text };

struct Walk {
  std::vector<int> nodes;
  WalkSpace space = WalkSpace::Network;
};

// Weighted adjacency used by the network walks. Undirected projection
// sums the weights of both edge directions.
struct WalkGraph {
  std::vector<std::vector<std::pair<int, double>>> neighbors;  // sorted by id

  static WalkGraph from(const CsnGraph& g, bool directed);
  bool has_edge(int u, int v) const;
  std::size_t size() const { return neighbors.size(); }
};

// One biased second-order step: weights w(cur, x) * alpha(prev, x) with
// alpha = 1/p when x == prev, 1 when x neighbors prev, 1/q otherwise.
// prev < 0 samples plain weighted (first step). Returns -1 at dead ends.
// scratch is reused across steps to keep the hot loop allocation-free.
int node2vec_step(const WalkGraph& g, int prev, int cur, double p, double q,
                  Rng& rng, std::vector<double>& scratch);
int node2vec_step(const WalkGraph& g, int prev, int cur, double p, double q,
                  Rng& rng);

// Exact transition distribution of node2vec_step (enumeration; used by
// tests and the tuning of empirical checks).
std::vector<double> node2vec_kernel(const WalkGraph& g, int prev, int cur,
                                    double p, double q);

// cfg.num_walks walks from every node, truncated at dead ends. Walk (node,
// index) pairs own derived RNG streams, so results are identical for any
// worker count.
std::vector<Walk> node2vec_walks(const CsnGraph& g, const WalkConfig& cfg);

// Per-source text-space transitions: the k most text-similar sources with
// cosine >= min_sim, similarities normalized to probabilities.
struct TextTransitionGraph {
  std::vector<std::string> node_ids;
  std::unordered_map<std::string, int> node_index;
  std::vector<std::vector<std::pair<int, double>>> transitions;
};

TextTransitionGraph build_text_transitions(
    const std::map<std::string, DenseVector>& reprs, int k,
    double min_sim = 0.5);

// Interleaved walks: each walk runs entirely in one space, chosen with
// probability t for text. Network walks share the node2vec step streams,
// so t = 0 reproduces node2vec_walks exactly.
std::vector<Walk> nt2v_walks(const CsnGraph& g,
                             const TextTransitionGraph& tg,
                             const WalkConfig& cfg);

void write_walks(const std::vector<Walk>& walks,
                 const std::vector<std::string>& ids,
                 const std::string& path);

}  // namespace csnet
