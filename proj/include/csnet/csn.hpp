#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "csnet/corpus.hpp"
#include "csnet/textrep.hpp"

namespace csnet {

// A near-verbatim cross-source copy, oriented earlier -> later.
struct SharedPair {
  std::string origin_article;
  std::string copier_article;
  std::string origin_source;
  std::string copier_source;
  double similarity = 0.0;
  std::int64_t lag_seconds = 0;
  bool ambiguous_direction = false;  // equal timestamps, orientation by id
};

// All cross-source article pairs whose publication times differ by
// strictly less than window_days and whose tf-idf cosine >= theta.
// Candidate pruning uses a term-postings index restricted to the time
// window; scores are full cosines, so the result is identical to the
// quadratic scan (see find_shared_pairs_serial in the reference lib).
// Parallel over articles; output order is canonical (origin, copier).
std::vector<SharedPair> find_shared_pairs(const Corpus& c,
                                          const TfIdfModel& model,
                                          int window_days = 5,
                                          double theta = 0.85,
                                          int workers = 0);

// Union of origin and copier ids over all pairs.
std::unordered_set<std::string> csn_exclusion_set(
    const std::vector<SharedPair>& pairs);

// Directed source graph; edges point at the copier.
struct CsnEdge {
  int from = 0;  // origin source
  int to = 0;    // copier source
  long raw_count = 0;
  double weight = 0.0;  // raw_count / copier publication total
};

struct CsnGraph {
  std::vector<std::string> node_ids;  // sorted source ids, labeled or not
  std::unordered_map<std::string, int> node_index;
  std::vector<SourceLabel> node_labels;
  std::vector<long> published_total;
  std::vector<CsnEdge> edges;              // sorted by (from, to)
  std::vector<std::vector<int>> out_edges;  // edge indices per node
  std::vector<std::vector<int>> in_edges;

  int index_of(const std::string& id) const;
  std::size_t node_count() const { return node_ids.size(); }
  void rebuild_adjacency();
};

// Raw edge count(A -> B) = pairs with origin A and copier B; weight is
// normalized by B's publication total. Every corpus source becomes a node.
CsnGraph build_csn(const std::vector<SharedPair>& pairs, const Corpus& c);

// ---- artifact I/O --------------------------------------------------------

void write_pairs(const std::vector<SharedPair>& pairs,
                 const std::string& path);
std::vector<SharedPair> load_pairs(const std::string& path);

// Edge list "origin\tcopier\traw_count\tweight" plus a node file with
// publication totals and labels.
void write_csn(const CsnGraph& g, const std::string& edges_path,
               const std::string& nodes_path);
CsnGraph load_csn(const std::string& edges_path,
                  const std::string& nodes_path);

// GEXF export for external visualization tools.
void write_gexf(const CsnGraph& g, const std::string& path);

}  // namespace csnet
