#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csnet/csn.hpp"

namespace csnet {

struct CommunityAssignment {
  std::vector<int> community;  // node index -> community id, dense from 0
  double modularity = 0.0;

  int community_count() const;
};

enum class CommunityMethod { Spectral, Agglomerative };

// Directed modularity of a partition: (1/W) * sum over same-community
// (i, j) of [A_ij - kout_i * kin_j / W], on normalized edge weights.
double directed_modularity(const CsnGraph& g, const std::vector<int>& community);

// Spectral bisection of the symmetrized directed-modularity matrix with
// Kernighan-Lin refinement, recursing while a split still gains
// modularity. Isolated nodes become singleton communities. Agglomerative
// greedy merging is available as a fallback method.
CommunityAssignment detect_communities(
    const CsnGraph& g, std::uint64_t seed = 0,
    CommunityMethod method = CommunityMethod::Spectral);

// ---- centralities (unweighted directed shortest paths) --------------------

// Reachable-subset closeness: ((r-1)/(n-1)) * ((r-1)/sum of distances),
// where r counts nodes reachable from the node; 0 for isolated nodes.
std::vector<double> closeness_centrality(const CsnGraph& g);

// Brandes accumulation, parallel over sources with a deterministic
// reduction (per-source contributions summed in index order).
std::vector<double> betweenness_centrality(const CsnGraph& g, int workers = 0);

struct EigenvectorResult {
  std::vector<double> values;
  bool fell_back_undirected = false;
};

// Power iteration on in-edge weights; falls back to the undirected
// projection when the directed iteration does not converge.
EigenvectorResult eigenvector_centrality(const CsnGraph& g,
                                         int max_iter = 1000,
                                         double tol = 1e-10);

// Undirected core numbers (distinct-neighbor degrees) per node.
std::vector<int> core_numbers_undirected(const std::vector<std::vector<int>>& adj);

// ---- the 11 per-source network features ------------------------------------

struct HcnfVector {
  double community_id = 0;
  double weighted_out_degree = 0;  // sum of normalized out-edge weights
  double weighted_in_degree = 0;
  double closeness = 0;
  double betweenness = 0;
  double eigenvector = 0;
  double community_core = 0;  // in the max-k core of its community subgraph
  double inside_source_edges = 0;  // raw copy counts by boundary x direction
  double inside_sink_edges = 0;
  double importing_edges = 0;
  double exporting_edges = 0;

  std::vector<double> values() const;
  static const std::vector<std::string>& names();
};

struct HcnfTable {
  std::map<std::string, HcnfVector> by_source;
  bool eigenvector_fallback = false;
};

HcnfTable compute_hcnf(const CsnGraph& g, const CommunityAssignment& cm,
                       int workers = 0);

void write_hcnf_csv(const HcnfTable& t, const std::string& path);
void write_communities_csv(const CsnGraph& g, const CommunityAssignment& cm,
                           const std::string& path);

}  // namespace csnet
