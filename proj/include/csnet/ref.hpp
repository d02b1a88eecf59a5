#pragma once

// Serial reference implementations. They favor obviousness over speed and
// stay independent of the optimized kernels in csnet_core: tests compare
// the two paths, and the benchmark tool times them against each other.
// Linked only into tests and tools, never into the pipeline binary.

#include "csnet/csn.hpp"
#include "csnet/netfeat.hpp"

namespace csnet::ref {

// Quadratic all-pairs scan: every cross-source pair with publication times
// closer than window_days and cosine >= theta.
std::vector<SharedPair> find_shared_pairs_serial(const Corpus& c,
                                                 const TfIdfModel& model,
                                                 int window_days = 5,
                                                 double theta = 0.85);

// Closeness from Floyd-Warshall distances.
std::vector<double> closeness_serial(const CsnGraph& g);

// Betweenness by counting shortest paths per (s, t) pair and testing each
// intermediate vertex: sigma_st(v) = sigma_sv * sigma_vt when
// d(s,v) + d(v,t) = d(s,t).
std::vector<double> betweenness_serial(const CsnGraph& g);

}  // namespace csnet::ref
