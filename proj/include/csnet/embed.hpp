#pragma once

#include <functional>

#include "csnet/skipgram.hpp"

namespace csnet {

enum class EmbedMode { N2V, NT2V };

// End-to-end: walks then skipgram. Every graph node is present in the
// result; nodes that never entered a walk context keep their random
// initialization and are flagged untrained. walks_out, when given,
// receives the generated walks (offline inspection).
Embedding embed_sources(const CsnGraph& g,
                        const std::map<std::string, DenseVector>& reprs,
                        const WalkConfig& cfg, const SkipgramConfig& scfg,
                        EmbedMode mode, std::vector<Walk>* walks_out = nullptr);

// Walk-parameter grid: p, q, t over [lo, hi] with the given step. The
// score callback typically runs a validation classification; the best
// cell (ties: first in grid order) is returned alongside the full table.
struct GridPoint {
  double p = 0, q = 0, t = 0;
  double score = 0;
};

struct GridSearchResult {
  std::vector<GridPoint> table;
  GridPoint best;
};

GridSearchResult grid_search_pqt(
    const std::function<double(double p, double q, double t)>& score,
    double lo = 0.2, double hi = 0.8, double step = 0.1,
    bool include_t = true);

}  // namespace csnet
