#include <cmath>

#include "csnet/embed.hpp"

namespace csnet {

Embedding embed_sources(const CsnGraph& g,
                        const std::map<std::string, DenseVector>& reprs,
                        const WalkConfig& cfg, const SkipgramConfig& scfg,
                        EmbedMode mode, std::vector<Walk>* walks_out) {
  std::vector<Walk> walks;
  if (mode == EmbedMode::NT2V) {
    if (reprs.empty())
      throw Error("embed_sources: nt2v mode needs source text representations");
    auto tg = build_text_transitions(reprs, cfg.k, cfg.min_sim);
    walks = nt2v_walks(g, tg, cfg);
  } else {
    walks = node2vec_walks(g, cfg);
  }
  Embedding emb = train_skipgram(walks, g.node_count(), scfg);
  emb.ids = g.node_ids;
  emb.mode = mode == EmbedMode::NT2V ? "nt2v" : "n2v";
  emb.num_walks = cfg.num_walks;
  emb.walk_length = cfg.walk_length;
  if (walks_out) *walks_out = std::move(walks);
  return emb;
}

GridSearchResult grid_search_pqt(
    const std::function<double(double, double, double)>& score, double lo,
    double hi, double step, bool include_t) {
  if (step <= 0 || lo > hi) throw Error("grid_search_pqt: bad grid bounds");
  std::vector<double> values;
  for (double v = lo; v <= hi + 1e-9; v += step)
    values.push_back(std::round(v * 1e9) / 1e9);

  GridSearchResult result;
  bool first = true;
  for (double p : values) {
    for (double q : values) {
      for (double t : include_t ? values : std::vector<double>{0.0}) {
        GridPoint pt{p, q, t, score(p, q, t)};
        result.table.push_back(pt);
        if (first || pt.score > result.best.score) {
          result.best = pt;
          first = false;
        }
      }
    }
  }
  return result;
}

}  // namespace csnet
