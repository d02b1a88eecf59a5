#include <algorithm>

#include "csnet/ref.hpp"

namespace csnet::ref {

std::vector<SharedPair> find_shared_pairs_serial(const Corpus& c,
                                                 const TfIdfModel& model,
                                                 int window_days,
                                                 double theta) {
  const auto& arts = c.articles;
  const std::size_t n = arts.size();
  const std::int64_t window_seconds =
      static_cast<std::int64_t>(window_days) * 86400;

  std::vector<SparseVector> vecs(n);
  for (std::size_t i = 0; i < n; ++i) vecs[i] = tfidf_vector(model, arts[i]);

  std::vector<SharedPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (arts[i].source_id == arts[j].source_id) continue;
      std::int64_t dt = arts[j].published_at - arts[i].published_at;
      if (dt < 0) dt = -dt;
      if (dt >= window_seconds) continue;
      double sim = cosine_similarity(vecs[i], vecs[j]);
      if (sim < theta) continue;
      // corpus order is (published_at, id), so i is the origin
      SharedPair p;
      p.origin_article = arts[i].id;
      p.copier_article = arts[j].id;
      p.origin_source = arts[i].source_id;
      p.copier_source = arts[j].source_id;
      p.similarity = sim;
      p.lag_seconds = dt;
      p.ambiguous_direction = arts[i].published_at == arts[j].published_at;
      pairs.push_back(std::move(p));
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const SharedPair& a, const SharedPair& b) {
              if (a.origin_article != b.origin_article)
                return a.origin_article < b.origin_article;
              return a.copier_article < b.copier_article;
            });
  return pairs;
}

}  // namespace csnet::ref
