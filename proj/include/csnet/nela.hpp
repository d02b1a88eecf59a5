#pragma once

#include <map>
#include <unordered_map>

#include "csnet/corpus.hpp"
#include "csnet/features.hpp"
#include "csnet/textrep.hpp"

namespace csnet {

// A word list (rate features) or word -> score map (mean-score features).
struct Lexicon {
  bool scored = false;
  std::unordered_map<std::string, double> entries;

  bool contains(const std::string& w) const { return entries.count(w) > 0; }
};

// Loads the fixed set of lexicons this feature registry is built on.
// Files hold one term per line, or "term<TAB>score" for scored lexicons.
struct LexiconSet {
  std::map<std::string, Lexicon> lexicons;
  SchemaPtr schema;  // full article registry (title + body scopes)

  static LexiconSet load(const std::string& dir);
  static const std::vector<std::string>& function_word_names();
  static const std::vector<std::string>& bias_names();
  static const std::vector<std::string>& affect_names();
  static const std::vector<std::string>& moral_names();

  const Lexicon& at(const std::string& name) const;
};

// The registry is fixed by the lexicon name lists, so the schema is
// available without loading lexicon contents (CSV reload path).
SchemaPtr nela_schema();

// Style, complexity, bias, affect, and moral features, computed on title
// and body separately. Empty text yields zeros; zero denominators yield 0.
FeatureVector compute_nela_features(const Article& a, const LexiconSet& lx);

// Averaged word-vector features over title + body.
FeatureVector compute_ft_features(const Article& a, const WordVectorTable& t);

}  // namespace csnet
