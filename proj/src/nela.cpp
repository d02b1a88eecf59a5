#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "csnet/nela.hpp"

namespace csnet {

const std::vector<std::string>& LexiconSet::function_word_names() {
  static const std::vector<std::string> names = {
      "pronoun_first_singular", "pronoun_first_plural", "pronoun_second",
      "pronoun_third",          "determiners",          "conjunctions",
      "modal_verbs",            "prepositions",         "negations"};
  return names;
}

const std::vector<std::string>& LexiconSet::bias_names() {
  static const std::vector<std::string> names = {"hedges", "factives",
                                                 "assertives", "opinion"};
  return names;
}

const std::vector<std::string>& LexiconSet::affect_names() {
  static const std::vector<std::string> names = {"positive", "negative",
                                                 "anger", "anxiety", "swear"};
  return names;
}

const std::vector<std::string>& LexiconSet::moral_names() {
  static const std::vector<std::string> names = {
      "care_virtue",      "care_vice",      "fairness_virtue",
      "fairness_vice",    "loyalty_virtue", "loyalty_vice",
      "authority_virtue", "authority_vice", "purity_virtue",
      "purity_vice"};
  return names;
}

const Lexicon& LexiconSet::at(const std::string& name) const {
  auto it = lexicons.find(name);
  if (it == lexicons.end()) throw Error("missing lexicon: " + name);
  return it->second;
}

namespace {

Lexicon load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file: " + path);
  Lexicon lx;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      std::string term = line;
      std::transform(term.begin(), term.end(), term.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      lx.entries.emplace(std::move(term), 1.0);
    } else {
      lx.scored = true;
      std::string term = line.substr(0, tab);
      std::transform(term.begin(), term.end(), term.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      lx.entries[term] = std::stod(line.substr(tab + 1));
    }
  }
  return lx;
}

SchemaPtr build_schema_uncached() {
  auto schema = std::make_shared<FeatureSchema>();
  for (FeatureScope scope : {FeatureScope::Title, FeatureScope::Body}) {
    std::string prefix = std::string(to_string(scope)) + "_";
    auto add = [&](const std::string& name, FeatureGroup g) {
      schema->defs.push_back({prefix + name, g, scope});
    };
    for (const auto& n : LexiconSet::function_word_names())
      add(n + "_rate", FeatureGroup::Style);
    add("exclaim_count", FeatureGroup::Style);
    add("question_count", FeatureGroup::Style);
    add("quote_count", FeatureGroup::Style);
    add("comma_count", FeatureGroup::Style);
    add("allcaps_count", FeatureGroup::Style);
    add("allcaps_ratio", FeatureGroup::Style);

    add("type_token_ratio", FeatureGroup::Complexity);
    add("mean_word_length", FeatureGroup::Complexity);
    add("mean_sentence_length", FeatureGroup::Complexity);
    add("readability_ari", FeatureGroup::Complexity);

    for (const auto& n : LexiconSet::bias_names())
      add(n + "_rate", FeatureGroup::Bias);
    for (const auto& n : LexiconSet::affect_names())
      add(n + "_rate", FeatureGroup::Affect);
    for (const auto& n : LexiconSet::moral_names())
      add(n + "_rate", FeatureGroup::Moral);
  }
  schema->check_unique_names();
  return schema;
}

// Sentence boundary: a run of [.!?] followed by whitespace or end of text.
std::size_t count_sentences(std::string_view text, bool has_tokens) {
  std::size_t count = 0;
  std::size_t i = 0;
  bool saw_boundary = false;
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j < text.size() &&
             (text[j] == '.' || text[j] == '!' || text[j] == '?'))
        ++j;
      if (j >= text.size() || std::isspace(static_cast<unsigned char>(text[j]))) {
        ++count;
        saw_boundary = true;
      }
      i = j;
    } else {
      ++i;
    }
  }
  if (!saw_boundary && has_tokens) return 1;
  return count;
}

struct ScopeStats {
  std::vector<double> values;
};

void compute_scope(const std::string& text, const LexiconSet& lx,
                   std::vector<double>& out) {
  auto tokens = tokenize(text);
  auto raw_tokens = tokenize_raw(text);
  const double n_tokens = static_cast<double>(tokens.size());

  auto rate_of = [&](const Lexicon& lex) {
    if (tokens.empty()) return 0.0;
    double acc = 0;
    for (const auto& t : tokens) {
      auto it = lex.entries.find(t);
      if (it != lex.entries.end()) acc += lex.scored ? it->second : 1.0;
    }
    return acc / n_tokens;
  };

  for (const auto& name : LexiconSet::function_word_names())
    out.push_back(rate_of(lx.at(name)));

  double exclaim = 0, question = 0, quote = 0, comma = 0;
  for (char c : text) {
    if (c == '!') ++exclaim;
    if (c == '?') ++question;
    if (c == '"' || c == '\'') ++quote;
    if (c == ',') ++comma;
  }
  out.push_back(exclaim);
  out.push_back(question);
  out.push_back(quote);
  out.push_back(comma);

  double allcaps = 0;
  for (const auto& t : raw_tokens) {
    bool caps = true;
    for (unsigned char c : t)
      if (!std::isupper(c)) caps = false;
    if (caps) ++allcaps;
  }
  out.push_back(allcaps);
  out.push_back(tokens.empty() ? 0.0 : allcaps / n_tokens);

  // complexity
  std::unordered_set<std::string> types(tokens.begin(), tokens.end());
  double chars = 0;
  for (const auto& t : tokens) chars += static_cast<double>(t.size());
  double sentences =
      static_cast<double>(count_sentences(text, !tokens.empty()));
  out.push_back(tokens.empty() ? 0.0
                               : static_cast<double>(types.size()) / n_tokens);
  out.push_back(tokens.empty() ? 0.0 : chars / n_tokens);
  out.push_back(sentences > 0 ? n_tokens / sentences : 0.0);
  // automated readability index
  out.push_back(tokens.empty() || sentences == 0
                    ? 0.0
                    : 4.71 * (chars / n_tokens) +
                          0.5 * (n_tokens / sentences) - 21.43);

  for (const auto& name : LexiconSet::bias_names())
    out.push_back(rate_of(lx.at(name)));
  for (const auto& name : LexiconSet::affect_names())
    out.push_back(rate_of(lx.at(name)));
  for (const auto& name : LexiconSet::moral_names())
    out.push_back(rate_of(lx.at(name)));
}

}  // namespace

SchemaPtr nela_schema() {
  static SchemaPtr schema = build_schema_uncached();
  return schema;
}

LexiconSet LexiconSet::load(const std::string& dir) {
  LexiconSet set;
  std::vector<std::string> all;
  for (const auto& group : {function_word_names(), bias_names(),
                            affect_names(), moral_names()})
    all.insert(all.end(), group.begin(), group.end());
  for (const auto& name : all)
    set.lexicons.emplace(name, load_lexicon_file(dir + "/" + name + ".txt"));
  set.schema = nela_schema();
  return set;
}

FeatureVector compute_nela_features(const Article& a, const LexiconSet& lx) {
  FeatureVector fv;
  fv.schema = lx.schema;
  fv.values.reserve(lx.schema->size());
  compute_scope(a.title, lx, fv.values);
  compute_scope(a.body, lx, fv.values);
  if (fv.values.size() != lx.schema->size())
    throw Error("nela feature count does not match registry");
  return fv;
}

FeatureVector compute_ft_features(const Article& a, const WordVectorTable& t) {
  FeatureVector fv;
  fv.schema = indexed_schema("ft", t.dim, FeatureGroup::Embedding,
                             FeatureScope::Article);
  fv.values = avg_word_vector(a.title + " " + a.body, t);
  return fv;
}

}  // namespace csnet
