#include "csnet/textrep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace csnet {

namespace {

inline bool word_char(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

inline bool pure_digits(std::string_view tok) {
  for (unsigned char c : tok)
    if (!std::isdigit(c)) return false;
  return true;
}

template <bool Lower>
std::vector<std::string> tokenize_impl(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !pure_digits(cur)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (word_char(c)) {
      cur.push_back(Lower ? static_cast<char>(std::tolower(c))
                          : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  return tokenize_impl<true>(text);
}

std::vector<std::string> tokenize_raw(std::string_view text) {
  return tokenize_impl<false>(text);
}

double SparseVector::norm() const {
  double s = 0;
  for (const auto& [i, v] : entries) s += v * v;
  return std::sqrt(s);
}

double cosine_similarity(const SparseVector& u, const SparseVector& v) {
  double dot = 0;
  auto it = u.entries.begin();
  auto jt = v.entries.begin();
  while (it != u.entries.end() && jt != v.entries.end()) {
    if (it->first < jt->first)
      ++it;
    else if (jt->first < it->first)
      ++jt;
    else {
      dot += it->second * jt->second;
      ++it;
      ++jt;
    }
  }
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;  // zero vector: similarity 0
  return dot / (nu * nv);
}

double cosine_similarity(const DenseVector& u, const DenseVector& v) {
  if (u.size() != v.size())
    throw Error("cosine_similarity: dimension mismatch (" +
                std::to_string(u.size()) + " vs " + std::to_string(v.size()) +
                ")");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double TfIdfModel::idf_of(const std::string& term) const {
  auto it = vocabulary.find(term);
  if (it == vocabulary.end()) throw Error("term not in vocabulary: " + term);
  return idf[it->second];
}

TfIdfModel fit_tfidf(const Corpus& c) {
  if (c.articles.empty()) throw Error("fit_tfidf: empty corpus");
  std::map<std::string, std::size_t> df;  // sorted terms -> dense indices
  std::vector<std::string> toks;
  for (const auto& a : c.articles) {
    toks = tokenize(a.title + " " + a.body);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[t];
  }
  TfIdfModel m;
  m.document_count = c.articles.size();
  m.vocabulary.reserve(df.size());
  m.idf.reserve(df.size());
  const double n = static_cast<double>(m.document_count);
  std::uint32_t next = 0;
  for (const auto& [term, count] : df) {
    m.vocabulary.emplace(term, next++);
    m.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                    1.0);
  }
  return m;
}

SparseVector tfidf_vector(const TfIdfModel& m, const Article& a) {
  std::unordered_map<std::uint32_t, double> counts;
  for (const auto& tok : tokenize(a.title + " " + a.body)) {
    auto it = m.vocabulary.find(tok);
    if (it != m.vocabulary.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  for (const auto& [idx, tf] : counts)
    v.entries.emplace_back(idx, tf * m.idf[idx]);
  std::sort(v.entries.begin(), v.entries.end());
  double norm = v.norm();
  if (norm > 0)
    for (auto& [i, val] : v.entries) val /= norm;
  return v;
}

void save_tfidf(const TfIdfModel& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "tfidf-v1";
  j["document_count"] = m.document_count;
  std::vector<std::string> terms(m.vocabulary.size());
  for (const auto& [t, i] : m.vocabulary) terms[i] = t;
  j["terms"] = terms;
  j["idf"] = m.idf;
  write_file(path, j.dump());
}

TfIdfModel load_tfidf(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  if (j.value("format", "") != "tfidf-v1")
    throw Error("unsupported tf-idf model format in " + path);
  TfIdfModel m;
  m.document_count = j["document_count"].get<std::size_t>();
  auto terms = j["terms"].get<std::vector<std::string>>();
  m.idf = j["idf"].get<std::vector<double>>();
  if (terms.size() != m.idf.size())
    throw Error("corrupt tf-idf model: term/idf size mismatch");
  for (std::uint32_t i = 0; i < terms.size(); ++i)
    m.vocabulary.emplace(std::move(terms[i]), i);
  return m;
}

const DenseVector* WordVectorTable::find(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? nullptr : &vectors[it->second];
}

WordVectorTable load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vector file: " + path);
  WordVectorTable t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (first) {
      first = false;
      // "count dim" header: first token numeric and exactly one value after
      if (vals.size() == 1 &&
          word.find_first_not_of("0123456789") == std::string::npos)
        continue;
    }
    if (vals.empty())
      throw Error(path + ":" + std::to_string(lineno) + ": no vector values");
    if (t.dim == 0) t.dim = vals.size();
    if (vals.size() != t.dim)
      throw Error(path + ":" + std::to_string(lineno) +
                  ": dimension mismatch (" + std::to_string(vals.size()) +
                  " vs " + std::to_string(t.dim) + ")");
    auto [it, inserted] =
        t.index.emplace(word, static_cast<std::uint32_t>(t.vectors.size()));
    if (inserted) t.vectors.push_back(std::move(vals));
  }
  return t;
}

DenseVector avg_word_vector(std::string_view text, const WordVectorTable& t) {
  DenseVector acc(t.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tokenize(text)) {
    const DenseVector* v = t.find(tok);
    if (!v) continue;
    for (std::size_t i = 0; i < t.dim; ++i) acc[i] += (*v)[i];
    ++hits;
  }
  if (hits > 0)
    for (auto& x : acc) x /= static_cast<double>(hits);
  return acc;
}

std::map<std::string, DenseVector> source_text_repr(const Corpus& c,
                                                    const WordVectorTable& t) {
  std::map<std::string, std::pair<DenseVector, std::size_t>> acc;
  for (const auto& a : c.articles) {
    DenseVector v = avg_word_vector(a.title + " " + a.body, t);
    auto& [sum, n] = acc[a.source_id];
    if (sum.empty()) sum.assign(t.dim, 0.0);
    for (std::size_t i = 0; i < t.dim; ++i) sum[i] += v[i];
    ++n;
  }
  std::map<std::string, DenseVector> out;
  for (auto& [sid, p] : acc) {
    for (auto& x : p.first) x /= static_cast<double>(p.second);
    out.emplace(sid, std::move(p.first));
  }
  return out;
}

void save_dense_vectors(const std::map<std::string, DenseVector>& vecs,
                        std::size_t dim, const std::string& path) {
  std::ostringstream out;
  for (const auto& [id, v] : vecs) {
    out << id;
    for (std::size_t i = 0; i < dim; ++i) out << ' ' << fmt_double(v[i]);
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace csnet
