#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csnet/corpus.hpp"

namespace csnet {

// Shared tokenizer: lowercase, split on non-alphanumeric (bytes >= 0x80 are
// treated as word characters so UTF-8 words survive), drop pure-digit tokens
// and tokens of length 1.
std::vector<std::string> tokenize(std::string_view text);

// Same splitting rules but original case kept (capitalization features).
std::vector<std::string> tokenize_raw(std::string_view text);

// ---- sparse / dense vectors --------------------------------------------------

// Strictly increasing indices, no explicit zeros.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  bool empty() const { return entries.empty(); }
};

using DenseVector = std::vector<double>;

double cosine_similarity(const SparseVector& u, const SparseVector& v);
double cosine_similarity(const DenseVector& u, const DenseVector& v);

// ---- tf-idf ------------------------------------------------------------------

struct TfIdfModel {
  std::unordered_map<std::string, std::uint32_t> vocabulary;
  std::vector<double> idf;  // indexed by vocabulary value
  std::size_t document_count = 0;

  double idf_of(const std::string& term) const;
};

// Document = title + body of each article. idf(t) = ln((1+N)/(1+df)) + 1.
TfIdfModel fit_tfidf(const Corpus& c);

// Raw term counts scaled by idf, then L2-normalized. Out-of-vocabulary
// tokens are ignored; empty text yields the zero vector.
SparseVector tfidf_vector(const TfIdfModel& m, const Article& a);

void save_tfidf(const TfIdfModel& m, const std::string& path);
TfIdfModel load_tfidf(const std::string& path);

// ---- word vectors ------------------------------------------------------------

struct WordVectorTable {
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<DenseVector> vectors;
  std::size_t dim = 0;

  const DenseVector* find(const std::string& word) const;
};

// Text format: one "word v1 ... vD" line per word; an optional leading
// "count dim" header line is accepted.
WordVectorTable load_word_vectors(const std::string& path);

// Mean vector of the in-vocabulary tokens; zero vector when none match.
DenseVector avg_word_vector(std::string_view text, const WordVectorTable& t);

// Per-source representation: mean of article vectors (title + body) over
// the articles present in c. Sources with no articles are absent.
std::map<std::string, DenseVector> source_text_repr(const Corpus& c,
                                                    const WordVectorTable& t);

void save_dense_vectors(const std::map<std::string, DenseVector>& vecs,
                        std::size_t dim, const std::string& path);

}  // namespace csnet
