#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "csnet/util.hpp"

namespace csnet {

enum class SourceLabel { Reliable, Unreliable, Unlabeled };

const char* to_string(SourceLabel label);

struct Article {
  std::string id;
  std::string source_id;
  std::string title;
  std::string body;
  std::int64_t published_at = 0;  // epoch seconds, UTC
};

struct Source {
  std::string id;
  std::string name;
  SourceLabel label = SourceLabel::Unlabeled;
};

// Immutable after construction; derived views (sample, slice) copy.
// Articles are kept sorted by (published_at, id) so copy-direction
// inference and serialization are deterministic.
struct Corpus {
  std::vector<Article> articles;
  std::vector<Source> sources;  // sorted by id
  std::unordered_set<std::string> exclusions;

  std::unordered_map<std::string, std::size_t> source_index;

  const Source* find_source(const std::string& id) const;
  std::size_t articles_of(const std::string& source_id) const;

  // Rebuilds source_index and checks invariants (unique article ids,
  // every article's source resolvable, exclusions a subset of ids).
  void finalize();
};

struct LoadReport {
  std::size_t records_read = 0;
  std::size_t rejected_timestamps = 0;
  std::vector<std::string> warnings;
};

// Newline-delimited JSON records with fields
// {id, source, title, content, published_utc}; published_utc is ISO-8601
// or epoch seconds. Labels file: "<source>\t<reliable|unreliable>" lines.
Corpus load_corpus(const std::string& path, const std::string& labels_path,
                   LoadReport* report = nullptr);

Corpus make_corpus(std::vector<Article> articles,
                   const std::unordered_map<std::string, SourceLabel>& labels);

// Uniform per-source sample of up to n articles, without replacement.
// Sources with fewer than n keep everything (a warning is recorded).
Corpus sample_per_source(const Corpus& c, std::size_t n, std::uint64_t seed,
                         std::vector<std::string>* warnings = nullptr);

// Per-source fraction sample (at least one article per non-empty source).
Corpus sample_fraction_per_source(const Corpus& c, double frac,
                                  std::uint64_t seed);

// Articles with start <= published_at < end; source set unchanged.
Corpus slice_by_time(const Corpus& c, std::int64_t start, std::int64_t end);

// Marks ids excluded from any classification train/test split.
void add_exclusions(Corpus& c, const std::unordered_set<std::string>& ids);

// View without the excluded articles (used to build classification pools).
Corpus drop_excluded(const Corpus& c);

// Canonical serialization: sorted records, fixed field order, epoch
// timestamps. Byte-identical for identical corpora.
void write_corpus(const Corpus& c, const std::string& path);
void write_labels(const Corpus& c, const std::string& path);

std::unordered_map<std::string, SourceLabel> load_labels(
    const std::string& path);

}  // namespace csnet
