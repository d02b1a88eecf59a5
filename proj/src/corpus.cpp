#include "csnet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace csnet {

using json = nlohmann::json;

const char* to_string(SourceLabel label) {
  switch (label) {
    case SourceLabel::Reliable:
      return "reliable";
    case SourceLabel::Unreliable:
      return "unreliable";
    default:
      return "unlabeled";
  }
}

const Source* Corpus::find_source(const std::string& id) const {
  auto it = source_index.find(id);
  return it == source_index.end() ? nullptr : &sources[it->second];
}

std::size_t Corpus::articles_of(const std::string& source_id) const {
  std::size_t n = 0;
  for (const auto& a : articles) n += a.source_id == source_id;
  return n;
}

void Corpus::finalize() {
  std::sort(articles.begin(), articles.end(),
            [](const Article& a, const Article& b) {
              if (a.published_at != b.published_at)
                return a.published_at < b.published_at;
              return a.id < b.id;
            });
  std::sort(sources.begin(), sources.end(),
            [](const Source& a, const Source& b) { return a.id < b.id; });

  source_index.clear();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!source_index.emplace(sources[i].id, i).second)
      throw Error("duplicate source id: " + sources[i].id);
  }

  std::unordered_set<std::string> ids;
  ids.reserve(articles.size());
  for (const auto& a : articles) {
    if (!ids.insert(a.id).second) throw Error("duplicate article id: " + a.id);
    if (!source_index.count(a.source_id))
      throw Error("article " + a.id + " references unknown source " +
                  a.source_id);
  }
  for (const auto& ex : exclusions) {
    if (!ids.count(ex))
      throw Error("exclusion id not present in corpus: " + ex);
  }
}

std::unordered_map<std::string, SourceLabel> load_labels(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open labels file: " + path);
  std::unordered_map<std::string, SourceLabel> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error("labels file " + path + ":" + std::to_string(lineno) +
                  ": expected '<source>\\t<label>'");
    std::string name = line.substr(0, tab);
    std::string token = line.substr(tab + 1);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    SourceLabel label;
    if (token == "reliable")
      label = SourceLabel::Reliable;
    else if (token == "unreliable")
      label = SourceLabel::Unreliable;
    else
      throw Error("labels file " + path + ":" + std::to_string(lineno) +
                  ": unknown label token '" + token + "'");
    labels[name] = label;
  }
  return labels;
}

Corpus make_corpus(std::vector<Article> articles,
                   const std::unordered_map<std::string, SourceLabel>& labels) {
  Corpus c;
  c.articles = std::move(articles);
  std::map<std::string, Source> by_id;
  for (const auto& a : c.articles) {
    auto& s = by_id[a.source_id];
    s.id = a.source_id;
    s.name = a.source_id;
  }
  for (auto& [id, s] : by_id) {
    auto it = labels.find(id);
    if (it != labels.end()) s.label = it->second;
  }
  c.sources.reserve(by_id.size());
  for (auto& [id, s] : by_id) c.sources.push_back(std::move(s));
  c.finalize();
  return c;
}

Corpus load_corpus(const std::string& path, const std::string& labels_path,
                   LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  auto labels = load_labels(labels_path);

  LoadReport local;
  std::vector<Article> articles;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++local.records_read;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": malformed record: " + e.what());
    }
    for (const char* field : {"id", "source", "title", "content",
                              "published_utc"}) {
      if (!rec.contains(field))
        throw Error(path + ":" + std::to_string(lineno) +
                    ": record missing field '" + field + "'");
    }
    Article a;
    a.id = rec["id"].get<std::string>();
    a.source_id = rec["source"].get<std::string>();
    a.title = rec["title"].get<std::string>();
    a.body = rec["content"].get<std::string>();

    std::optional<std::int64_t> ts;
    const auto& raw = rec["published_utc"];
    if (raw.is_number_integer())
      ts = raw.get<std::int64_t>();
    else if (raw.is_string())
      ts = parse_timestamp(raw.get<std::string>());
    if (!ts) {
      ++local.rejected_timestamps;
      continue;
    }
    a.published_at = *ts;
    articles.push_back(std::move(a));
  }
  if (local.rejected_timestamps > 0)
    local.warnings.push_back(std::to_string(local.rejected_timestamps) +
                             " records rejected for unparseable timestamps");

  Corpus c = make_corpus(std::move(articles), labels);
  for (const auto& [name, label] : labels) {
    if (!c.source_index.count(name))
      local.warnings.push_back("label for unseen source ignored: " + name);
  }
  if (report) *report = std::move(local);
  return c;
}

Corpus sample_per_source(const Corpus& c, std::size_t n, std::uint64_t seed,
                         std::vector<std::string>* warnings) {
  if (n < 1) throw Error("sample_per_source: n must be >= 1");
  // per-source index lists in corpus (time) order
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < c.articles.size(); ++i)
    by_source[c.articles[i].source_id].push_back(i);

  std::vector<Article> picked;
  for (const auto& [sid, idxs] : by_source) {
    if (idxs.size() <= n) {
      if (idxs.size() < n && warnings)
        warnings->push_back("source " + sid + " has only " +
                            std::to_string(idxs.size()) + " articles (< " +
                            std::to_string(n) + "); keeping all");
      for (auto i : idxs) picked.push_back(c.articles[i]);
      continue;
    }
    Rng rng(derive_seed(seed, "sample_per_source", fnv1a64(sid)));
    for (auto j : rng.sample_without_replacement(idxs.size(), n))
      picked.push_back(c.articles[idxs[j]]);
  }

  Corpus out;
  out.articles = std::move(picked);
  out.sources = c.sources;
  for (const auto& a : out.articles)
    if (c.exclusions.count(a.id)) out.exclusions.insert(a.id);
  out.finalize();
  return out;
}

Corpus sample_fraction_per_source(const Corpus& c, double frac,
                                  std::uint64_t seed) {
  if (frac <= 0.0 || frac > 1.0)
    throw Error("sample_fraction_per_source: frac must be in (0, 1]");
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < c.articles.size(); ++i)
    by_source[c.articles[i].source_id].push_back(i);

  std::vector<Article> picked;
  for (const auto& [sid, idxs] : by_source) {
    std::size_t n = static_cast<std::size_t>(
        std::max(1.0, std::floor(frac * static_cast<double>(idxs.size()) + 0.5)));
    if (n > idxs.size()) n = idxs.size();
    Rng rng(derive_seed(seed, "sample_fraction_per_source", fnv1a64(sid)));
    for (auto j : rng.sample_without_replacement(idxs.size(), n))
      picked.push_back(c.articles[idxs[j]]);
  }

  Corpus out;
  out.articles = std::move(picked);
  out.sources = c.sources;
  for (const auto& a : out.articles)
    if (c.exclusions.count(a.id)) out.exclusions.insert(a.id);
  out.finalize();
  return out;
}

Corpus slice_by_time(const Corpus& c, std::int64_t start, std::int64_t end) {
  if (start >= end) throw Error("slice_by_time: start must be < end");
  Corpus out;
  for (const auto& a : c.articles)
    if (a.published_at >= start && a.published_at < end)
      out.articles.push_back(a);
  out.sources = c.sources;
  for (const auto& a : out.articles)
    if (c.exclusions.count(a.id)) out.exclusions.insert(a.id);
  out.finalize();
  return out;
}

void add_exclusions(Corpus& c, const std::unordered_set<std::string>& ids) {
  std::unordered_set<std::string> known;
  known.reserve(c.articles.size());
  for (const auto& a : c.articles) known.insert(a.id);
  for (const auto& id : ids) {
    if (!known.count(id)) continue;  // ids from a wider corpus are fine
    c.exclusions.insert(id);
  }
}

Corpus drop_excluded(const Corpus& c) {
  Corpus out;
  for (const auto& a : c.articles)
    if (!c.exclusions.count(a.id)) out.articles.push_back(a);
  out.sources = c.sources;
  out.finalize();
  return out;
}

void write_corpus(const Corpus& c, const std::string& path) {
  std::ostringstream out;
  for (const auto& a : c.articles) {
    nlohmann::ordered_json rec;
    rec["id"] = a.id;
    rec["source"] = a.source_id;
    rec["title"] = a.title;
    rec["content"] = a.body;
    rec["published_utc"] = a.published_at;
    out << rec.dump() << '\n';
  }
  write_file(path, out.str());
}

void write_labels(const Corpus& c, const std::string& path) {
  std::ostringstream out;
  for (const auto& s : c.sources) {
    if (s.label == SourceLabel::Unlabeled) continue;
    out << s.id << '\t' << to_string(s.label) << '\n';
  }
  write_file(path, out.str());
}

}  // namespace csnet
