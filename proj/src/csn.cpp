#include "csnet/csn.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace csnet {

namespace {

// origin = earlier article; ties oriented by id and flagged.
SharedPair make_pair(const Article& earlier, const Article& later,
                     double similarity) {
  SharedPair p;
  p.origin_article = earlier.id;
  p.copier_article = later.id;
  p.origin_source = earlier.source_id;
  p.copier_source = later.source_id;
  p.similarity = similarity;
  p.lag_seconds = later.published_at - earlier.published_at;
  p.ambiguous_direction = earlier.published_at == later.published_at;
  return p;
}

void sort_pairs(std::vector<SharedPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const SharedPair& a, const SharedPair& b) {
              if (a.origin_article != b.origin_article)
                return a.origin_article < b.origin_article;
              return a.copier_article < b.copier_article;
            });
}

}  // namespace

std::vector<SharedPair> find_shared_pairs(const Corpus& c,
                                          const TfIdfModel& model,
                                          int window_days, double theta,
                                          int workers) {
  if (window_days < 1) throw Error("find_shared_pairs: window_days must be >= 1");
  if (theta <= 0.0 || theta > 1.0)
    throw Error("find_shared_pairs: theta must be in (0, 1]");
  if (workers <= 0) workers = omp_get_max_threads();

  const auto& arts = c.articles;  // sorted by (published_at, id)
  const std::size_t n = arts.size();
  const std::int64_t window_seconds =
      static_cast<std::int64_t>(window_days) * 86400;

  std::vector<SparseVector> vecs(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
  for (std::size_t i = 0; i < n; ++i) vecs[i] = tfidf_vector(model, arts[i]);

  // term -> ascending article indices with values (window pruning index)
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings(
      model.idf.size());
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& [term, val] : vecs[i].entries)
      postings[term].emplace_back(i, val);

  // window end per article: first j with t_j - t_i >= window
  std::vector<std::uint32_t> wend(n);
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (j < i) j = i;
      while (j < n && arts[j].published_at - arts[i].published_at <
                          window_seconds)
        ++j;
      wend[i] = static_cast<std::uint32_t>(j);
    }
  }

  std::vector<std::vector<SharedPair>> found(workers);
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> score(n, 0.0);
    std::vector<std::uint32_t> touched;
    auto& local = found[omp_get_thread_num()];

#pragma omp for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t lo = static_cast<std::uint32_t>(i) + 1;
      const std::uint32_t hi = wend[i];
      if (lo >= hi) continue;
      // ascending term order keeps the accumulation order identical to a
      // sorted-merge dot product, so scores match the serial scan bitwise
      for (const auto& [term, val] : vecs[i].entries) {
        const auto& post = postings[term];
        auto it = std::lower_bound(
            post.begin(), post.end(), lo,
            [](const auto& e, std::uint32_t x) { return e.first < x; });
        for (; it != post.end() && it->first < hi; ++it) {
          if (score[it->first] == 0.0) touched.push_back(it->first);
          score[it->first] += val * it->second;
        }
      }
      for (std::uint32_t j : touched) {
        if (score[j] >= theta && arts[j].source_id != arts[i].source_id)
          local.push_back(make_pair(arts[i], arts[j], score[j]));
        score[j] = 0.0;
      }
      touched.clear();
    }
  }

  std::vector<SharedPair> pairs;
  for (auto& f : found) {
    pairs.insert(pairs.end(), std::make_move_iterator(f.begin()),
                 std::make_move_iterator(f.end()));
  }
  sort_pairs(pairs);
  return pairs;
}

std::unordered_set<std::string> csn_exclusion_set(
    const std::vector<SharedPair>& pairs) {
  std::unordered_set<std::string> ids;
  for (const auto& p : pairs) {
    ids.insert(p.origin_article);
    ids.insert(p.copier_article);
  }
  return ids;
}

int CsnGraph::index_of(const std::string& id) const {
  auto it = node_index.find(id);
  if (it == node_index.end()) throw Error("unknown source in graph: " + id);
  return it->second;
}

void CsnGraph::rebuild_adjacency() {
  out_edges.assign(node_ids.size(), {});
  in_edges.assign(node_ids.size(), {});
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    out_edges[edges[e].from].push_back(e);
    in_edges[edges[e].to].push_back(e);
  }
}

CsnGraph build_csn(const std::vector<SharedPair>& pairs, const Corpus& c) {
  CsnGraph g;
  g.node_ids.reserve(c.sources.size());
  for (const auto& s : c.sources) {
    g.node_index.emplace(s.id, static_cast<int>(g.node_ids.size()));
    g.node_ids.push_back(s.id);
    g.node_labels.push_back(s.label);
  }
  g.published_total.assign(g.node_ids.size(), 0);
  for (const auto& a : c.articles)
    ++g.published_total[g.index_of(a.source_id)];

  std::map<std::pair<int, int>, long> counts;
  for (const auto& p : pairs) {
    auto oi = g.node_index.find(p.origin_source);
    auto ci = g.node_index.find(p.copier_source);
    if (oi == g.node_index.end() || ci == g.node_index.end())
      throw Error("pair references source absent from corpus: " +
                  p.origin_source + " -> " + p.copier_source);
    if (oi->second == ci->second)
      throw Error("self-loop pair for source " + p.origin_source);
    ++counts[{oi->second, ci->second}];
  }

  g.edges.reserve(counts.size());
  for (const auto& [key, raw] : counts) {
    CsnEdge e;
    e.from = key.first;
    e.to = key.second;
    e.raw_count = raw;
    long total = g.published_total[e.to];
    if (total <= 0)
      throw Error("copier " + g.node_ids[e.to] +
                  " has no recorded publications");
    e.weight = static_cast<double>(raw) / static_cast<double>(total);
    g.edges.push_back(e);
  }
  g.rebuild_adjacency();
  return g;
}

void write_pairs(const std::vector<SharedPair>& pairs,
                 const std::string& path) {
  std::ostringstream out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["origin"] = p.origin_article;
    rec["copier"] = p.copier_article;
    rec["origin_source"] = p.origin_source;
    rec["copier_source"] = p.copier_source;
    rec["similarity"] = p.similarity;
    rec["lag_seconds"] = p.lag_seconds;
    rec["ambiguous_direction"] = p.ambiguous_direction;
    out << rec.dump() << '\n';
  }
  write_file(path, out.str());
}

std::vector<SharedPair> load_pairs(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<SharedPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::json::parse(line);
    SharedPair p;
    p.origin_article = rec["origin"].get<std::string>();
    p.copier_article = rec["copier"].get<std::string>();
    p.origin_source = rec["origin_source"].get<std::string>();
    p.copier_source = rec["copier_source"].get<std::string>();
    p.similarity = rec["similarity"].get<double>();
    p.lag_seconds = rec["lag_seconds"].get<std::int64_t>();
    p.ambiguous_direction = rec["ambiguous_direction"].get<bool>();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_csn(const CsnGraph& g, const std::string& edges_path,
               const std::string& nodes_path) {
  std::ostringstream edges;
  for (const auto& e : g.edges)
    edges << g.node_ids[e.from] << '\t' << g.node_ids[e.to] << '\t'
          << e.raw_count << '\t' << fmt_double(e.weight) << '\n';
  write_file(edges_path, edges.str());

  std::ostringstream nodes;
  for (std::size_t i = 0; i < g.node_ids.size(); ++i)
    nodes << g.node_ids[i] << '\t' << g.published_total[i] << '\t'
          << to_string(g.node_labels[i]) << '\n';
  write_file(nodes_path, nodes.str());
}

CsnGraph load_csn(const std::string& edges_path,
                  const std::string& nodes_path) {
  CsnGraph g;
  {
    std::istringstream in(read_file(nodes_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cols = split(line, '\t');
      if (cols.size() != 3)
        throw Error("bad node record in " + nodes_path + ": " + line);
      g.node_index.emplace(cols[0], static_cast<int>(g.node_ids.size()));
      g.node_ids.push_back(cols[0]);
      g.published_total.push_back(std::stol(cols[1]));
      SourceLabel label = SourceLabel::Unlabeled;
      if (cols[2] == "reliable") label = SourceLabel::Reliable;
      if (cols[2] == "unreliable") label = SourceLabel::Unreliable;
      g.node_labels.push_back(label);
    }
  }
  {
    std::istringstream in(read_file(edges_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cols = split(line, '\t');
      if (cols.size() != 4)
        throw Error("bad edge record in " + edges_path + ": " + line);
      CsnEdge e;
      e.from = g.index_of(cols[0]);
      e.to = g.index_of(cols[1]);
      e.raw_count = std::stol(cols[2]);
      e.weight = std::stod(cols[3]);
      g.edges.push_back(e);
    }
  }
  g.rebuild_adjacency();
  return g;
}

namespace {
std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace

void write_gexf(const CsnGraph& g, const std::string& path) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n"
      << "  <graph defaultedgetype=\"directed\">\n"
      << "    <attributes class=\"node\">\n"
      << "      <attribute id=\"0\" title=\"label_class\" type=\"string\"/>\n"
      << "      <attribute id=\"1\" title=\"published_total\" type=\"long\"/>\n"
      << "    </attributes>\n    <nodes>\n";
  for (std::size_t i = 0; i < g.node_ids.size(); ++i) {
    out << "      <node id=\"" << i << "\" label=\""
        << xml_escape(g.node_ids[i]) << "\">\n"
        << "        <attvalues><attvalue for=\"0\" value=\""
        << to_string(g.node_labels[i]) << "\"/><attvalue for=\"1\" value=\""
        << g.published_total[i] << "\"/></attvalues>\n      </node>\n";
  }
  out << "    </nodes>\n    <edges>\n";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out << "      <edge id=\"" << e << "\" source=\"" << g.edges[e].from
        << "\" target=\"" << g.edges[e].to << "\" weight=\""
        << fmt_double(g.edges[e].weight) << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
  write_file(path, out.str());
}

}  // namespace csnet
