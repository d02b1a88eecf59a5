#include <algorithm>
#include <set>
#include <sstream>

#include "csnet/netfeat.hpp"

namespace csnet {

std::vector<double> HcnfVector::values() const {
  return {community_id,     weighted_out_degree, weighted_in_degree,
          closeness,        betweenness,         eigenvector,
          community_core,   inside_source_edges, inside_sink_edges,
          importing_edges,  exporting_edges};
}

const std::vector<std::string>& HcnfVector::names() {
  static const std::vector<std::string> names = {
      "community_id",        "weighted_out_degree", "weighted_in_degree",
      "closeness",           "betweenness",         "eigenvector",
      "community_core",      "inside_source_edges", "inside_sink_edges",
      "importing_edges",     "exporting_edges"};
  return names;
}

HcnfTable compute_hcnf(const CsnGraph& g, const CommunityAssignment& cm,
                       int workers) {
  const int n = static_cast<int>(g.node_count());
  if (static_cast<int>(cm.community.size()) != n)
    throw Error("compute_hcnf: community assignment does not cover the graph");

  auto closeness = closeness_centrality(g);
  auto betweenness = betweenness_centrality(g, workers);
  auto eigen = eigenvector_centrality(g);

  // main-core membership inside each community's undirected subgraph
  std::vector<char> in_main_core(n, 0);
  const int cc = cm.community_count();
  std::vector<std::vector<int>> members(cc);
  for (int u = 0; u < n; ++u) members[cm.community[u]].push_back(u);
  for (int c = 0; c < cc; ++c) {
    const auto& grp = members[c];
    const int m = static_cast<int>(grp.size());
    std::vector<int> pos(n, -1);
    for (int i = 0; i < m; ++i) pos[grp[i]] = i;
    std::vector<std::set<int>> nb(m);
    for (const auto& e : g.edges) {
      int a = pos[e.from], b = pos[e.to];
      if (a < 0 || b < 0 || a == b) continue;
      nb[a].insert(b);
      nb[b].insert(a);
    }
    std::vector<std::vector<int>> adj(m);
    for (int i = 0; i < m; ++i) adj[i].assign(nb[i].begin(), nb[i].end());
    auto core = core_numbers_undirected(adj);
    int maxk = 0;
    for (int k : core) maxk = std::max(maxk, k);
    for (int i = 0; i < m; ++i)
      if (core[i] == maxk) in_main_core[grp[i]] = 1;
  }

  HcnfTable table;
  table.eigenvector_fallback = eigen.fell_back_undirected;
  for (int u = 0; u < n; ++u) {
    HcnfVector v;
    v.community_id = cm.community[u];
    v.closeness = closeness[u];
    v.betweenness = betweenness[u];
    v.eigenvector = eigen.values[u];
    v.community_core = in_main_core[u] ? 1.0 : 0.0;
    table.by_source.emplace(g.node_ids[u], v);
  }
  // degree and boundary counts; raw counts for the edge features, since
  // they count articles
  for (const auto& e : g.edges) {
    auto& from = table.by_source[g.node_ids[e.from]];
    auto& to = table.by_source[g.node_ids[e.to]];
    from.weighted_out_degree += e.weight;
    to.weighted_in_degree += e.weight;
    bool same = cm.community[e.from] == cm.community[e.to];
    if (same) {
      from.inside_source_edges += static_cast<double>(e.raw_count);
      to.inside_sink_edges += static_cast<double>(e.raw_count);
    } else {
      from.exporting_edges += static_cast<double>(e.raw_count);
      to.importing_edges += static_cast<double>(e.raw_count);
    }
  }
  return table;
}

void write_hcnf_csv(const HcnfTable& t, const std::string& path) {
  std::ostringstream out;
  out << "source";
  for (const auto& name : HcnfVector::names()) out << ',' << name;
  out << '\n';
  for (const auto& [sid, v] : t.by_source) {
    out << sid;
    for (double x : v.values()) out << ',' << fmt_double(x);
    out << '\n';
  }
  write_file(path, out.str());
}

void write_communities_csv(const CsnGraph& g, const CommunityAssignment& cm,
                           const std::string& path) {
  std::ostringstream out;
  out << "source,community\n";
  for (std::size_t u = 0; u < g.node_count(); ++u)
    out << g.node_ids[u] << ',' << cm.community[u] << '\n';
  write_file(path, out.str());
}

}  // namespace csnet
