#include <algorithm>
#include <numeric>

#include "csnet/ref.hpp"

namespace csnet::ref {

namespace {

constexpr int kInf = 1 << 28;

std::vector<std::vector<int>> floyd_warshall(const CsnGraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kInf));
  for (int i = 0; i < n; ++i) dist[i][i] = 0;
  for (const auto& e : g.edges) dist[e.from][e.to] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
  return dist;
}

// sigma[s][t]: number of shortest s->t paths, by DP over distance order.
std::vector<std::vector<double>> count_paths(
    const CsnGraph& g, const std::vector<std::vector<int>>& dist) {
  const int n = static_cast<int>(g.node_count());
  std::vector<std::vector<int>> in_nbrs(n);
  for (const auto& e : g.edges) in_nbrs[e.to].push_back(e.from);

  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return dist[s][a] < dist[s][b]; });
    sigma[s][s] = 1.0;
    for (int t : order) {
      if (t == s || dist[s][t] >= kInf) continue;
      for (int u : in_nbrs[t])
        if (dist[s][u] + 1 == dist[s][t]) sigma[s][t] += sigma[s][u];
    }
  }
  return sigma;
}

}  // namespace

std::vector<double> closeness_serial(const CsnGraph& g) {
  const int n = static_cast<int>(g.node_count());
  auto dist = floyd_warshall(g);
  std::vector<double> out(n, 0.0);
  if (n <= 1) return out;
  for (int u = 0; u < n; ++u) {
    long reached = 0, total = 0;
    for (int v = 0; v < n; ++v) {
      if (v != u && dist[u][v] < kInf) {
        ++reached;
        total += dist[u][v];
      }
    }
    if (reached > 0 && total > 0) {
      double r = static_cast<double>(reached);
      out[u] = (r / (n - 1)) * (r / static_cast<double>(total));
    }
  }
  return out;
}

std::vector<double> betweenness_serial(const CsnGraph& g) {
  const int n = static_cast<int>(g.node_count());
  auto dist = floyd_warshall(g);
  auto sigma = count_paths(g, dist);
  std::vector<double> out(n, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int s = 0; s < n; ++s) {
      if (s == v) continue;
      for (int t = 0; t < n; ++t) {
        if (t == s || t == v) continue;
        if (dist[s][t] >= kInf || sigma[s][t] == 0.0) continue;
        if (dist[s][v] + dist[v][t] == dist[s][t])
          out[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
      }
    }
  }
  return out;
}

}  // namespace csnet::ref
