#include <omp.h>

#include <algorithm>
#include <cmath>
#include <queue>

#include "csnet/netfeat.hpp"

namespace csnet {

namespace {

std::vector<std::vector<int>> out_neighbors(const CsnGraph& g) {
  std::vector<std::vector<int>> adj(g.node_count());
  for (const auto& e : g.edges) adj[e.from].push_back(e.to);
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

void bfs(const std::vector<std::vector<int>>& adj, int src,
         std::vector<int>& dist) {
  dist.assign(adj.size(), -1);
  dist[src] = 0;
  std::vector<int> frontier{src};
  std::vector<int> next;
  while (!frontier.empty()) {
    next.clear();
    for (int u : frontier) {
      for (int v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
}

}  // namespace

std::vector<double> closeness_centrality(const CsnGraph& g) {
  const int n = static_cast<int>(g.node_count());
  auto adj = out_neighbors(g);
  std::vector<double> out(n, 0.0);
  if (n <= 1) return out;
#pragma omp parallel
  {
    std::vector<int> dist;
#pragma omp for schedule(dynamic, 8)
    for (int u = 0; u < n; ++u) {
      bfs(adj, u, dist);
      long reached = 0, total = 0;
      for (int v = 0; v < n; ++v) {
        if (v != u && dist[v] > 0) {
          ++reached;
          total += dist[v];
        }
      }
      if (reached > 0 && total > 0) {
        double r = static_cast<double>(reached);
        out[u] = (r / (n - 1)) * (r / static_cast<double>(total));
      }
    }
  }
  return out;
}

std::vector<double> betweenness_centrality(const CsnGraph& g, int workers) {
  const int n = static_cast<int>(g.node_count());
  auto adj = out_neighbors(g);
  if (workers <= 0) workers = omp_get_max_threads();

  // Per-source dependency rows; summed in index order afterwards so the
  // result does not depend on the thread count.
  std::vector<std::vector<double>> contrib(n);
#pragma omp parallel num_threads(workers)
  {
    std::vector<int> dist(n), sigma(n);
    std::vector<double> delta(n);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;

#pragma omp for schedule(dynamic, 4)
    for (int s = 0; s < n; ++s) {
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0);
      std::fill(delta.begin(), delta.end(), 0.0);
      for (auto& p : preds) p.clear();
      order.clear();

      dist[s] = 0;
      sigma[s] = 1;
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        order.push_back(u);
        for (int v : adj[u]) {
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            q.push(v);
          }
          if (dist[v] == dist[u] + 1) {
            sigma[v] += sigma[u];
            preds[v].push_back(u);
          }
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int w = *it;
        for (int u : preds[w])
          delta[u] += (static_cast<double>(sigma[u]) / sigma[w]) *
                      (1.0 + delta[w]);
      }
      std::vector<double> row(n, 0.0);
      for (int v = 0; v < n; ++v)
        if (v != s) row[v] = delta[v];
      contrib[s] = std::move(row);
    }
  }

  std::vector<double> out(n, 0.0);
  for (int s = 0; s < n; ++s)
    for (int v = 0; v < n; ++v) out[v] += contrib[s][v];
  return out;
}

EigenvectorResult eigenvector_centrality(const CsnGraph& g, int max_iter,
                                         double tol) {
  const int n = static_cast<int>(g.node_count());
  EigenvectorResult res;
  res.values.assign(n, 0.0);
  if (n == 0) return res;

  // x'_i = x_i + sum over in-edges (j -> i) of w_ji * x_j
  auto iterate = [&](const std::vector<std::pair<int, std::pair<int, double>>>&
                         edges) -> std::optional<std::vector<double>> {
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n);
    for (int it = 0; it < max_iter; ++it) {
      std::copy(x.begin(), x.end(), y.begin());
      for (const auto& [to, edge] : edges) y[to] += edge.second * x[edge.first];
      double norm = 0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-300) return std::nullopt;
      for (double& v : y) v /= norm;
      double diff = 0;
      for (int i = 0; i < n; ++i) diff += std::abs(y[i] - x[i]);
      x.swap(y);
      if (diff < n * tol) return x;
    }
    return std::nullopt;
  };

  std::vector<std::pair<int, std::pair<int, double>>> directed;
  for (const auto& e : g.edges) directed.push_back({e.to, {e.from, e.weight}});
  if (auto x = iterate(directed)) {
    res.values = std::move(*x);
    return res;
  }

  res.fell_back_undirected = true;
  std::vector<std::pair<int, std::pair<int, double>>> sym = directed;
  for (const auto& e : g.edges) sym.push_back({e.from, {e.to, e.weight}});
  if (auto x = iterate(sym)) {
    res.values = std::move(*x);
  }
  return res;
}

std::vector<int> core_numbers_undirected(
    const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> degree(n), core(n, 0);
  for (int u = 0; u < n; ++u) degree[u] = static_cast<int>(adj[u].size());

  // peel vertices in nondecreasing degree order
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return degree[a] < degree[b]; });
  std::vector<char> removed(n, 0);
  std::vector<int> deg = degree;
  int k = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int u : order) {
      if (!removed[u] && (best < 0 || deg[u] < deg[best])) best = u;
    }
    k = std::max(k, deg[best]);
    core[best] = k;
    removed[best] = 1;
    for (int v : adj[best])
      if (!removed[v]) --deg[v];
  }
  return core;
}

}  // namespace csnet
