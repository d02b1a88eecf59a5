#include <algorithm>
#include <cmath>
#include <numeric>

#include "csnet/netfeat.hpp"

namespace csnet {

int CommunityAssignment::community_count() const {
  int mx = -1;
  for (int c : community) mx = std::max(mx, c);
  return mx + 1;
}

namespace {

struct WeightedDigraph {
  int n = 0;
  double total = 0.0;                 // W = sum of all edge weights
  std::vector<double> kout, kin;      // weighted degrees
  std::vector<std::vector<std::pair<int, double>>> out;  // i -> (j, w)

  static WeightedDigraph from(const CsnGraph& g) {
    WeightedDigraph d;
    d.n = static_cast<int>(g.node_count());
    d.kout.assign(d.n, 0.0);
    d.kin.assign(d.n, 0.0);
    d.out.assign(d.n, {});
    for (const auto& e : g.edges) {
      d.out[e.from].emplace_back(e.to, e.weight);
      d.kout[e.from] += e.weight;
      d.kin[e.to] += e.weight;
      d.total += e.weight;
    }
    return d;
  }
};

// Symmetrized modularity matrix restricted to `group`, with the diagonal
// correction that makes s^T M s measure the gain of splitting the group.
std::vector<double> group_matrix(const WeightedDigraph& d,
                                 const std::vector<int>& group) {
  const int m = static_cast<int>(group.size());
  std::vector<double> M(static_cast<std::size_t>(m) * m, 0.0);
  auto at = [&](int i, int j) -> double& {
    return M[static_cast<std::size_t>(i) * m + j];
  };
  std::vector<int> pos(d.n, -1);
  for (int i = 0; i < m; ++i) pos[group[i]] = i;

  for (int i = 0; i < m; ++i) {
    int u = group[i];
    for (const auto& [v, w] : d.out[u]) {
      int j = pos[v];
      if (j < 0) continue;
      at(i, j) += w / 2.0;
      at(j, i) += w / 2.0;
    }
  }
  for (int i = 0; i < m; ++i) {
    int u = group[i];
    for (int j = 0; j < m; ++j) {
      int v = group[j];
      double null_ij = (d.kout[u] * d.kin[v] + d.kout[v] * d.kin[u]) /
                       (2.0 * d.total);
      at(i, j) -= null_ij;
    }
  }
  // diagonal correction: subtract row sums
  std::vector<double> rowsum(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) rowsum[i] += at(i, j);
  for (int i = 0; i < m; ++i) at(i, i) -= rowsum[i];
  return M;
}

// Leading (most positive) eigenpair by shifted power iteration.
bool leading_eigenvector(const std::vector<double>& M, int m, Rng& rng,
                         std::vector<double>& vec, double& value) {
  auto mul = [&](const std::vector<double>& x, std::vector<double>& y,
                 double shift) {
    for (int i = 0; i < m; ++i) {
      double s = shift * x[i];
      const double* row = &M[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  };
  auto normalize = [&](std::vector<double>& x) {
    double n2 = 0;
    for (double v : x) n2 += v * v;
    n2 = std::sqrt(n2);
    if (n2 < 1e-300) return false;
    for (double& v : x) v /= n2;
    return true;
  };
  auto rayleigh = [&](const std::vector<double>& x, double shift) {
    std::vector<double> y(m);
    mul(x, y, shift);
    double r = 0;
    for (int i = 0; i < m; ++i) r += x[i] * y[i];
    return r;
  };

  std::vector<double> x(m), y(m);
  for (auto& v : x) v = rng.next_double() - 0.5;
  if (!normalize(x)) return false;

  // phase 1: dominant-in-magnitude eigenvalue
  for (int it = 0; it < 200; ++it) {
    mul(x, y, 0.0);
    if (!normalize(y)) return false;
    x.swap(y);
  }
  double lam = rayleigh(x, 0.0);

  // phase 2: shift so the most positive eigenvalue dominates
  double shift = std::abs(lam) + 1e-9;
  for (auto& v : x) v = rng.next_double() - 0.5;
  if (!normalize(x)) return false;
  double prev = 0;
  for (int it = 0; it < 2000; ++it) {
    mul(x, y, shift);
    if (!normalize(y)) return false;
    double diff = 0;
    for (int i = 0; i < m; ++i) diff += std::abs(y[i] - x[i]);
    x.swap(y);
    double r = rayleigh(x, shift);
    if (diff < 1e-12 && std::abs(r - prev) < 1e-12) break;
    prev = r;
  }
  vec = x;
  value = rayleigh(x, shift) - shift;
  return true;
}

double split_gain(const std::vector<double>& M, int m,
                  const std::vector<int>& s, double total) {
  double q = 0;
  for (int i = 0; i < m; ++i) {
    const double* row = &M[static_cast<std::size_t>(i) * m];
    for (int j = 0; j < m; ++j) q += row[j] * s[i] * s[j];
  }
  return q / (2.0 * total);
}

// Kernighan-Lin sweep: move every vertex once in best-gain order, keep the
// best prefix, repeat while it improves.
void kl_refine(const std::vector<double>& M, int m, std::vector<int>& s) {
  auto column_dot = [&](const std::vector<int>& sv, std::vector<double>& y) {
    for (int i = 0; i < m; ++i) {
      double acc = 0;
      const double* row = &M[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) acc += row[j] * sv[j];
      y[i] = acc;
    }
  };

  for (int pass = 0; pass < 12; ++pass) {
    std::vector<double> y(m);
    column_dot(s, y);
    std::vector<char> moved(m, 0);
    std::vector<int> order;
    std::vector<double> cumulative;
    std::vector<int> work = s;
    double running = 0;

    for (int step = 0; step < m; ++step) {
      int best = -1;
      double best_gain = -1e300;
      for (int i = 0; i < m; ++i) {
        if (moved[i]) continue;
        double gain =
            -4.0 * work[i] * y[i] + 4.0 * M[static_cast<std::size_t>(i) * m + i];
        if (gain > best_gain) {
          best_gain = gain;
          best = i;
        }
      }
      moved[best] = 1;
      running += best_gain;
      order.push_back(best);
      cumulative.push_back(running);
      // y <- y - 2 * s_best * M[:, best]
      for (int i = 0; i < m; ++i)
        y[i] -= 2.0 * work[best] * M[static_cast<std::size_t>(i) * m + best];
      work[best] = -work[best];
    }

    int best_prefix = -1;
    double best_val = 1e-12;
    for (int i = 0; i < m; ++i) {
      if (cumulative[i] > best_val) {
        best_val = cumulative[i];
        best_prefix = i;
      }
    }
    if (best_prefix < 0) break;
    for (int i = 0; i <= best_prefix; ++i) s[order[i]] = -s[order[i]];
  }
}

void bisect(const WeightedDigraph& d, const std::vector<int>& group,
            std::uint64_t seed, int depth,
            std::vector<std::vector<int>>& out_groups) {
  const int m = static_cast<int>(group.size());
  if (m <= 1 || depth > 64) {
    out_groups.push_back(group);
    return;
  }
  auto M = group_matrix(d, group);
  Rng rng(derive_seed(seed, "spectral-split", fnv1a64(std::string_view(
                                                  reinterpret_cast<const char*>(
                                                      group.data()),
                                                  group.size() * sizeof(int)))));
  std::vector<double> vec;
  double value = 0;
  if (!leading_eigenvector(M, m, rng, vec, value) || value <= 1e-12) {
    out_groups.push_back(group);
    return;
  }
  std::vector<int> s(m);
  for (int i = 0; i < m; ++i) s[i] = vec[i] >= 0 ? 1 : -1;
  kl_refine(M, m, s);

  if (split_gain(M, m, s, d.total) <= 1e-12) {
    out_groups.push_back(group);
    return;
  }
  std::vector<int> left, right;
  for (int i = 0; i < m; ++i)
    (s[i] > 0 ? left : right).push_back(group[i]);
  if (left.empty() || right.empty()) {
    out_groups.push_back(group);
    return;
  }
  bisect(d, left, seed, depth + 1, out_groups);
  bisect(d, right, seed, depth + 1, out_groups);
}

std::vector<std::vector<int>> weak_components(const CsnGraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<int> comp(n, -1);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = count;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (comp[v] < 0) {
          comp[v] = count;
          stack.push_back(v);
        }
      }
    }
    ++count;
  }
  std::vector<std::vector<int>> groups(count);
  for (int i = 0; i < n; ++i) groups[comp[i]].push_back(i);
  return groups;
}

std::vector<int> renumber(const std::vector<std::vector<int>>& groups, int n) {
  // dense ids ordered by smallest member
  std::vector<std::vector<int>> sorted = groups;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<int> community(n, -1);
  for (int c = 0; c < static_cast<int>(sorted.size()); ++c)
    for (int u : sorted[c]) community[u] = c;
  return community;
}

CommunityAssignment agglomerative(const CsnGraph& g) {
  auto d = WeightedDigraph::from(g);
  const int n = d.n;
  std::vector<int> comm(n);
  std::iota(comm.begin(), comm.end(), 0);
  if (d.total <= 0) {
    CommunityAssignment a;
    a.community = comm;
    a.modularity = 0.0;
    return a;
  }
  // community aggregates
  std::vector<double> kout = d.kout, kin = d.kin;
  std::map<std::pair<int, int>, double> between;  // (min,max) -> w both ways
  for (int u = 0; u < n; ++u)
    for (const auto& [v, w] : d.out[u])
      between[{std::min(u, v), std::max(u, v)}] += w;

  std::vector<char> alive(n, 1);
  while (true) {
    double best_gain = 1e-12;
    std::pair<int, int> best{-1, -1};
    for (const auto& [key, w] : between) {
      auto [a, b] = key;
      if (!alive[a] || !alive[b] || a == b) continue;
      double gain =
          (w - (kout[a] * kin[b] + kout[b] * kin[a]) / d.total) / d.total;
      if (gain > best_gain) {
        best_gain = gain;
        best = key;
      }
    }
    if (best.first < 0) break;
    auto [a, b] = best;  // merge b into a
    alive[b] = 0;
    kout[a] += kout[b];
    kin[a] += kin[b];
    std::map<std::pair<int, int>, double> next;
    for (const auto& [key, w] : between) {
      auto [x, y] = key;
      if (x == b) x = a;
      if (y == b) y = a;
      if (x == y) continue;
      next[{std::min(x, y), std::max(x, y)}] += w;
    }
    between = std::move(next);
    for (int u = 0; u < n; ++u)
      if (comm[u] == b) comm[u] = a;
  }

  std::vector<std::vector<int>> groups_map(n);
  for (int u = 0; u < n; ++u) groups_map[comm[u]].push_back(u);
  std::vector<std::vector<int>> groups;
  for (auto& grp : groups_map)
    if (!grp.empty()) groups.push_back(grp);

  CommunityAssignment a;
  a.community = renumber(groups, n);
  a.modularity = directed_modularity(g, a.community);
  return a;
}

}  // namespace

double directed_modularity(const CsnGraph& g,
                           const std::vector<int>& community) {
  auto d = WeightedDigraph::from(g);
  if (d.total <= 0) return 0.0;
  double internal = 0;
  for (const auto& e : g.edges)
    if (community[e.from] == community[e.to]) internal += e.weight;
  int cc = 0;
  for (int c : community) cc = std::max(cc, c + 1);
  std::vector<double> ko(cc, 0.0), ki(cc, 0.0);
  for (int u = 0; u < d.n; ++u) {
    ko[community[u]] += d.kout[u];
    ki[community[u]] += d.kin[u];
  }
  double null_term = 0;
  for (int c = 0; c < cc; ++c) null_term += ko[c] * ki[c];
  return internal / d.total - null_term / (d.total * d.total);
}

CommunityAssignment detect_communities(const CsnGraph& g, std::uint64_t seed,
                                       CommunityMethod method) {
  const int n = static_cast<int>(g.node_count());
  if (n == 0) throw Error("detect_communities: empty graph");
  if (method == CommunityMethod::Agglomerative) return agglomerative(g);

  auto d = WeightedDigraph::from(g);
  std::vector<std::vector<int>> groups;
  for (const auto& comp : weak_components(g)) {
    if (comp.size() == 1 || d.total <= 0) {
      for (int u : comp) groups.push_back({u});
      continue;
    }
    bisect(d, comp, seed, 0, groups);
  }
  CommunityAssignment a;
  a.community = renumber(groups, n);
  a.modularity = directed_modularity(g, a.community);
  return a;
}

}  // namespace csnet
