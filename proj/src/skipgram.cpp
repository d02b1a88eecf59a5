#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csnet/skipgram.hpp"

namespace csnet {

void SkipgramConfig::validate() const {
  if (dim < 1) throw Error("skipgram config: dim must be >= 1");
  if (window < 1) throw Error("skipgram config: window must be >= 1");
  if (negatives < 0) throw Error("skipgram config: negatives must be >= 0");
  if (epochs < 1) throw Error("skipgram config: epochs must be >= 1");
  if (learning_rate <= 0)
    throw Error("skipgram config: learning_rate must be > 0");
}

DenseVector Embedding::vector_of(std::size_t i) const {
  return DenseVector(data.begin() + static_cast<std::ptrdiff_t>(i) * dim,
                     data.begin() + static_cast<std::ptrdiff_t>(i + 1) * dim);
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot(const double* a, const double* b, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double sgns_loss(const std::vector<double>& center,
                 const std::vector<double>& positive,
                 const std::vector<std::vector<double>>& negatives) {
  const int dim = static_cast<int>(center.size());
  double loss = -std::log(sigmoid(dot(center.data(), positive.data(), dim)));
  for (const auto& neg : negatives)
    loss -= std::log(sigmoid(-dot(center.data(), neg.data(), dim)));
  return loss;
}

double sgns_loss_and_grad(const std::vector<double>& center,
                          const std::vector<double>& positive,
                          const std::vector<std::vector<double>>& negatives,
                          std::vector<double>& grad) {
  const int dim = static_cast<int>(center.size());
  grad.assign(static_cast<std::size_t>(dim) * (2 + negatives.size()), 0.0);
  double* d_center = grad.data();
  double* d_pos = grad.data() + dim;

  double s_pos = sigmoid(dot(center.data(), positive.data(), dim));
  double loss = -std::log(s_pos);
  double g = s_pos - 1.0;  // d loss / d (v.u)
  for (int i = 0; i < dim; ++i) {
    d_center[i] += g * positive[i];
    d_pos[i] += g * center[i];
  }
  for (std::size_t nidx = 0; nidx < negatives.size(); ++nidx) {
    const auto& neg = negatives[nidx];
    double* d_neg = grad.data() + static_cast<std::size_t>(dim) * (2 + nidx);
    double s_neg = sigmoid(dot(center.data(), neg.data(), dim));
    loss -= std::log(1.0 - s_neg);
    for (int i = 0; i < dim; ++i) {
      d_center[i] += s_neg * neg[i];
      d_neg[i] += s_neg * center[i];
    }
  }
  return loss;
}

Embedding train_skipgram(const std::vector<Walk>& walks, std::size_t n_nodes,
                         const SkipgramConfig& cfg) {
  cfg.validate();
  if (n_nodes == 0) throw Error("train_skipgram: no nodes");

  // unigram^0.75 negative sampling distribution over walk occurrences
  std::vector<double> counts(n_nodes, 0.0);
  std::size_t trainable_walks = 0;
  for (const auto& w : walks) {
    for (int u : w.nodes) counts[static_cast<std::size_t>(u)] += 1.0;
    if (w.nodes.size() >= 2) ++trainable_walks;
  }
  if (trainable_walks == 0)
    throw Error("train_skipgram: no walk of length >= 2, nothing to train");
  std::vector<double> cumulative(n_nodes);
  double acc = 0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    acc += std::pow(counts[i], 0.75);
    cumulative[i] = acc;
  }

  Embedding emb;
  emb.dim = cfg.dim;
  emb.data.assign(n_nodes * cfg.dim, 0.0);
  emb.trained.assign(n_nodes, 0);
  std::vector<double> output(n_nodes * cfg.dim, 0.0);
  {
    Rng rng(derive_seed(cfg.seed, "skipgram-init"));
    for (auto& v : emb.data) v = (rng.next_double() - 0.5) / cfg.dim;
  }

  const double lr0 = cfg.learning_rate;
  const double lr_floor = lr0 * 1e-4;
  const std::size_t total_steps =
      static_cast<std::size_t>(cfg.epochs) * walks.size();
  int workers = cfg.workers > 0 ? cfg.workers : 1;

  auto sample_negative = [&](Rng& rng) {
    double r = rng.next_double() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<int>(it - cumulative.begin());
  };

  emb.epoch_loss.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0;
    std::size_t epoch_pairs = 0;

#pragma omp parallel num_threads(workers)
    {
      double local_loss = 0;
      std::size_t local_pairs = 0;
      std::vector<double> d_center(cfg.dim);

#pragma omp for schedule(static)
      for (std::size_t wi = 0; wi < walks.size(); ++wi) {
        const auto& walk = walks[wi].nodes;
        if (walk.size() < 2) continue;
        Rng rng(derive_seed(cfg.seed, "skipgram-train",
                            static_cast<std::uint64_t>(epoch), wi));
        const std::size_t step =
            static_cast<std::size_t>(epoch) * walks.size() + wi;
        const double lr = std::max(
            lr_floor, lr0 * (1.0 - static_cast<double>(step) /
                                       static_cast<double>(total_steps)));

        for (std::size_t pos = 0; pos < walk.size(); ++pos) {
          const int center = walk[pos];
          double* v = &emb.data[static_cast<std::size_t>(center) * cfg.dim];
          const std::size_t lo = pos >= static_cast<std::size_t>(cfg.window)
                                     ? pos - cfg.window
                                     : 0;
          const std::size_t hi = std::min(
              walk.size() - 1, pos + static_cast<std::size_t>(cfg.window));
          for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
            if (cpos == pos) continue;
            const int context = walk[cpos];
            std::fill(d_center.begin(), d_center.end(), 0.0);

            // positive example
            double* u = &output[static_cast<std::size_t>(context) * cfg.dim];
            double s = sigmoid(dot(v, u, cfg.dim));
            double pair_loss = -std::log(std::max(s, 1e-300));
            double gpos = (s - 1.0) * lr;
            for (int i = 0; i < cfg.dim; ++i) {
              d_center[i] += gpos * u[i];
              u[i] -= gpos * v[i];
            }
            // negatives
            for (int nn = 0; nn < cfg.negatives; ++nn) {
              int neg = sample_negative(rng);
              if (neg == context) continue;
              double* un = &output[static_cast<std::size_t>(neg) * cfg.dim];
              double sn = sigmoid(dot(v, un, cfg.dim));
              pair_loss -= std::log(std::max(1.0 - sn, 1e-300));
              double gneg = sn * lr;
              for (int i = 0; i < cfg.dim; ++i) {
                d_center[i] += gneg * un[i];
                un[i] -= gneg * v[i];
              }
            }
            for (int i = 0; i < cfg.dim; ++i) v[i] -= d_center[i];
            emb.trained[static_cast<std::size_t>(center)] = 1;
            emb.trained[static_cast<std::size_t>(context)] = 1;
            local_loss += pair_loss;
            ++local_pairs;
          }
        }
      }
#pragma omp atomic
      epoch_loss += local_loss;
#pragma omp atomic
      epoch_pairs += local_pairs;
    }
    emb.epoch_loss.push_back(
        epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
  return emb;
}

void save_embedding(const Embedding& e, const std::string& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < e.ids.size(); ++i) {
    out << e.ids[i];
    const double* r = e.row(i);
    for (int j = 0; j < e.dim; ++j) out << ' ' << fmt_double(r[j]);
    out << '\n';
  }
  write_file(path, out.str());
}

Embedding load_embedding(const std::string& path) {
  auto table = load_word_vectors(path);
  Embedding e;
  e.dim = static_cast<int>(table.dim);
  e.ids.resize(table.vectors.size());
  for (const auto& [id, idx] : table.index) e.ids[idx] = id;
  e.data.reserve(table.vectors.size() * table.dim);
  for (const auto& v : table.vectors)
    e.data.insert(e.data.end(), v.begin(), v.end());
  e.trained.assign(e.ids.size(), 1);
  return e;
}

}  // namespace csnet
