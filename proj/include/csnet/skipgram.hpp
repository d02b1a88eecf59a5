#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csnet/walks.hpp"

namespace csnet {

struct SkipgramConfig {
  int dim = 40;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // linear decay to lr/10000
  std::uint64_t seed = 0;
  int workers = 1;  // > 1 trains lock-free and is no longer deterministic

  void validate() const;
};

struct Embedding {
  std::vector<std::string> ids;
  int dim = 0;
  std::vector<double> data;            // ids.size() x dim, row-major
  std::vector<char> trained;           // 0 = never updated, kept at init
  std::vector<double> epoch_loss;      // mean pair loss per epoch
  std::string mode;                    // config echo
  int num_walks = 0;
  int walk_length = 0;

  DenseVector vector_of(std::size_t i) const;
  const double* row(std::size_t i) const { return &data[i * dim]; }
};

// Loss of one (center, positive context, negatives) example:
//   -log sigma(v.u) - sum_n log sigma(-v.u_n)
// Gradients are laid out as [d_center, d_positive, d_neg_0, ...].
double sgns_loss(const std::vector<double>& center,
                 const std::vector<double>& positive,
                 const std::vector<std::vector<double>>& negatives);
double sgns_loss_and_grad(const std::vector<double>& center,
                          const std::vector<double>& positive,
                          const std::vector<std::vector<double>>& negatives,
                          std::vector<double>& grad);

// Skipgram with negative sampling over walks; nodes are the vocabulary.
// Returns the input vector table. Deterministic when cfg.workers == 1.
Embedding train_skipgram(const std::vector<Walk>& walks, std::size_t n_nodes,
                         const SkipgramConfig& cfg);

void save_embedding(const Embedding& e, const std::string& path);
Embedding load_embedding(const std::string& path);

}  // namespace csnet
