#pragma once

#include "t2v/alias.hpp"
#include "t2v/embedding.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace t2v::rec {

struct SgnsConfig {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  /// Floor of the linear decay, as a fraction of learning_rate.
  double min_learning_rate_fraction = 1e-4;
  std::uint64_t seed = 0;
  /// 1 = deterministic. More workers update shared vectors without locks and
  /// are reproducible only up to convergence.
  std::size_t threads = 1;

  void validate() const;
};

/// Token ids sorted lexicographically with their corpus frequencies.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& walks);

/// Draws negatives proportional to count^0.75.
class NegativeSampler {
public:
  explicit NegativeSampler(std::span<const std::uint64_t> counts, double power = 0.75);
  std::uint32_t sample(Rng& rng) const { return static_cast<std::uint32_t>(table_.sample(rng)); }
  double probability(std::size_t token) const { return table_.probability(token); }

private:
  AliasTable table_;
};

/// Per-pair objective: -log s(u.v) - sum_k log s(-u.n_k), s the logistic function.
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::vector<double>> negatives);

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

/// Analytic gradient of sgns_pair_loss with respect to every argument.
SgnsGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                                std::span<const std::vector<double>> negatives);

/// One SGD step on a (center, context, negatives) configuration, exactly the
/// update the trainer performs: output vectors move first using the current
/// center, the center moves by the accumulated gradient. Returns the pair loss
/// before the step.
double sgns_apply_step(std::span<double> center, std::span<double> context, std::span<std::vector<double>> negatives,
                       double learning_rate);

struct SgnsResult {
  EmbeddingTable vectors;
  /// Mean pair loss of each epoch.
  std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling over walk sequences. Output provenance is rec.
SgnsResult train_sgns(const std::vector<std::vector<std::string>>& walks, const SgnsConfig& cfg);

}  // namespace t2v::rec
