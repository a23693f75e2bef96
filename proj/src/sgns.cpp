#include "t2v/sgns.hpp"

#include "t2v/error.hpp"
#include "t2v/log.hpp"
#include "t2v/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace t2v::rec {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log s(x), stable for large |x|.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// Memory access policy for the training kernel. The shared variant uses
// relaxed atomic loads/stores so concurrent workers race on values only.
struct PlainAccess {
  static double load(const double& x) { return x; }
  static void store(double& x, double v) { x = v; }
};

struct SharedAccess {
  static double load(const double& x) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  }
  static void store(double& x, double v) { std::atomic_ref<double>(x).store(v, std::memory_order_relaxed); }
};

// One positive or negative target against the center; accumulates the center
// gradient step into `center_step` and moves the output vector.
template <typename Access>
double update_target(const double* center, double* out, std::size_t d, double label, double lr, double* center_step) {
  double f = 0;
  for (std::size_t k = 0; k < d; ++k) f += Access::load(center[k]) * Access::load(out[k]);
  const double g = (label - sigmoid(f)) * lr;
  for (std::size_t k = 0; k < d; ++k) {
    const double o = Access::load(out[k]);
    center_step[k] += g * o;
    Access::store(out[k], o + g * Access::load(center[k]));
  }
  return label > 0 ? -log_sigmoid(f) : -log_sigmoid(-f);
}

struct Model {
  std::size_t d;
  std::vector<double> input;   // center vectors, vocab x d
  std::vector<double> output;  // context vectors, vocab x d
  double* in(std::uint32_t i) { return input.data() + static_cast<std::size_t>(i) * d; }
  double* out(std::uint32_t i) { return output.data() + static_cast<std::size_t>(i) * d; }
};

struct Progress {
  std::atomic<std::uint64_t> processed{0};
  std::uint64_t total = 1;
};

template <typename Access>
void train_shard(Model& model, const std::vector<std::vector<std::uint32_t>>& corpus, std::size_t begin,
                 std::size_t end, const SgnsConfig& cfg, const NegativeSampler& sampler, Rng& rng, Progress& progress,
                 double& loss_sum, std::uint64_t& pair_count) {
  const auto d = model.d;
  std::vector<double> step(d);
  const double floor = cfg.learning_rate * cfg.min_learning_rate_fraction;
  for (std::size_t w = begin; w < end; ++w) {
    const auto& walk = corpus[w];
    const auto done = progress.processed.fetch_add(walk.size(), std::memory_order_relaxed);
    const double lr = std::max(floor, cfg.learning_rate * (1.0 - static_cast<double>(done) / static_cast<double>(progress.total)));
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const auto reduced = uniform_index(rng, cfg.window);
      const auto span = cfg.window - reduced;
      const auto lo = i >= span ? i - span : 0;
      const auto hi = std::min(walk.size() - 1, i + span);
      double* center = model.in(walk[i]);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const auto context = walk[j];
        std::fill(step.begin(), step.end(), 0.0);
        double loss = update_target<Access>(center, model.out(context), d, 1.0, lr, step.data());
        for (std::size_t n = 0; n < cfg.negatives; ++n) {
          const auto neg = sampler.sample(rng);
          if (neg == context) continue;
          loss += update_target<Access>(center, model.out(neg), d, 0.0, lr, step.data());
        }
        for (std::size_t k = 0; k < d; ++k) Access::store(center[k], Access::load(center[k]) + step[k]);
        loss_sum += loss;
        ++pair_count;
      }
    }
  }
}

}  // namespace

void SgnsConfig::validate() const {
  if (dim < 2) throw Error("SGNS dimension must be at least 2");
  if (negatives < 1) throw Error("SGNS needs at least one negative sample");
  if (window < 1) throw Error("SGNS window must be at least 1");
  if (epochs < 1) throw Error("SGNS needs at least one epoch");
  if (!(learning_rate > 0)) throw Error("SGNS learning rate must be positive");
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& walks) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& w : walks)
    for (const auto& t : w) ++counts[t];
  Vocabulary v;
  for (auto& [tok, c] : counts) {
    v.tokens.push_back(tok);
    v.counts.push_back(c);
  }
  return v;
}

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, double power) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = std::pow(static_cast<double>(counts[i]), power);
  table_ = AliasTable(w);
}

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::vector<double>> negatives) {
  double loss = -log_sigmoid(dot(center, context));
  for (const auto& n : negatives) loss -= log_sigmoid(-dot(center, n));
  return loss;
}

SgnsGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                                std::span<const std::vector<double>> negatives) {
  const auto d = center.size();
  SgnsGradient g{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), {}};
  // d/dx [-log s(x)] = s(x) - 1 ; d/dx [-log s(-x)] = s(x)
  const double cpos = sigmoid(dot(center, context)) - 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    g.center[k] += cpos * context[k];
    g.context[k] = cpos * center[k];
  }
  for (const auto& n : negatives) {
    const double cneg = sigmoid(dot(center, n));
    auto& gn = g.negatives.emplace_back(d);
    for (std::size_t k = 0; k < d; ++k) {
      g.center[k] += cneg * n[k];
      gn[k] = cneg * center[k];
    }
  }
  return g;
}

double sgns_apply_step(std::span<double> center, std::span<double> context, std::span<std::vector<double>> negatives,
                       double learning_rate) {
  const auto d = center.size();
  std::vector<double> step(d, 0.0);
  double loss = update_target<PlainAccess>(center.data(), context.data(), d, 1.0, learning_rate, step.data());
  for (auto& n : negatives)
    loss += update_target<PlainAccess>(center.data(), n.data(), d, 0.0, learning_rate, step.data());
  for (std::size_t k = 0; k < d; ++k) center[k] += step[k];
  return loss;
}

SgnsResult train_sgns(const std::vector<std::vector<std::string>>& walks, const SgnsConfig& cfg) {
  cfg.validate();
  if (walks.empty()) throw Error("SGNS needs at least one walk");
  const auto vocab = build_vocabulary(walks);
  if (vocab.tokens.size() < cfg.negatives + 1)
    throw Error(fmt::format("vocabulary of {} tokens is smaller than negatives + 1 = {}", vocab.tokens.size(),
                            cfg.negatives + 1));

  std::map<std::string_view, std::uint32_t> index;
  for (std::uint32_t i = 0; i < vocab.tokens.size(); ++i) index.emplace(vocab.tokens[i], i);
  std::vector<std::vector<std::uint32_t>> corpus;
  corpus.reserve(walks.size());
  std::uint64_t tokens = 0;
  for (const auto& w : walks) {
    auto& c = corpus.emplace_back();
    c.reserve(w.size());
    for (const auto& t : w) c.push_back(index.at(t));
    tokens += w.size();
  }

  const auto d = cfg.dim;
  const auto v = vocab.tokens.size();
  Model model{d, std::vector<double>(v * d), std::vector<double>(v * d, 0.0)};
  {
    auto rng = make_rng(derive_seed(cfg.seed, "sgns-init"));
    for (auto& x : model.input) x = (uniform01(rng) - 0.5) / static_cast<double>(d);
  }
  const NegativeSampler sampler(vocab.counts);

  Progress progress;
  progress.total = tokens * cfg.epochs + 1;
  SgnsResult result{EmbeddingTable(d, Provenance::rec), {}};
  const auto threads = std::max<std::size_t>(1, std::min(cfg.threads, corpus.size()));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_seed = derive_seed(derive_seed(cfg.seed, "sgns-epoch"), epoch);
    double loss = 0;
    std::uint64_t pairs = 0;
    if (threads == 1) {
      auto rng = make_rng(epoch_seed);
      train_shard<PlainAccess>(model, corpus, 0, corpus.size(), cfg, sampler, rng, progress, loss, pairs);
    } else {
      std::vector<double> losses(threads, 0.0);
      std::vector<std::uint64_t> counts(threads, 0);
      const auto chunk = (corpus.size() + threads - 1) / threads;
      {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
          const auto b = t * chunk, e = std::min(corpus.size(), b + chunk);
          if (b >= e) continue;
          pool.emplace_back([&, t, b, e] {
            auto rng = make_rng(derive_seed(epoch_seed, t));
            train_shard<SharedAccess>(model, corpus, b, e, cfg, sampler, rng, progress, losses[t], counts[t]);
          });
        }
      }
      for (std::size_t t = 0; t < threads; ++t) {
        loss += losses[t];
        pairs += counts[t];
      }
    }
    result.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
    log::debug("embed_rec", "epoch {} mean pair loss {:.6f}", epoch + 1, result.epoch_loss.back());
  }

  for (std::uint32_t i = 0; i < v; ++i)
    result.vectors.set(vocab.tokens[i], Vector(model.in(i), model.in(i) + d));
  return result;
}

}  // namespace t2v::rec
