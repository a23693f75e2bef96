#include "t2v/walks.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

namespace t2v::rec {

void WalkConfig::validate() const {
  if (!(p > 0) || !(q > 0)) throw Error("node2vec p and q must be positive");
  if (walk_length < 2) throw Error("walk_length must be at least 2");
  if (walks_per_node < 1) throw Error("walks_per_node must be at least 1");
}

Node2VecSampler::Node2VecSampler(const RecGraph& g, double p, double q, std::size_t cap)
    : g_(g), inv_p_(1.0 / p), inv_q_(1.0 / q), max_bias_(std::max({1.0 / p, 1.0, 1.0 / q})) {
  if (!(p > 0) || !(q > 0)) throw Error("node2vec p and q must be positive");
  const auto n = static_cast<std::uint32_t>(g.num_nodes());
  node_tables_.resize(n);
  std::vector<double> w;
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto nb = g.neighbors(u);
    if (nb.empty()) continue;
    w.clear();
    for (const auto& x : nb) w.push_back(x.weight);
    node_tables_[u] = AliasTable(w);
  }
  // With p = q = 1 every bias is 1 and the first-order tables are exact.
  if (inv_p_ == 1.0 && inv_q_ == 1.0) return;
  edge_tables_.resize(g.num_slots());
  for (std::uint32_t prev = 0; prev < n; ++prev) {
    const auto nb = g.neighbors(prev);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const auto cur = nb[k].node;
      if (g.degree(prev) * g.degree(cur) > cap) continue;
      w.clear();
      for (const auto& x : g.neighbors(cur)) w.push_back(x.weight * bias(prev, x.node));
      edge_tables_[g.slot_base(prev) + k] = AliasTable(w);
      ++num_edge_tables_;
    }
  }
}

double Node2VecSampler::bias(std::uint32_t prev, std::uint32_t x) const {
  if (x == prev) return inv_p_;
  if (g_.slot(prev, x)) return 1.0;
  return inv_q_;
}

std::optional<std::uint32_t> Node2VecSampler::first(std::uint32_t cur, Rng& rng) const {
  if (node_tables_[cur].empty()) return std::nullopt;
  return g_.neighbors(cur)[node_tables_[cur].sample(rng)].node;
}

std::uint32_t Node2VecSampler::next(std::uint32_t prev, std::uint32_t cur, Rng& rng) const {
  if (edge_tables_.empty()) return g_.neighbors(cur)[node_tables_[cur].sample(rng)].node;
  const auto k = g_.slot(prev, cur);
  if (!k) throw Error("walk step from a non-adjacent previous node");
  const auto& table = edge_tables_[g_.slot_base(prev) + *k];
  if (!table.empty()) return g_.neighbors(cur)[table.sample(rng)].node;
  return next_by_rejection(prev, cur, rng);
}

std::uint32_t Node2VecSampler::next_by_rejection(std::uint32_t prev, std::uint32_t cur, Rng& rng) const {
  const auto nb = g_.neighbors(cur);
  while (true) {
    const auto x = nb[node_tables_[cur].sample(rng)].node;
    if (uniform01(rng) * max_bias_ < bias(prev, x)) return x;
  }
}

std::vector<double> Node2VecSampler::transition_probabilities(std::uint32_t prev, std::uint32_t cur) const {
  const auto nb = g_.neighbors(cur);
  std::vector<double> probs(nb.size());
  double total = 0;
  for (std::size_t k = 0; k < nb.size(); ++k) total += probs[k] = nb[k].weight * bias(prev, nb[k].node);
  for (auto& x : probs) x /= total;
  return probs;
}

std::vector<Walk> generate_walks(const RecGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.empty()) throw Error("cannot generate walks on an empty graph");
  const Node2VecSampler sampler(g, cfg.p, cfg.q, cfg.alias_degree_product_cap);
  const auto n = static_cast<std::uint32_t>(g.num_nodes());

  std::vector<std::uint32_t> starts;
  starts.reserve(static_cast<std::size_t>(n) * cfg.walks_per_node);
  for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto rng = make_rng(derive_seed(derive_seed(cfg.seed, "walk-order"), r));
    shuffle(order, rng);
    starts.insert(starts.end(), order.begin(), order.end());
  }

  std::vector<Walk> walks(starts.size());
  const auto walk_seed = derive_seed(cfg.seed, "walk");
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = make_rng(derive_seed(walk_seed, i));
      auto& walk = walks[i];
      walk.reserve(cfg.walk_length);
      walk.push_back(starts[i]);
      const auto step = sampler.first(starts[i], rng);
      if (!step) continue;
      walk.push_back(*step);
      while (walk.size() < cfg.walk_length)
        walk.push_back(sampler.next(walk[walk.size() - 2], walk.back(), rng));
    }
  };

  const auto threads = std::max<std::size_t>(1, std::min(cfg.threads, walks.size()));
  if (threads == 1) {
    run(0, walks.size());
  } else {
    std::vector<std::jthread> pool;
    const auto chunk = (walks.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const auto b = t * chunk, e = std::min(walks.size(), b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
  }
  return walks;
}

void write_walks(std::ostream& out, const RecGraph& g, const std::vector<Walk>& walks) {
  for (const auto& w : walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out << ' ';
      out << g.id(w[i]);
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_walks(std::istream& in) {
  std::vector<std::vector<std::string>> walks;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = io::split_ws(line);
    if (f.empty()) continue;
    walks.emplace_back(f.begin(), f.end());
  }
  return walks;
}

std::vector<std::vector<std::string>> walks_to_ids(const RecGraph& g, const std::vector<Walk>& walks) {
  std::vector<std::vector<std::string>> out;
  out.reserve(walks.size());
  for (const auto& w : walks) {
    auto& ids = out.emplace_back();
    ids.reserve(w.size());
    for (auto v : w) ids.push_back(g.id(v));
  }
  return out;
}

}  // namespace t2v::rec
