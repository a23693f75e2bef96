#pragma once

#include "t2v/alias.hpp"
#include "t2v/recgraph.hpp"
#include "t2v/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace t2v::rec {

struct WalkConfig {
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::size_t walk_length = 80;
  std::size_t walks_per_node = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Per-edge alias tables are built for (prev, cur) only when
  /// deg(prev) * deg(cur) is at most this; larger pairs use rejection sampling.
  std::size_t alias_degree_product_cap = 1u << 20;

  void validate() const;
};

using Walk = std::vector<std::uint32_t>;

/// Second-order biased transition sampler. The unnormalized probability of
/// moving cur -> x after prev is w(cur, x) * a(prev, x), with a = 1/p when
/// x == prev, 1 when x is adjacent to prev and 1/q otherwise.
class Node2VecSampler {
public:
  Node2VecSampler(const RecGraph& g, double p, double q, std::size_t alias_degree_product_cap = 1u << 20);

  /// First step: weight-proportional. nullopt for isolated nodes.
  std::optional<std::uint32_t> first(std::uint32_t cur, Rng& rng) const;
  std::uint32_t next(std::uint32_t prev, std::uint32_t cur, Rng& rng) const;

  /// Exact normalized distribution over neighbours of `cur`, aligned with
  /// graph.neighbors(cur).
  std::vector<double> transition_probabilities(std::uint32_t prev, std::uint32_t cur) const;

  std::size_t num_edge_tables() const noexcept { return num_edge_tables_; }

private:
  double bias(std::uint32_t prev, std::uint32_t x) const;
  std::uint32_t next_by_rejection(std::uint32_t prev, std::uint32_t cur, Rng& rng) const;

  const RecGraph& g_;
  double inv_p_, inv_q_, max_bias_;
  std::vector<AliasTable> node_tables_;
  // Indexed by the directed slot (prev -> cur); empty tables mean "use rejection".
  std::vector<AliasTable> edge_tables_;
  std::size_t num_edge_tables_ = 0;
};

/// walks_per_node rounds; each round visits every node once in a seeded
/// shuffled order. Walk (round r, node v) draws from its own derived seed,
/// so the output does not depend on the thread count.
std::vector<Walk> generate_walks(const RecGraph& g, const WalkConfig& cfg);

/// One walk per line, space-separated node ids.
void write_walks(std::ostream& out, const RecGraph& g, const std::vector<Walk>& walks);
std::vector<std::vector<std::string>> read_walks(std::istream& in);
std::vector<std::vector<std::string>> walks_to_ids(const RecGraph& g, const std::vector<Walk>& walks);

}  // namespace t2v::rec
