#pragma once

#include "t2v/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace t2v {

/// Walker/Vose alias table: O(1) draws from a fixed discrete distribution.
class AliasTable {
public:
  AliasTable() = default;
  /// Weights must be non-negative with a positive sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const noexcept { return prob_.size(); }
  bool empty() const noexcept { return prob_.empty(); }
  std::uint32_t sample(Rng& rng) const;
  /// Exact probability of outcome i implied by the table.
  double probability(std::size_t i) const;

private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace t2v
