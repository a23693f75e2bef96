#include "t2v/alias.hpp"

#include "t2v/error.hpp"

namespace t2v {

AliasTable::AliasTable(std::span<const double> weights) {
  const auto n = weights.size();
  if (n == 0) throw Error("alias table needs at least one weight");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("alias table weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("alias table weights sum to zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;  // round-off leftovers
  for (std::size_t i = 0; i < n; ++i)
    if (prob_[i] >= 1.0) alias_[i] = static_cast<std::uint32_t>(i);
}

std::uint32_t AliasTable::sample(Rng& rng) const {
  const auto i = static_cast<std::uint32_t>(uniform_index(rng, prob_.size()));
  return uniform01(rng) < prob_[i] ? i : alias_[i];
}

double AliasTable::probability(std::size_t i) const {
  const double n = static_cast<double>(prob_.size());
  double p = prob_[i] / n;
  for (std::size_t j = 0; j < prob_.size(); ++j)
    if (j != i && alias_[j] == i && prob_[j] < 1.0) p += (1.0 - prob_[j]) / n;
  return p;
}

}  // namespace t2v
