#include "t2v/social.hpp"

#include "t2v/log.hpp"

namespace t2v::social {

SocialResult embed_social(const ingest::SharingMatrix& w, const EmbeddingTable& subreddits, double min_mass) {
  SocialResult result{EmbeddingTable(subreddits.dim(), Provenance::soc), {}, {}};
  const auto d = subreddits.dim();

  std::vector<const Vector*> column_vectors(w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) column_vectors[j] = subreddits.find(w.subreddits[j]);

  for (std::size_t i = 0; i < w.rows(); ++i) {
    double total = 0, kept = 0;
    Vector acc(d, 0.0);
    for (const auto& e : w.row(i)) {
      total += e.weight;
      const auto* s = column_vectors[e.col];
      if (!s) continue;
      kept += e.weight;
      for (std::size_t k = 0; k < d; ++k) acc[k] += e.weight * (*s)[k];
    }
    if (kept <= 0.0 || kept < min_mass * total) {
      result.omitted.push_back(w.channels[i]);
      continue;
    }
    if (kept != total) {
      for (auto& x : acc) x /= kept;
      result.renormalized.push_back(w.channels[i]);
    }
    result.channels.set(w.channels[i], std::move(acc));
  }
  if (!result.omitted.empty())
    log::warn("embed_social", "{} channels omitted: too little mass on subreddits present in S", result.omitted.size());
  if (!result.renormalized.empty())
    log::info("embed_social", "{} channels re-normalized over available subreddits", result.renormalized.size());
  return result;
}

}  // namespace t2v::social
