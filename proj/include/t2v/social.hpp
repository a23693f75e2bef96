#pragma once

#include "t2v/embedding.hpp"
#include "t2v/ingest.hpp"

#include <string>
#include <vector>

namespace t2v::social {

struct SocialResult {
  EmbeddingTable channels;
  /// Channels whose surviving mass fell below `min_mass` (or to zero).
  std::vector<std::string> omitted;
  /// Channels that lost some mass to subreddits missing from S and were re-normalized.
  std::vector<std::string> renormalized;
};

/// Channel vectors as the W-weighted average of subreddit vectors, C = W x S.
///
/// Columns of W whose subreddit is absent from S lose their mass. A row that
/// keeps at least `min_mass` of its weight is re-normalized over the
/// surviving subreddits; otherwise the channel is omitted.
SocialResult embed_social(const ingest::SharingMatrix& w, const EmbeddingTable& subreddits, double min_mass = 0.5);

}  // namespace t2v::social
