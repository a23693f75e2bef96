#pragma once

#include "t2v/embedding.hpp"
#include "t2v/forest.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace t2v::dims {

struct SeedPair {
  std::string low;
  std::string high;
};

struct DimensionSpec {
  std::string name;
  std::vector<SeedPair> seed_pairs;
  Vector vector;  // unit norm
};

/// Seeds file: "dimension_name,low_subreddit,high_subreddit" per line,
/// grouped by name in order of first appearance.
std::vector<std::pair<std::string, std::vector<SeedPair>>> read_seed_pairs(std::istream& in);

/// Unit-normalized mean over pairs of (S[high] - S[low]).
DimensionSpec build_dimension(const std::string& name, const EmbeddingTable& subreddits,
                              const std::vector<SeedPair>& pairs);

struct DimensionScores {
  std::string dimension;
  std::map<std::string, double> scores;
  bool standardized = false;
};

struct ProjectResult {
  DimensionScores scores;
  std::vector<std::string> omitted;  // zero vectors
};

/// Cosine similarity between each channel vector and the dimension direction.
ProjectResult project(const EmbeddingTable& channels, const DimensionSpec& dim);

/// z-scores with population standard deviation. Idempotent.
DimensionScores standardize(const DimensionScores& s);

/// "# dimension=<name> standardized=<true|false>" header, then "channel_id,score".
void write_scores(std::ostream& out, const DimensionScores& s);
DimensionScores read_scores(std::istream& in);

struct TransferResult {
  DimensionScores scores;
  std::optional<double> oob_r2;
  std::size_t training_channels = 0;
};

inline constexpr std::size_t kMinTransferOverlap = 100;

/// Fits a regression forest from target-embedding vectors to the known
/// scores of overlapping channels and predicts every channel of `target`.
/// With `out_of_bag`, training channels get their out-of-bag prediction
/// instead, so downstream correlations are not inflated by memorization.
TransferResult transfer_dimension(const EmbeddingTable& target, const DimensionScores& train_scores,
                                  const forest::ForestConfig& cfg, std::size_t min_overlap = kMinTransferOverlap,
                                  bool out_of_bag = false);

/// Interval index k for edges e: e[k] < value <= e[k+1]; nullopt outside (e.front(), e.back()].
std::optional<std::size_t> bin_of(double value, const std::vector<double>& edges);

struct BinSample {
  std::size_t dim_bin = 0;
  std::size_t ness_bin = 0;
  std::vector<std::string> channels;
  std::size_t population = 0;
};

struct BinSampling {
  std::vector<BinSample> bins;  // dim-major order, one entry per bin (possibly empty)
  std::vector<std::string> excluded;  // outside the outermost edges or lacking a ness score
  std::vector<std::string> sampled() const;
};

inline const std::vector<double> kDefaultDimEdges{-5, -1.25, -0.5, 0.5, 1.25, 5};
inline const std::vector<double> kDefaultNessEdges{-5, 0, 5};

/// Stratified sampling over the dimension x ness interval grid; `per_bin`
/// channels are drawn uniformly without replacement from every bin.
BinSampling sample_bins(const DimensionScores& scores, const DimensionScores& ness, const std::vector<double>& dim_edges,
                        const std::vector<double>& ness_edges, std::size_t per_bin, std::uint64_t seed);

}  // namespace t2v::dims
