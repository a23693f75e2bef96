#pragma once

#include "t2v/embedding.hpp"
#include "t2v/forest.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace t2v::eval {

// ---------------------------------------------------------------------------
// Category prediction

struct CategoryConfig {
  std::size_t reps = 100;
  std::size_t per_class = 100;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  forest::ForestConfig forest;
};

struct CategoryResult {
  double mean_f1 = 0;
  std::vector<double> f1;  // one per repetition
  /// Pooled test-split counts, usable with the two-proportion z-test.
  std::uint64_t correct = 0;
  std::uint64_t tested = 0;
};

/// F1 of the positive class; 0 when there are no predicted or no actual positives.
double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Per repetition: draw per_class channels of `target` and per_class from all
/// other categories, split train/test, fit a forest classifier and score F1
/// on the test split.
CategoryResult eval_category(const EmbeddingTable& channels, const std::map<std::string, std::string>& categories,
                             const std::string& target, const CategoryConfig& cfg);

// ---------------------------------------------------------------------------
// Odd-channel-out

struct Triplet {
  std::string id;
  std::string a, b, c;
  std::string source;  // embedding the triplet was drawn from
  std::size_t k = 0;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Neighbours of `anchor` in increasing cosine distance, ties by id, anchor excluded.
std::vector<std::string> ranked_neighbors(const EmbeddingTable& table, const std::string& anchor);

struct TripletSample {
  std::vector<Triplet> triplets;
  std::size_t attempts = 0;
  bool complete = false;
};

/// A uniform (without replacement), B = A's nearest neighbour, C = A's k-th
/// nearest; draws with dist(a,b) >= dist(b,c) or non-distinct ids are
/// rejected. Gives up after 100 * n attempts.
TripletSample sample_triplets(const EmbeddingTable& table, std::size_t k, std::size_t n, std::uint64_t seed,
                              const std::string& source = "external");

/// The channel outside the closest pair under cosine distance. Pairs at equal
/// distance resolve to the lexicographically smallest odd id.
std::string predict_odd(const Triplet& t, const EmbeddingTable& table);

struct TripletJudgment {
  Triplet triplet;
  std::map<std::string, std::size_t> votes;  // over 5 raters
  /// Channel with most votes; ties go to the smallest id.
  std::string modal() const;
  std::size_t modal_count() const;
};

struct Agreement {
  std::optional<double> rate;  // nullopt for an empty stratum
  std::size_t n = 0;
  std::size_t hits = 0;
};

Agreement agreement_table(const std::vector<TripletJudgment>& judgments, const EmbeddingTable& table,
                          std::size_t min_workers);

/// Triplets file: "id,a,b,c,source,k".
std::vector<Triplet> read_triplets(std::istream& in);
void write_triplets(std::ostream& out, const std::vector<Triplet>& triplets);

inline constexpr std::size_t kRatersPerTriplet = 5;

/// Judgments file: "triplet_id,choice1,...,choice5", joined against triplets by id.
std::vector<TripletJudgment> read_judgments(std::istream& in, const std::vector<Triplet>& triplets);
void write_judgments(std::ostream& out, const std::vector<TripletJudgment>& judgments);

}  // namespace t2v::eval
