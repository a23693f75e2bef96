#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace t2v::ranking {

/// "winner appeals more than loser along `dimension`", as judged by `rater`.
struct ComparisonRecord {
  std::string dimension;
  std::string winner;
  std::string loser;
  std::string rater;
};

/// Comma-separated dimension, winner, loser, rater_id. Lines starting with '#' are comments.
std::vector<ComparisonRecord> read_comparisons(std::istream& in);
void write_comparisons(std::ostream& out, std::span<const ComparisonRecord> comparisons);

struct PLOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  /// Virtual wins (and losses) of every item against a fixed anchor of score 1.
  double prior = 0.1;
};

struct PLScores {
  /// Positive scores, normalized so that the log-scores sum to zero.
  std::map<std::string, double> scores;
  double log_likelihood = 0;  // of the observed comparisons only
  double objective = 0;       // log_likelihood plus the prior pseudo-comparisons
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective after every MM iteration (index 0 = initial point).
  std::vector<double> objective_trace;
};

/// Plackett-Luce (Bradley-Terry for pairs) scores by minorization-maximization:
///   s_i <- W_i / sum_j N_ij / (s_i + s_j)
/// iterated until the largest change of a log-score falls below tol.
/// With prior = 0 the directed win graph must be strongly connected.
PLScores fit_plackett_luce(std::span<const ComparisonRecord> comparisons, const PLOptions& options = {});

/// Pr(a beats b) = s(a) / (s(a) + s(b)).
double win_probability(double score_a, double score_b);

/// Stuart-Kendall tau-c: 2m(P - Q) / (n^2 (m - 1)), m = min(#distinct x,
/// #distinct y). O(n log n). Throws when n < 2 or m == 1.
double tau_c(std::span<const double> x, std::span<const double> y);

/// P - Q over all unordered pairs, O(n log n).
long long concordance_difference(std::span<const double> x, std::span<const double> y);

/// Ordered political labels, extreme-left = 1 ... extreme-right = 7.
int partisan_label_rank(std::string_view label);

/// tau-c between channel scores and their label ranks, over channels present in both.
double label_correlation(const std::map<std::string, double>& scores, const std::map<std::string, std::string>& labels);

/// Labels file: channel_id, label (comma-separated).
std::map<std::string, std::string> read_labels(std::istream& in);

struct ZTest {
  double z = 0;
  double p_value = 1;
  bool significant = false;
};

/// Pooled two-proportion z-test, two-sided at `alpha`.
ZTest two_proportion_ztest(std::uint64_t hits1, std::uint64_t n1, std::uint64_t hits2, std::uint64_t n2,
                           double alpha = 0.05);

struct BootstrapInterval {
  double estimate = 0;
  double lower = 0;
  double upper = 0;
};

/// Percentile bootstrap interval for tau_c(a, y) - tau_c(b, y), resampling
/// observation indices jointly. Resamples where either tau is undefined are skipped.
BootstrapInterval tau_c_difference_ci(std::span<const double> a, std::span<const double> b, std::span<const double> y,
                                      std::size_t reps, std::uint64_t seed, double level = 0.95);

}  // namespace t2v::ranking
