#pragma once

#include "t2v/embedding.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace t2v::forest {

enum class FeatureRule { sqrt, all, fixed };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  FeatureRule features = FeatureRule::sqrt;
  std::size_t fixed_features = 1;  // used when features == fixed
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  std::size_t features_per_split(std::size_t n_features) const;
};

enum class Task { classification, regression };

/// CART node. Internal nodes send x[feature] <= threshold to `left`.
struct Node {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  /// Leaf payload: class distribution (classification) or {mean} (regression).
  std::vector<double> value;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root
  const Node& leaf_for(std::span<const double> x) const;
  std::size_t depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0;
  /// Weighted child impurity (Gini x count, or sum of squared errors).
  double child_impurity = 0;
};

/// Best axis-aligned split of `rows` (indices into X, duplicates allowed)
/// over `features`. Thresholds are midpoints of consecutive distinct values;
/// ties go to the lowest feature index, then the lowest threshold.
std::optional<Split> best_split(Task task, std::span<const Vector> X, std::span<const double> y,
                                std::size_t n_classes, std::span<const std::uint32_t> rows,
                                std::span<const std::size_t> features, std::size_t min_leaf);

class Forest {
public:
  static Forest fit_classifier(std::span<const Vector> X, std::span<const int> y, const ForestConfig& cfg);
  /// `oob_predictions`, when given, receives each sample's mean over the trees
  /// that did not see it (nullopt if every tree did).
  static Forest fit_regressor(std::span<const Vector> X, std::span<const double> y, const ForestConfig& cfg,
                              std::vector<std::optional<double>>* oob_predictions = nullptr);

  Task task() const noexcept { return task_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  /// Mean of the trees' leaf class distributions.
  std::vector<double> predict_proba(std::span<const double> x) const;
  /// Arg-max class; ties go to the lowest label.
  int predict(std::span<const double> x) const;
  /// Mean of the trees' leaf means.
  double predict_value(std::span<const double> x) const;

  /// Out-of-bag accuracy (classification) or R^2 (regression); nullopt
  /// without bootstrap or when no sample was ever out of bag.
  std::optional<double> oob_score() const noexcept { return oob_score_; }

  void save(std::ostream& out) const;
  static Forest load(std::istream& in);

  friend bool operator==(const Forest&, const Forest&) = default;

private:
  Task task_ = Task::classification;
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<Tree> trees_;
  std::optional<double> oob_score_;
};

}  // namespace t2v::forest
