#include "t2v/forest.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace t2v::forest {

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error("forest needs at least one tree");
  if (min_leaf < 1) throw Error("min_leaf must be at least 1");
  if (features == FeatureRule::fixed && fixed_features < 1) throw Error("fixed features_per_split must be at least 1");
}

std::size_t ForestConfig::features_per_split(std::size_t n) const {
  switch (features) {
    case FeatureRule::all: return n;
    case FeatureRule::fixed: return std::min(n, fixed_features);
    case FeatureRule::sqrt: return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  }
  return n;
}

const Node& Tree::leaf_for(std::span<const double> x) const {
  const Node* node = &nodes[0];
  while (!node->is_leaf()) node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
  return *node;
}

std::size_t Tree::depth() const {
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return best;
}

namespace {

// Score to maximize: sum over children of (sum_k c_k^2)/n for Gini, or
// (sum y)^2/n for variance. Minimizing child impurity is equivalent.
struct SideStats {
  std::vector<double> counts;  // classification
  double n = 0, sum = 0, sumsq = 0;
};

double gini_score(const std::vector<double>& counts, double n) {
  double s = 0;
  for (double c : counts) s += c * c;
  return s / n;
}

double node_impurity(Task task, std::span<const double> y, std::size_t n_classes, std::span<const std::uint32_t> rows) {
  const double n = static_cast<double>(rows.size());
  if (task == Task::classification) {
    std::vector<double> counts(n_classes, 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(y[r])] += 1;
    return n - gini_score(counts, n);
  }
  double sum = 0, sumsq = 0;
  for (auto r : rows) {
    sum += y[r];
    sumsq += y[r] * y[r];
  }
  return std::max(0.0, sumsq - sum * sum / n);
}

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2;
  return m < b ? m : a;
}

}  // namespace

std::optional<Split> best_split(Task task, std::span<const Vector> X, std::span<const double> y,
                                std::size_t n_classes, std::span<const std::uint32_t> rows,
                                std::span<const std::size_t> features, std::size_t min_leaf) {
  const auto n = rows.size();
  if (n < 2 * min_leaf) return std::nullopt;

  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());

  std::optional<Split> best;
  double best_score = -std::numeric_limits<double>::infinity();
  double total_sum = 0, total_sumsq = 0;
  std::vector<double> total_counts(task == Task::classification ? n_classes : 0, 0.0);
  for (auto r : rows) {
    if (task == Task::classification) {
      total_counts[static_cast<std::size_t>(y[r])] += 1;
    } else {
      total_sum += y[r];
      total_sumsq += y[r] * y[r];
    }
  }

  std::vector<std::uint32_t> order(rows.begin(), rows.end());
  std::vector<double> left_counts(total_counts.size());
  for (const auto f : sorted_features) {
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return X[a][f] < X[b][f]; });
    std::fill(left_counts.begin(), left_counts.end(), 0.0);
    double left_sum = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto r = order[i];
      if (task == Task::classification) {
        left_counts[static_cast<std::size_t>(y[r])] += 1;
      } else {
        left_sum += y[r];
      }
      const double a = X[r][f], b = X[order[i + 1]][f];
      if (!(a < b)) continue;
      const auto nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
      double score;
      if (task == Task::classification) {
        double sl = 0, sr = 0;
        for (std::size_t k = 0; k < n_classes; ++k) {
          sl += left_counts[k] * left_counts[k];
          const double rc = total_counts[k] - left_counts[k];
          sr += rc * rc;
        }
        score = sl / dl + sr / dr;
      } else {
        const double right_sum = total_sum - left_sum;
        score = left_sum * left_sum / dl + right_sum * right_sum / dr;
      }
      if (score > best_score) {
        best_score = score;
        const double child = (task == Task::classification ? static_cast<double>(n) : total_sumsq) - score;
        best = Split{f, midpoint(a, b), child};
      }
    }
  }
  return best;
}

namespace {

struct Builder {
  Task task;
  std::span<const Vector> X;
  std::span<const double> y;
  std::size_t n_classes;
  const ForestConfig& cfg;
  Rng rng;
  Tree tree;

  std::vector<double> leaf_value(std::span<const std::uint32_t> rows) const {
    if (task == Task::classification) {
      std::vector<double> dist(n_classes, 0.0);
      for (auto r : rows) dist[static_cast<std::size_t>(y[r])] += 1;
      for (auto& c : dist) c /= static_cast<double>(rows.size());
      return dist;
    }
    double sum = 0;
    for (auto r : rows) sum += y[r];
    return {sum / static_cast<double>(rows.size())};
  }

  std::uint32_t grow(std::vector<std::uint32_t> rows, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const bool depth_ok = cfg.max_depth == 0 || depth < cfg.max_depth;
    std::optional<Split> split;
    if (depth_ok && node_impurity(task, y, n_classes, rows) > 0) split = choose(rows);
    if (!split) {
      tree.nodes[id].value = leaf_value(rows);
      return id;
    }
    std::vector<std::uint32_t> left, right;
    for (auto r : rows) (X[r][split->feature] <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(std::move(left), depth + 1);
    const auto rt = grow(std::move(right), depth + 1);
    auto& node = tree.nodes[id];
    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = l;
    node.right = rt;
    return id;
  }

  // Visits features in random order; evaluates at least features_per_split of
  // them and keeps drawing while none has yielded a valid split.
  std::optional<Split> choose(const std::vector<std::uint32_t>& rows) {
    const auto d = X[0].size();
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm, rng);
    const auto k = cfg.features_per_split(d);
    std::size_t used = std::min(k, d);
    auto split = best_split(task, X, y, n_classes, rows, std::span(perm).first(used), cfg.min_leaf);
    while (!split && used < d) {
      ++used;
      split = best_split(task, X, y, n_classes, rows, std::span(perm).subspan(used - 1, 1), cfg.min_leaf);
    }
    return split;
  }
};

struct FitOutput {
  std::vector<Tree> trees;
  std::vector<std::vector<bool>> in_bag;
};

FitOutput fit_trees(Task task, std::span<const Vector> X, std::span<const double> y, std::size_t n_classes,
                    const ForestConfig& cfg) {
  const auto n = X.size();
  FitOutput out{std::vector<Tree>(cfg.n_trees), std::vector<std::vector<bool>>(cfg.n_trees)};
  auto fit_one = [&](std::size_t t) {
    Builder b{task, X, y, n_classes, cfg, make_rng(derive_seed(cfg.seed, t)), {}};
    std::vector<std::uint32_t> rows(n);
    auto& bag = out.in_bag[t];
    bag.assign(n, !cfg.bootstrap);
    if (cfg.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::uint32_t>(uniform_index(b.rng, n));
        bag[r] = true;
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    b.grow(std::move(rows), 0);
    out.trees[t] = std::move(b.tree);
  };
  const auto threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.n_trees));
  if (threads == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) fit_one(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < cfg.n_trees; t += threads) fit_one(t);
      });
  }
  return out;
}

void check_inputs(std::span<const Vector> X, std::size_t ny) {
  if (X.size() != ny) throw Error("feature rows and targets differ in length");
  if (X.size() < 2) throw Error("forest needs at least two samples");
  const auto d = X[0].size();
  if (d == 0) throw Error("forest needs at least one feature");
  for (const auto& row : X)
    if (row.size() != d) throw Error("feature rows differ in length");
}

}  // namespace

Forest Forest::fit_classifier(std::span<const Vector> X, std::span<const int> y, const ForestConfig& cfg) {
  cfg.validate();
  check_inputs(X, y.size());
  int max_label = 0;
  for (int label : y) {
    if (label < 0) throw Error("class labels must be non-negative");
    max_label = std::max(max_label, label);
  }
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; }))
    throw Error("classifier needs at least two distinct classes");
  std::vector<double> yd(y.begin(), y.end());

  Forest f;
  f.task_ = Task::classification;
  f.n_classes_ = static_cast<std::size_t>(max_label) + 1;
  f.n_features_ = X[0].size();
  auto fit = fit_trees(Task::classification, X, yd, f.n_classes_, cfg);
  f.trees_ = std::move(fit.trees);

  if (cfg.bootstrap) {
    std::size_t hits = 0, counted = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      std::vector<double> acc(f.n_classes_, 0.0);
      bool any = false;
      for (std::size_t t = 0; t < f.trees_.size(); ++t) {
        if (fit.in_bag[t][i]) continue;
        any = true;
        const auto& v = f.trees_[t].leaf_for(X[i]).value;
        for (std::size_t k = 0; k < v.size(); ++k) acc[k] += v[k];
      }
      if (!any) continue;
      ++counted;
      const auto pred = std::max_element(acc.begin(), acc.end()) - acc.begin();
      if (pred == y[i]) ++hits;
    }
    if (counted) f.oob_score_ = static_cast<double>(hits) / static_cast<double>(counted);
  }
  return f;
}

Forest Forest::fit_regressor(std::span<const Vector> X, std::span<const double> y, const ForestConfig& cfg,
                             std::vector<std::optional<double>>* oob_predictions) {
  cfg.validate();
  check_inputs(X, y.size());
  for (double v : y)
    if (!std::isfinite(v)) throw Error("regression targets must be finite");
  Forest f;
  f.task_ = Task::regression;
  f.n_classes_ = 0;
  f.n_features_ = X[0].size();
  auto fit = fit_trees(Task::regression, X, y, 0, cfg);
  f.trees_ = std::move(fit.trees);

  if (oob_predictions) oob_predictions->assign(X.size(), std::nullopt);
  if (cfg.bootstrap) {
    std::vector<std::pair<double, double>> pairs;  // (truth, oob prediction)
    for (std::size_t i = 0; i < X.size(); ++i) {
      double sum = 0;
      std::size_t k = 0;
      for (std::size_t t = 0; t < f.trees_.size(); ++t) {
        if (fit.in_bag[t][i]) continue;
        sum += f.trees_[t].leaf_for(X[i]).value[0];
        ++k;
      }
      if (!k) continue;
      pairs.emplace_back(y[i], sum / static_cast<double>(k));
      if (oob_predictions) (*oob_predictions)[i] = pairs.back().second;
    }
    if (!pairs.empty()) {
      double mean = 0;
      for (const auto& [t, _] : pairs) mean += t;
      mean /= static_cast<double>(pairs.size());
      double sse = 0, sst = 0;
      for (const auto& [t, p] : pairs) {
        sse += (t - p) * (t - p);
        sst += (t - mean) * (t - mean);
      }
      f.oob_score_ = sst > 0 ? 1.0 - sse / sst : (sse == 0 ? 1.0 : 0.0);
    }
  }
  return f;
}

std::vector<double> Forest::predict_proba(std::span<const double> x) const {
  if (task_ != Task::classification) throw Error("predict_proba called on a regression forest");
  std::vector<double> acc(n_classes_, 0.0);
  for (const auto& t : trees_) {
    const auto& v = t.leaf_for(x).value;
    for (std::size_t k = 0; k < v.size(); ++k) acc[k] += v[k];
  }
  for (auto& a : acc) a /= static_cast<double>(trees_.size());
  return acc;
}

int Forest::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double Forest::predict_value(std::span<const double> x) const {
  if (task_ != Task::regression) throw Error("predict_value called on a classification forest");
  double sum = 0;
  for (const auto& t : trees_) sum += t.leaf_for(x).value[0];
  return sum / static_cast<double>(trees_.size());
}

void Forest::save(std::ostream& out) const {
  out << "forest " << (task_ == Task::classification ? "classifier" : "regressor") << ' ' << trees_.size() << ' '
      << n_classes_ << ' ' << n_features_ << ' ' << (oob_score_ ? fmt::format("{:.17g}", *oob_score_) : "none") << '\n';
  for (const auto& t : trees_) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        out << "leaf";
        for (double v : n.value) out << ' ' << fmt::format("{:.17g}", v);
        out << '\n';
      } else {
        out << "split " << n.feature << ' ' << fmt::format("{:.17g}", n.threshold) << ' ' << n.left << ' ' << n.right
            << '\n';
      }
    }
  }
}

Forest Forest::load(std::istream& in) {
  auto fail = [](const std::string& why) { return Error("forest model: " + why); };
  std::string line;
  if (!std::getline(in, line)) throw fail("empty input");
  const auto h = io::split_ws(line);
  unsigned long long n_trees = 0, n_classes = 0, n_features = 0;
  if (h.size() != 6 || h[0] != "forest" || !io::parse_uint64(h[2], n_trees) || !io::parse_uint64(h[3], n_classes) ||
      !io::parse_uint64(h[4], n_features))
    throw fail("bad header");
  Forest f;
  if (h[1] == "classifier") {
    f.task_ = Task::classification;
  } else if (h[1] == "regressor") {
    f.task_ = Task::regression;
  } else {
    throw fail("unknown task");
  }
  f.n_classes_ = n_classes;
  f.n_features_ = n_features;
  if (h[5] != "none") f.oob_score_ = io::to_double(h[5], "forest header");
  for (std::size_t t = 0; t < n_trees; ++t) {
    if (!std::getline(in, line)) throw fail("truncated");
    const auto th = io::split_ws(line);
    unsigned long long n_nodes = 0;
    if (th.size() != 2 || th[0] != "tree" || !io::parse_uint64(th[1], n_nodes) || n_nodes == 0) throw fail("bad tree header");
    Tree tree;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      if (!std::getline(in, line)) throw fail("truncated tree");
      const auto f2 = io::split_ws(line);
      Node node;
      if (!f2.empty() && f2[0] == "leaf") {
        for (std::size_t i = 1; i < f2.size(); ++i) node.value.push_back(io::to_double(f2[i], "forest leaf"));
      } else if (f2.size() == 5 && f2[0] == "split") {
        long long feat = 0;
        unsigned long long l = 0, r = 0;
        if (!io::parse_int64(f2[1], feat) || feat < 0 || static_cast<std::size_t>(feat) >= n_features ||
            !io::parse_uint64(f2[3], l) || !io::parse_uint64(f2[4], r) || l >= n_nodes || r >= n_nodes)
          throw fail("bad split node");
        node.feature = static_cast<std::int32_t>(feat);
        node.threshold = io::to_double(f2[2], "forest split");
        node.left = static_cast<std::uint32_t>(l);
        node.right = static_cast<std::uint32_t>(r);
      } else {
        throw fail("bad node line");
      }
      tree.nodes.push_back(std::move(node));
    }
    f.trees_.push_back(std::move(tree));
  }
  return f;
}

}  // namespace t2v::forest
