#include "t2v/evaluation.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"
#include "t2v/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace t2v::eval {

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == 1 && truth[i] == 1) ++tp;
    if (predicted[i] == 1 && truth[i] == 0) ++fp;
    if (predicted[i] == 0 && truth[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

CategoryResult eval_category(const EmbeddingTable& channels, const std::map<std::string, std::string>& categories,
                             const std::string& target, const CategoryConfig& cfg) {
  std::vector<const Vector*> pos, neg;
  for (const auto& [id, v] : channels) {
    const auto it = categories.find(id);
    if (it == categories.end()) continue;
    (it->second == target ? pos : neg).push_back(&v);
  }
  if (pos.size() < cfg.per_class || neg.size() < cfg.per_class)
    throw Error(fmt::format("category '{}' has {} channels in and {} out; need {} of each", target, pos.size(),
                            neg.size(), cfg.per_class));
  if (cfg.reps == 0) throw Error("eval_category needs at least one repetition");

  CategoryResult r;
  const auto total = 2 * cfg.per_class;
  const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(total)));
  if (n_train < 2 || n_train >= total) throw Error("train fraction leaves an empty split");
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    auto rng = make_rng(derive_seed(cfg.seed, rep));
    auto p = pos, q = neg;
    shuffle(p, rng);
    shuffle(q, rng);
    std::vector<std::pair<const Vector*, int>> sample;
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      sample.emplace_back(p[i], 1);
      sample.emplace_back(q[i], 0);
    }
    shuffle(sample, rng);
    std::vector<Vector> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < n_train; ++i) {
      X.push_back(*sample[i].first);
      y.push_back(sample[i].second);
    }
    auto fc = cfg.forest;
    fc.seed = derive_seed(derive_seed(cfg.seed, "forest"), rep);
    std::vector<int> truth, pred;
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) {
      // Degenerate split: predict the only class seen.
      for (std::size_t i = n_train; i < total; ++i) {
        truth.push_back(sample[i].second);
        pred.push_back(y[0]);
      }
    } else {
      const auto model = forest::Forest::fit_classifier(X, y, fc);
      for (std::size_t i = n_train; i < total; ++i) {
        truth.push_back(sample[i].second);
        pred.push_back(model.predict(*sample[i].first));
      }
    }
    for (std::size_t i = 0; i < truth.size(); ++i) r.correct += truth[i] == pred[i];
    r.tested += truth.size();
    r.f1.push_back(f1_score(truth, pred));
  }
  r.mean_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / static_cast<double>(r.f1.size());
  return r;
}

std::vector<std::string> ranked_neighbors(const EmbeddingTable& table, const std::string& anchor) {
  const auto& a = table.at(anchor);
  std::vector<std::pair<double, const std::string*>> d;
  d.reserve(table.size());
  for (const auto& [id, v] : table)
    if (id != anchor) d.emplace_back(cosine_distance(a, v), &id);
  std::sort(d.begin(), d.end(), [](const auto& x, const auto& y) {
    return x.first < y.first || (x.first == y.first && *x.second < *y.second);
  });
  std::vector<std::string> out;
  out.reserve(d.size());
  for (const auto& [_, id] : d) out.push_back(*id);
  return out;
}

namespace {

// k-th smallest (1-based) neighbour by (distance, id) without a full sort.
std::pair<std::string, std::string> first_and_kth(const EmbeddingTable& table, const std::string& anchor,
                                                  const std::vector<std::pair<const std::string*, const Vector*>>& all,
                                                  std::size_t k) {
  const auto& a = table.at(anchor);
  std::vector<std::pair<double, const std::string*>> d;
  d.reserve(all.size());
  for (const auto& [id, v] : all)
    if (*id != anchor) d.emplace_back(cosine_distance(a, *v), id);
  auto less = [](const auto& x, const auto& y) {
    return x.first < y.first || (x.first == y.first && *x.second < *y.second);
  };
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end(), less);
  const auto kth = *d[k - 1].second;
  const auto first = *std::min_element(d.begin(), d.end(), less)->second;
  return {first, kth};
}

}  // namespace

TripletSample sample_triplets(const EmbeddingTable& table, std::size_t k, std::size_t n, std::uint64_t seed,
                              const std::string& source) {
  if (k == 0) throw Error("triplet k must be at least 1");
  if (table.size() <= k + 1)
    throw Error(fmt::format("embedding has {} channels; triplets with k = {} need more than {}", table.size(), k, k + 1));
  std::vector<std::pair<const std::string*, const Vector*>> all;
  for (const auto& [id, v] : table) all.emplace_back(&id, &v);

  TripletSample out;
  auto rng = make_rng(seed);
  std::set<std::size_t> used;
  const auto max_attempts = 100 * n;
  while (out.triplets.size() < n && out.attempts < max_attempts && used.size() < all.size()) {
    ++out.attempts;
    const auto ai = static_cast<std::size_t>(uniform_index(rng, all.size()));
    if (!used.insert(ai).second) continue;
    const auto& a = *all[ai].first;
    auto [b, c] = first_and_kth(table, a, all, k);
    if (b == c || a == b || a == c) continue;
    if (!(cosine_distance(table.at(a), table.at(b)) < cosine_distance(table.at(b), table.at(c)))) continue;
    out.triplets.push_back({fmt::format("{}-k{}-{}", source, k, out.triplets.size()), a, b, c, source, k});
  }
  out.complete = out.triplets.size() == n;
  if (!out.complete)
    log::warn("eval", "found {} of {} valid triplets for k = {} in {} attempts", out.triplets.size(), n, k,
              out.attempts);
  return out;
}

std::string predict_odd(const Triplet& t, const EmbeddingTable& table) {
  const auto& va = table.at(t.a);
  const auto& vb = table.at(t.b);
  const auto& vc = table.at(t.c);
  // (distance of the pair, odd id)
  std::array<std::pair<double, std::string>, 3> options{{{cosine_distance(vb, vc), t.a},
                                                         {cosine_distance(va, vc), t.b},
                                                         {cosine_distance(va, vb), t.c}}};
  return std::min_element(options.begin(), options.end())->second;
}

std::string TripletJudgment::modal() const {
  std::string best;
  std::size_t count = 0;
  for (const auto& [id, c] : votes)
    if (c > count) {
      best = id;
      count = c;
    }
  return best;
}

std::size_t TripletJudgment::modal_count() const {
  std::size_t count = 0;
  for (const auto& [_, c] : votes) count = std::max(count, c);
  return count;
}

Agreement agreement_table(const std::vector<TripletJudgment>& judgments, const EmbeddingTable& table,
                          std::size_t min_workers) {
  Agreement a;
  for (const auto& j : judgments) {
    std::size_t total = 0;
    for (const auto& [id, c] : j.votes) {
      if (id != j.triplet.a && id != j.triplet.b && id != j.triplet.c)
        throw Error("judgment for '" + j.triplet.id + "' votes for a channel outside the triplet");
      total += c;
    }
    if (total != kRatersPerTriplet)
      throw Error(fmt::format("judgment for '{}' has {} votes, expected {}", j.triplet.id, total, kRatersPerTriplet));
    if (j.modal_count() < min_workers) continue;
    ++a.n;
    if (predict_odd(j.triplet, table) == j.modal()) ++a.hits;
  }
  if (a.n > 0) a.rate = static_cast<double>(a.hits) / static_cast<double>(a.n);
  return a;
}

std::vector<Triplet> read_triplets(std::istream& in) {
  std::vector<Triplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(t, ',');
    unsigned long long k = 0;
    if (f.size() != 6 || !io::parse_uint64(f[5], k))
      throw Error(fmt::format("triplets line {} must be 'id,a,b,c,source,k'", line_no));
    Triplet tr{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), std::string(f[4]), k};
    if (tr.a == tr.b || tr.b == tr.c || tr.a == tr.c)
      throw Error(fmt::format("triplets line {}: ids must be distinct", line_no));
    out.push_back(std::move(tr));
  }
  return out;
}

void write_triplets(std::ostream& out, const std::vector<Triplet>& triplets) {
  for (const auto& t : triplets) out << t.id << ',' << t.a << ',' << t.b << ',' << t.c << ',' << t.source << ',' << t.k << '\n';
}

std::vector<TripletJudgment> read_judgments(std::istream& in, const std::vector<Triplet>& triplets) {
  std::unordered_map<std::string, const Triplet*> by_id;
  for (const auto& t : triplets) by_id.emplace(t.id, &t);
  std::vector<TripletJudgment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(t, ',');
    if (f.size() != kRatersPerTriplet + 1)
      throw Error(fmt::format("judgments line {} must hold a triplet id and {} choices", line_no, kRatersPerTriplet));
    const auto it = by_id.find(std::string(f[0]));
    if (it == by_id.end()) throw Error(fmt::format("judgments line {}: unknown triplet '{}'", line_no, f[0]));
    TripletJudgment j{*it->second, {}};
    for (std::size_t i = 1; i < f.size(); ++i) ++j.votes[std::string(f[i])];
    out.push_back(std::move(j));
  }
  return out;
}

void write_judgments(std::ostream& out, const std::vector<TripletJudgment>& judgments) {
  for (const auto& j : judgments) {
    out << j.triplet.id;
    for (const auto& [id, c] : j.votes)
      for (std::size_t i = 0; i < c; ++i) out << ',' << id;
    out << '\n';
  }
}

}  // namespace t2v::eval
