#include "t2v/dimensions.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"
#include "t2v/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace t2v::dims {

std::vector<std::pair<std::string, std::vector<SeedPair>>> read_seed_pairs(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<SeedPair>>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(t, ',');
    if (f.size() != 3) throw Error(fmt::format("seed pair line {} must be 'name,low,high'", line_no));
    std::string name(io::trim(f[0]));
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == name; });
    if (it == out.end()) it = out.insert(out.end(), {name, {}});
    it->second.push_back({std::string(io::trim(f[1])), std::string(io::trim(f[2]))});
  }
  return out;
}

DimensionSpec build_dimension(const std::string& name, const EmbeddingTable& subreddits,
                              const std::vector<SeedPair>& pairs) {
  if (pairs.empty()) throw Error("dimension '" + name + "' has no seed pairs");
  const auto d = subreddits.dim();
  Vector mean(d, 0.0);
  for (const auto& p : pairs) {
    const auto* lo = subreddits.find(p.low);
    const auto* hi = subreddits.find(p.high);
    if (!lo || !hi)
      throw Error("dimension '" + name + "': seed subreddit '" + (lo ? p.high : p.low) + "' missing from embedding");
    for (std::size_t k = 0; k < d; ++k) mean[k] += (*hi)[k] - (*lo)[k];
  }
  for (auto& x : mean) x /= static_cast<double>(pairs.size());
  const double n = norm(mean);
  if (n == 0.0) throw Error("dimension '" + name + "': seed pair differences cancel to the zero vector");
  for (auto& x : mean) x /= n;
  return {name, pairs, std::move(mean)};
}

ProjectResult project(const EmbeddingTable& channels, const DimensionSpec& dim) {
  if (channels.dim() != dim.vector.size())
    throw Error(fmt::format("embedding has {} dimensions, direction '{}' has {}", channels.dim(), dim.name,
                            dim.vector.size()));
  ProjectResult r;
  r.scores.dimension = dim.name;
  for (const auto& [id, v] : channels) {
    if (norm(v) == 0.0) {
      r.omitted.push_back(id);
      continue;
    }
    r.scores.scores.emplace(id, cosine_similarity(v, dim.vector));
  }
  if (!r.omitted.empty()) log::warn("dims", "{} zero vectors omitted from '{}'", r.omitted.size(), dim.name);
  return r;
}

DimensionScores standardize(const DimensionScores& s) {
  if (s.scores.size() < 2) throw Error("standardizing needs at least two scores");
  double mean = 0;
  for (const auto& [_, v] : s.scores) mean += v;
  mean /= static_cast<double>(s.scores.size());
  double var = 0;
  for (const auto& [_, v] : s.scores) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.scores.size());
  if (var == 0) throw Error("cannot standardize constant scores for '" + s.dimension + "'");
  const double sd = std::sqrt(var);
  DimensionScores out{s.dimension, {}, true};
  for (const auto& [id, v] : s.scores) out.scores.emplace(id, (v - mean) / sd);
  return out;
}

void write_scores(std::ostream& out, const DimensionScores& s) {
  out << "# dimension=" << s.dimension << " standardized=" << (s.standardized ? "true" : "false") << '\n';
  for (const auto& [id, v] : s.scores) out << id << ',' << format_real(v) << '\n';
}

DimensionScores read_scores(std::istream& in) {
  DimensionScores s;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      for (auto tok : io::split_ws(t.substr(1))) {
        if (tok.starts_with("dimension=")) s.dimension = tok.substr(10);
        if (tok.starts_with("standardized=")) s.standardized = tok.substr(13) == "true";
      }
      header = true;
      continue;
    }
    const auto f = io::split(t, ',');
    if (f.size() != 2) throw Error(fmt::format("scores line {} must be 'channel_id,score'", line_no));
    s.scores.insert_or_assign(std::string(io::trim(f[0])), io::to_double(io::trim(f[1]), "scores file"));
  }
  if (!header) throw Error("scores file lacks the '# dimension=... standardized=...' header");
  return s;
}

TransferResult transfer_dimension(const EmbeddingTable& target, const DimensionScores& train_scores,
                                  const forest::ForestConfig& cfg, std::size_t min_overlap, bool out_of_bag) {
  std::vector<Vector> X;
  std::vector<double> y;
  std::map<std::string_view, std::size_t> row_of;
  for (const auto& [id, v] : target) {
    const auto it = train_scores.scores.find(id);
    if (it == train_scores.scores.end()) continue;
    row_of.emplace(id, X.size());
    X.push_back(v);
    y.push_back(it->second);
  }
  if (X.size() < min_overlap)
    throw Error(fmt::format("only {} channels overlap between target embedding and '{}' scores (need {})", X.size(),
                            train_scores.dimension, min_overlap));
  std::vector<std::optional<double>> oob;
  const auto model = forest::Forest::fit_regressor(X, y, cfg, out_of_bag ? &oob : nullptr);
  TransferResult r;
  r.scores.dimension = train_scores.dimension;
  r.scores.standardized = false;
  r.training_channels = X.size();
  r.oob_r2 = model.oob_score();
  for (const auto& [id, v] : target) {
    const auto row = row_of.find(id);
    const bool use_oob = out_of_bag && row != row_of.end() && oob[row->second];
    r.scores.scores.emplace(id, use_oob ? *oob[row->second] : model.predict_value(v));
  }
  return r;
}

std::optional<std::size_t> bin_of(double value, const std::vector<double>& edges) {
  if (edges.size() < 2 || !(value > edges.front()) || value > edges.back()) return std::nullopt;
  const auto it = std::lower_bound(edges.begin(), edges.end(), value);  // first edge >= value
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::vector<std::string> BinSampling::sampled() const {
  std::vector<std::string> out;
  for (const auto& b : bins) out.insert(out.end(), b.channels.begin(), b.channels.end());
  return out;
}

BinSampling sample_bins(const DimensionScores& scores, const DimensionScores& ness, const std::vector<double>& dim_edges,
                        const std::vector<double>& ness_edges, std::size_t per_bin, std::uint64_t seed) {
  auto check_edges = [](const std::vector<double>& e, const char* what) {
    if (e.size() < 2 || !std::is_sorted(e.begin(), e.end()) || std::adjacent_find(e.begin(), e.end()) != e.end())
      throw Error(std::string(what) + " edges must be at least two strictly increasing values");
  };
  check_edges(dim_edges, "dimension");
  check_edges(ness_edges, "ness");
  if (!scores.standardized || !ness.standardized) log::warn("dims", "bin sampling on non-standardized scores");

  const auto nd = dim_edges.size() - 1, nn = ness_edges.size() - 1;
  BinSampling out;
  std::vector<std::vector<std::string>> members(nd * nn);
  for (const auto& [id, v] : scores.scores) {
    const auto it = ness.scores.find(id);
    const auto bd = bin_of(v, dim_edges);
    const auto bn = it == ness.scores.end() ? std::nullopt : bin_of(it->second, ness_edges);
    if (!bd || !bn) {
      out.excluded.push_back(id);
      continue;
    }
    members[*bd * nn + *bn].push_back(id);
  }
  if (!out.excluded.empty())
    log::info("dims", "{} channels outside the outermost bin edges excluded from sampling", out.excluded.size());

  for (std::size_t b = 0; b < members.size(); ++b) {
    BinSample bin{b / nn, b % nn, {}, members[b].size()};
    auto pool = members[b];
    auto rng = make_rng(derive_seed(seed, b));
    shuffle(pool, rng);
    if (pool.size() < per_bin)
      log::warn("dims", "bin ({}, {}) holds {} channels, fewer than {}", bin.dim_bin, bin.ness_bin, pool.size(), per_bin);
    pool.resize(std::min(pool.size(), per_bin));
    std::sort(pool.begin(), pool.end());
    bin.channels = std::move(pool);
    out.bins.push_back(std::move(bin));
  }
  return out;
}

}  // namespace t2v::dims
