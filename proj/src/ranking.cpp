#include "t2v/ranking.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"
#include "t2v/rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

namespace t2v::ranking {

std::vector<ComparisonRecord> read_comparisons(std::istream& in) {
  std::vector<ComparisonRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(t, ',');
    if (f.size() != 4) throw Error(fmt::format("comparison line {} must have 4 fields", line_no));
    ComparisonRecord r{std::string(io::trim(f[0])), std::string(io::trim(f[1])), std::string(io::trim(f[2])),
                       std::string(io::trim(f[3]))};
    if (r.winner.empty() || r.loser.empty()) throw Error(fmt::format("comparison line {} has an empty id", line_no));
    if (r.winner == r.loser) throw Error(fmt::format("comparison line {}: winner equals loser", line_no));
    out.push_back(std::move(r));
  }
  return out;
}

void write_comparisons(std::ostream& out, std::span<const ComparisonRecord> comparisons) {
  for (const auto& c : comparisons) out << c.dimension << ',' << c.winner << ',' << c.loser << ',' << c.rater << '\n';
}

double win_probability(double a, double b) { return a / (a + b); }

namespace {

struct PairCount {
  std::uint32_t i, j;
  double n;  // comparisons between i and j, in either direction
};

bool strongly_connected(std::size_t n, const std::vector<std::vector<std::uint32_t>>& beats) {
  auto reach_all = [&](const std::vector<std::vector<std::uint32_t>>& adj) {
    std::vector<bool> seen(n, false);
    std::vector<std::uint32_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : adj[u])
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n;
  };
  std::vector<std::vector<std::uint32_t>> reverse(n);
  for (std::uint32_t u = 0; u < n; ++u)
    for (auto v : beats[u]) reverse[v].push_back(u);
  return reach_all(beats) && reach_all(reverse);
}

}  // namespace

PLScores fit_plackett_luce(std::span<const ComparisonRecord> comparisons, const PLOptions& opt) {
  if (comparisons.empty()) throw Error("Plackett-Luce fit needs at least one comparison");
  if (opt.prior < 0) throw Error("prior must be non-negative");

  std::set<std::string_view> item_set;
  for (const auto& c : comparisons) {
    if (c.winner == c.loser) throw Error("comparison with winner == loser");
    item_set.insert(c.winner);
    item_set.insert(c.loser);
  }
  std::vector<std::string_view> items(item_set.begin(), item_set.end());
  const auto n = items.size();
  auto idx = [&](std::string_view id) {
    return static_cast<std::uint32_t>(std::lower_bound(items.begin(), items.end(), id) - items.begin());
  };

  std::vector<double> wins(n, 0.0);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::array<double, 2>> pair_wins;  // [i beats j, j beats i], i<j
  std::vector<std::vector<std::uint32_t>> beats(n);
  for (const auto& c : comparisons) {
    const auto w = idx(c.winner), l = idx(c.loser);
    wins[w] += 1;
    beats[w].push_back(l);
    if (w < l) {
      pair_wins[{w, l}][0] += 1;
    } else {
      pair_wins[{l, w}][1] += 1;
    }
  }
  std::vector<PairCount> pairs;
  for (const auto& [key, c] : pair_wins) pairs.push_back({key.first, key.second, c[0] + c[1]});

  const bool connected = n > 0 && strongly_connected(n, beats);
  if (!connected) {
    if (opt.prior == 0)
      throw Error("comparison graph is not strongly connected and prior = 0: maximum-likelihood scores do not exist");
    log::warn("pl_fit", "comparison graph is not strongly connected; the prior keeps scores finite");
  }

  const double prior = opt.prior;
  std::vector<double> s(n, 1.0);
  auto objective = [&](const std::vector<double>& sc, double& data_ll) {
    data_ll = 0;
    for (const auto& [key, c] : pair_wins) {
      const double si = sc[key.first], sj = sc[key.second];
      const double lden = std::log(si + sj);
      data_ll += c[0] * (std::log(si) - lden) + c[1] * (std::log(sj) - lden);
    }
    double total = data_ll;
    if (prior > 0)
      for (double si : sc) total += prior * (std::log(si) - std::log(si + 1.0)) + prior * (-std::log(si + 1.0));
    return total;
  };

  PLScores out;
  double ll = 0;
  out.objective_trace.push_back(objective(s, ll));
  std::vector<double> denom(n), next(n);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    // With an anchor of score 1 every item has prior virtual wins and
    // 2 * prior virtual comparisons against it.
    std::fill(denom.begin(), denom.end(), 0.0);
    for (const auto& p : pairs) {
      const double inv = p.n / (s[p.i] + s[p.j]);
      denom[p.i] += inv;
      denom[p.j] += inv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double w = wins[i] + prior;
      const double d = denom[i] + (prior > 0 ? 2.0 * prior / (s[i] + 1.0) : 0.0);
      next[i] = w / d;
    }
    if (prior == 0) {
      // The likelihood is scale-free; re-center log-scores to stay bounded.
      double mean_log = 0;
      for (double v : next) mean_log += std::log(v);
      mean_log /= static_cast<double>(n);
      const double scale = std::exp(-mean_log);
      for (auto& v : next) v *= scale;
    } else {
      // Only the anchor terms see the global scale, and MM alone moves along
      // that direction very slowly. Maximize over it exactly: the objective
      // is concave in the log-scale t, so bisect on its derivative
      // sum(1 - 2 sigmoid(t + log s_i)).
      auto slope = [&](double t) {
        double g = 0;
        for (double v : next) g += 1.0 - 2.0 / (1.0 + std::exp(-(t + std::log(v))));
        return g;
      };
      double lo = -60, hi = 60;
      for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0 ? lo : hi) = mid;
      }
      const double scale = std::exp(0.5 * (lo + hi));
      for (auto& v : next) v *= scale;
    }
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(std::log(next[i]) - std::log(s[i])));
    s.swap(next);
    out.objective_trace.push_back(objective(s, ll));
    out.iterations = it + 1;
    if (change < opt.tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) log::warn("pl_fit", "MM iteration stopped after {} iterations without converging", out.iterations);

  out.objective = out.objective_trace.back();
  double mean_log = 0;
  for (double v : s) mean_log += std::log(v);
  mean_log /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.scores.emplace(std::string(items[i]), std::exp(std::log(s[i]) - mean_log));
  std::vector<double> normalized(n);
  for (std::size_t i = 0; i < n; ++i) normalized[i] = out.scores.at(std::string(items[i]));
  objective(normalized, out.log_likelihood);
  return out;
}

long long concordance_difference(std::span<const double> x, std::span<const double> y) {
  const auto n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  auto tied_pairs = [](auto begin, auto end, auto same) {
    long long total = 0, run = 1;
    for (auto it = begin; it != end; ++it) {
      if (it + 1 != end && same(*it, *(it + 1))) {
        ++run;
      } else {
        total += run * (run - 1) / 2;
        run = 1;
      }
    }
    return total;
  };
  const long long tx = tied_pairs(order.begin(), order.end(), [&](auto a, auto b) { return x[a] == x[b]; });
  const long long txy =
      tied_pairs(order.begin(), order.end(), [&](auto a, auto b) { return x[a] == x[b] && y[a] == y[b]; });

  // Merge sort on y counts discordant pairs (strict inversions).
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  long long swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const auto mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (ys[j] < ys[i]) {
          swaps += static_cast<long long>(mid - i);
          buf[k++] = ys[j++];
        } else {
          buf[k++] = ys[i++];
        }
      }
      while (i < mid) buf[k++] = ys[i++];
      while (j < hi) buf[k++] = ys[j++];
    }
    ys.swap(buf);
  }
  const long long ty = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });
  const long long total = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long untied = total - tx - ty + txy;  // P + Q
  return untied - 2 * swaps;
}

double tau_c(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("tau_c inputs differ in length");
  const auto n = x.size();
  if (n < 2) throw Error("tau_c needs at least two observations");
  const auto distinct = [](std::span<const double> v) { return std::set<double>(v.begin(), v.end()).size(); };
  const auto m = std::min(distinct(x), distinct(y));
  if (m == 1) throw Error("tau_c is undefined for a constant sequence");
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return 2.0 * md * static_cast<double>(concordance_difference(x, y)) / (nd * nd * (md - 1.0));
}

int partisan_label_rank(std::string_view label) {
  static constexpr std::array<std::string_view, 7> kLabels = {
      "extreme-left", "left", "center-left", "center", "center-right", "right", "extreme-right"};
  std::string norm(io::trim(label));
  for (auto& c : norm) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_' || c == ' ') c = '-';
  }
  for (std::size_t i = 0; i < kLabels.size(); ++i)
    if (kLabels[i] == norm) return static_cast<int>(i) + 1;
  throw Error("unknown partisan label '" + std::string(label) + "'");
}

double label_correlation(const std::map<std::string, double>& scores, const std::map<std::string, std::string>& labels) {
  std::vector<double> xs, ys;
  for (const auto& [channel, label] : labels) {
    const int rank = partisan_label_rank(label);
    const auto it = scores.find(channel);
    if (it == scores.end()) continue;
    xs.push_back(it->second);
    ys.push_back(rank);
  }
  if (xs.size() < 2) throw Error("label correlation needs at least two labelled, scored channels");
  return tau_c(xs, ys);
}

std::map<std::string, std::string> read_labels(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(t, ',');
    if (f.size() != 2) throw Error(fmt::format("labels line {} must be 'channel_id,label'", line_no));
    out.insert_or_assign(std::string(io::trim(f[0])), std::string(io::trim(f[1])));
  }
  return out;
}

ZTest two_proportion_ztest(std::uint64_t hits1, std::uint64_t n1, std::uint64_t hits2, std::uint64_t n2, double alpha) {
  if (n1 == 0 || n2 == 0) throw Error("z-test needs non-empty samples");
  if (hits1 > n1 || hits2 > n2) throw Error("z-test hits exceed sample size");
  const double p1 = static_cast<double>(hits1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(hits2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(hits1 + hits2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(pooled * (1 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  ZTest t;
  if (se == 0) return t;  // both samples all-hit or all-miss
  t.z = (p1 - p2) / se;
  t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
  t.significant = t.p_value < alpha;
  return t;
}

BootstrapInterval tau_c_difference_ci(std::span<const double> a, std::span<const double> b, std::span<const double> y,
                                      std::size_t reps, std::uint64_t seed, double level) {
  if (a.size() != y.size() || b.size() != y.size()) throw Error("bootstrap inputs differ in length");
  BootstrapInterval out;
  out.estimate = tau_c(a, y) - tau_c(b, y);
  auto rng = make_rng(seed);
  const auto n = y.size();
  std::vector<double> diffs, ra(n), rb(n), ry(n);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = uniform_index(rng, n);
      ra[i] = a[k];
      rb[i] = b[k];
      ry[i] = y[k];
    }
    try {
      diffs.push_back(tau_c(ra, ry) - tau_c(rb, ry));
    } catch (const Error&) {
    }
  }
  if (diffs.empty()) throw Error("no bootstrap resample produced a defined tau_c");
  std::sort(diffs.begin(), diffs.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(diffs.size() - 1) + 0.5));
    return diffs[std::min(k, diffs.size() - 1)];
  };
  out.lower = at(tail);
  out.upper = at(1.0 - tail);
  return out;
}

}  // namespace t2v::ranking
