#include "t2v/ingest.hpp"
#include "t2v/rng.hpp"
#include "t2v/social.hpp"

#include <doctest.h>
#include <fmt/format.h>

using namespace t2v;

namespace {

ingest::SharingMatrix matrix(std::vector<std::string> channels, std::vector<std::string> subs,
                             const std::vector<std::vector<double>>& dense) {
  ingest::SharingMatrix w;
  w.channels = std::move(channels);
  w.subreddits = std::move(subs);
  for (const auto& row : dense) {
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] != 0) w.entries.push_back({j, row[j]});
    w.row_offsets.push_back(w.entries.size());
  }
  return w;
}

}  // namespace

TEST_CASE("hand product") {
  EmbeddingTable s(2);
  s.set("s1", {1, 0});
  s.set("s2", {0, 1});
  const auto r = social::embed_social(matrix({"a", "b"}, {"s1", "s2"}, {{0.75, 0.25}, {1, 0}}), s);
  CHECK(r.channels.provenance() == Provenance::soc);
  CHECK(r.channels.at("a") == Vector{0.75, 0.25});
  CHECK(r.channels.at("b") == Vector{1, 0});
}

TEST_CASE("equal subreddit vectors collapse every channel") {
  EmbeddingTable s(3);
  for (auto n : {"p", "q", "r"}) s.set(n, {0.5, -2, 3});
  const auto r = social::embed_social(matrix({"a", "b"}, {"p", "q", "r"}, {{0.2, 0.3, 0.5}, {0, 0, 1}}), s);
  for (const auto& id : {"a", "b"}) {
    const auto& v = r.channels.at(id);
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == doctest::Approx(-2));
    CHECK(v[2] == doctest::Approx(3));
  }
}

TEST_CASE("missing subreddits are renormalized or the channel omitted") {
  EmbeddingTable s(2);
  s.set("s1", {1, 0});
  s.set("s2", {0, 1});
  const auto w = matrix({"a", "b", "c"}, {"s1", "s2", "gone"}, {{0.3, 0.3, 0.4}, {0, 0, 1}, {0.2, 0, 0.8}});
  const auto r = social::embed_social(w, s);
  CHECK(r.channels.at("a")[0] == doctest::Approx(0.5));
  CHECK(r.channels.at("a")[1] == doctest::Approx(0.5));
  CHECK_FALSE(r.channels.contains("b"));
  CHECK_FALSE(r.channels.contains("c"));  // 0.2 surviving mass is under the default 0.5
  CHECK(r.omitted == std::vector<std::string>{"b", "c"});
  CHECK(social::embed_social(w, s, 0.1).channels.contains("c"));
}

TEST_CASE("linear in S, column-order free, inside the convex hull") {
  auto rng = make_rng(3);
  const std::size_t n = 12, m = 7, d = 5;
  std::vector<std::string> subs, chans;
  for (std::size_t j = 0; j < m; ++j) subs.push_back(fmt::format("s{}", j));
  for (std::size_t i = 0; i < n; ++i) chans.push_back(fmt::format("c{:02d}", i));
  std::vector<std::vector<double>> dense(n, std::vector<double>(m, 0.0));
  for (auto& row : dense) {
    double sum = 0;
    for (auto& x : row)
      if (uniform01(rng) < 0.6) sum += (x = uniform01(rng));
    if (sum == 0) sum = row[0] = 1;
    for (auto& x : row) x /= sum;
  }
  EmbeddingTable s(d), scaled(d);
  for (const auto& name : subs) {
    Vector v(d);
    for (auto& x : v) x = normal01(rng);
    s.set(name, v);
    for (auto& x : v) x *= -2.5;
    scaled.set(name, v);
  }
  const auto base = social::embed_social(matrix(chans, subs, dense), s).channels;
  const auto times = social::embed_social(matrix(chans, subs, dense), scaled).channels;

  // Reverse the column order.
  std::vector<std::string> rsubs(subs.rbegin(), subs.rend());
  auto rdense = dense;
  for (auto& row : rdense) std::reverse(row.begin(), row.end());
  const auto permuted = social::embed_social(matrix(chans, rsubs, rdense), s).channels;

  for (const auto& id : chans) {
    const auto& v = base.at(id);
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(times.at(id)[k] == doctest::Approx(-2.5 * v[k]).epsilon(1e-12));
      CHECK(permuted.at(id)[k] == doctest::Approx(v[k]).epsilon(1e-12));
      double lo = 1e300, hi = -1e300;
      for (const auto& name : subs) {
        lo = std::min(lo, s.at(name)[k]);
        hi = std::max(hi, s.at(name)[k]);
      }
      CHECK(v[k] >= lo - 1e-12);
      CHECK(v[k] <= hi + 1e-12);
    }
  }
}
