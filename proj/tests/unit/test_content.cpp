#include "t2v/content.hpp"
#include "t2v/rng.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <algorithm>
#include <sstream>

using namespace t2v;
using content::VideoVectors;

TEST_CASE("single video sums title and description") {
  const std::vector<VideoVectors> vs{{"v", Vector{1, 0, 0}, Vector{0, 1, 0}}};
  const auto r = content::aggregate_content(vs, {{"c", {"v"}}});
  CHECK(r.channels.provenance() == Provenance::con);
  CHECK(r.channels.at("c") == Vector{1, 1, 0});
}

TEST_CASE("opposite videos cancel and missing descriptions count as zero") {
  const std::vector<VideoVectors> vs{{"a", Vector{1, 2}, std::nullopt}, {"b", Vector{-1, -2}, std::nullopt}};
  const auto r = content::aggregate_content(vs, {{"c", {"a", "b"}}, {"d", {"a"}}});
  CHECK(r.channels.at("c") == Vector{0, 0});
  CHECK(r.channels.at("d") == Vector{1, 2});
}

TEST_CASE("three-video mean by hand; channels without vectors are omitted") {
  const std::vector<VideoVectors> vs{{"a", Vector{3, 0}, Vector{0, 3}},
                                     {"b", Vector{1, 1}, std::nullopt},
                                     {"c", Vector{0, -2}, Vector{2, 0}}};
  const auto r = content::aggregate_content(vs, {{"x", {"a", "b", "c", "unknown"}}, {"y", {"nope"}}});
  // (3,3) + (1,1) + (2,-2) = (6,2), over 3 vectorized videos.
  CHECK(r.channels.at("x")[0] == doctest::Approx(2.0));
  CHECK(r.channels.at("x")[1] == doctest::Approx(2.0 / 3));
  CHECK(r.omitted == std::vector<std::string>{"y"});
}

TEST_CASE("permutation invariance and homogeneity") {
  auto rng = make_rng(9);
  std::vector<VideoVectors> vs, scaled;
  std::vector<std::string> vids;
  for (int i = 0; i < 9; ++i) {
    Vector t(4), d(4);
    for (auto& x : t) x = normal01(rng);
    for (auto& x : d) x = normal01(rng);
    const auto id = fmt::format("v{}", i);
    vids.push_back(id);
    vs.push_back({id, t, i % 3 ? std::optional<Vector>(d) : std::nullopt});
    for (auto& x : t) x *= 3;
    for (auto& x : d) x *= 3;
    scaled.push_back({id, t, i % 3 ? std::optional<Vector>(d) : std::nullopt});
  }
  auto shuffled = vids;
  shuffle(shuffled, rng);
  const auto a = content::aggregate_content(vs, {{"c", vids}}).channels.at("c");
  const auto b = content::aggregate_content(vs, {{"c", shuffled}}).channels.at("c");
  const auto s = content::aggregate_content(scaled, {{"c", vids}}).channels.at("c");
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
    CHECK(s[k] == doctest::Approx(3 * a[k]).epsilon(1e-12));
  }
}

TEST_CASE("video vector file round-trips") {
  const std::vector<VideoVectors> vs{{"a", Vector{0.5, -1.25}, Vector{3, 4}}, {"b", Vector{1e-9, 2}, std::nullopt}};
  std::stringstream s;
  content::write_video_vectors(s, vs);
  const auto back = content::read_video_vectors(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].title == vs[0].title);
  CHECK(back[0].description == vs[0].description);
  CHECK(back[1].title == vs[1].title);
  CHECK_FALSE(back[1].description.has_value());
}
