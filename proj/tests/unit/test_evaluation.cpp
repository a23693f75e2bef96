#include "t2v/error.hpp"
#include "t2v/evaluation.hpp"
#include "t2v/rng.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace t2v;
using namespace t2v::eval;

namespace {

Vector at_angle(double degrees) {
  const double r = degrees * std::numbers::pi / 180;
  return {std::cos(r), std::sin(r)};
}

EmbeddingTable random_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  auto rng = make_rng(seed);
  EmbeddingTable t(d);
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(d);
    for (auto& x : v) x = normal01(rng);
    t.set(fmt::format("p{:04d}", i), v);
  }
  return t;
}

double plain_cosine_distance(const Vector& a, const Vector& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return 1 - ab / std::sqrt(aa * bb);
}

// Rank claims checked by exhaustive scan: nothing strictly closer to a than b,
// fewer than k points strictly closer than c, at least k within c's distance.
bool brute_valid(const EmbeddingTable& t, const Triplet& tr) {
  if (tr.a == tr.b || tr.b == tr.c || tr.a == tr.c) return false;
  const auto& a = t.at(tr.a);
  const double db = plain_cosine_distance(a, t.at(tr.b)), dc = plain_cosine_distance(a, t.at(tr.c));
  std::size_t closer_than_b = 0, closer_than_c = 0, within_c = 0;
  for (const auto& [id, v] : t) {
    if (id == tr.a) continue;
    const double d = plain_cosine_distance(a, v);
    closer_than_b += d < db;
    closer_than_c += d < dc;
    within_c += d <= dc;
  }
  return closer_than_b == 0 && closer_than_c < tr.k && within_c >= tr.k &&
         db < plain_cosine_distance(t.at(tr.b), t.at(tr.c));
}

}  // namespace

TEST_CASE("hand-placed points: exactly the triplets found by hand") {
  EmbeddingTable t(2);
  const double angles[] = {0, 10, 30, 65, 105, 215};
  for (int i = 0; i < 6; ++i) t.set(fmt::format("p{}", i), at_angle(angles[i]));
  const auto r = sample_triplets(t, 3, 6, 1, "soc");
  CHECK_FALSE(r.complete);
  std::set<std::array<std::string, 3>> got;
  for (const auto& tr : r.triplets) got.insert({tr.a, tr.b, tr.c});
  const std::set<std::array<std::string, 3>> want{
      {"p0", "p1", "p3"}, {"p1", "p0", "p3"}, {"p2", "p1", "p3"}, {"p4", "p3", "p1"}};
  CHECK(got == want);
}

TEST_CASE("k = 1 never yields a triplet") {
  const auto t = random_table(30, 4, 1);
  CHECK(sample_triplets(t, 1, 10, 2, "soc").triplets.empty());
  CHECK_THROWS_AS(sample_triplets(t, 29, 10, 2, "soc"), Error);
}

TEST_CASE("sampled triplets survive brute-force verification") {
  const auto t = random_table(600, 8, 2);
  for (std::size_t k : {5u, 40u, 150u}) {
    const auto r = sample_triplets(t, k, 200, 3 + k, "rec");
    CHECK(r.triplets.size() == 200);
    for (const auto& tr : r.triplets) CHECK(brute_valid(t, tr));
  }
}

TEST_CASE("sampling does not depend on insertion order") {
  const auto t = random_table(200, 5, 4);
  EmbeddingTable reversed(5);
  auto ids = t.ids();
  for (auto it = ids.rbegin(); it != ids.rend(); ++it) reversed.set(*it, t.at(*it));
  const auto a = sample_triplets(t, 10, 30, 5, "con").triplets;
  const auto b = sample_triplets(reversed, 10, 30, 5, "con").triplets;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].a == b[i].a);
    CHECK(a[i].c == b[i].c);
  }
}

TEST_CASE("odd channel out") {
  EmbeddingTable t(3);
  t.set("near1", {1, 0, 0});
  t.set("near2", {0.99, 0.01, 0});
  t.set("far", {0, 0, 1});
  CHECK(predict_odd({"t", "near1", "near2", "far", "soc", 3}, t) == "far");
  // Orthonormal vectors: all pairs tie, the smallest id wins.
  EmbeddingTable e(3);
  e.set("y", {0, 1, 0});
  e.set("x", {1, 0, 0});
  e.set("z", {0, 0, 1});
  CHECK(predict_odd({"t", "z", "y", "x", "soc", 3}, e) == "x");
  // Hand angles: 0, 50, 80 degrees; the closest pair is (50, 80).
  EmbeddingTable h(2);
  h.set("a", at_angle(0));
  h.set("b", at_angle(50));
  h.set("c", at_angle(80));
  CHECK(predict_odd({"t", "a", "b", "c", "soc", 3}, h) == "a");
  CHECK_THROWS(predict_odd({"t", "a", "b", "missing", "soc", 3}, h));
}

TEST_CASE("agreement tables") {
  const auto t = random_table(300, 6, 7);
  auto rng = make_rng(8);
  std::vector<TripletJudgment> unanimous, noisy;
  const auto trips = sample_triplets(t, 20, 250, 9, "soc").triplets;
  for (const auto& tr : trips) {
    const auto odd = predict_odd(tr, t);
    unanimous.push_back({tr, {{odd, 5}}});
    TripletJudgment j{tr, {}};
    const std::string trio[] = {tr.a, tr.b, tr.c};
    for (int w = 0; w < 5; ++w) ++j.votes[uniform01(rng) < 0.1 ? trio[uniform_index(rng, 3)] : odd];
    // A further 30% of triplets get an unrelated crowd majority.
    if (uniform01(rng) < 0.3) j.votes = {{tr.a == odd ? tr.b : tr.a, 3}, {odd, 2}};
    noisy.push_back(j);
  }
  for (std::size_t w = 0; w <= 5; ++w) CHECK(agreement_table(unanimous, t, w).rate == 1.0);
  std::optional<double> prev_rate;
  std::size_t prev_n = SIZE_MAX;
  for (std::size_t w = 2; w <= 5; ++w) {
    const auto a = agreement_table(noisy, t, w);
    CHECK(a.n <= prev_n);
    REQUIRE(a.rate);
    if (prev_rate) CHECK(*a.rate >= *prev_rate);
    prev_rate = a.rate;
    prev_n = a.n;
  }
  CHECK_FALSE(agreement_table(std::vector<TripletJudgment>{}, t, 2).rate);
  std::vector<TripletJudgment> short_votes{{trips[0], {{trips[0].a, 4}}}};
  CHECK_THROWS_AS(agreement_table(short_votes, t, 2), Error);
}

TEST_CASE("modal vote ties go to the smallest id; files round-trip") {
  TripletJudgment j{{"t1", "b", "a", "c", "soc", 110}, {{"b", 2}, {"a", 2}, {"c", 1}}};
  CHECK(j.modal() == "a");
  CHECK(j.modal_count() == 2);
  std::stringstream ts, js;
  write_triplets(ts, {j.triplet});
  write_judgments(js, {j});
  const auto trips = read_triplets(ts);
  REQUIRE(trips.size() == 1);
  CHECK(trips[0].k == 110);
  CHECK(trips[0].source == "soc");
  const auto back = read_judgments(js, trips);
  REQUIRE(back.size() == 1);
  CHECK(back[0].votes == j.votes);
}

TEST_CASE("F1 score") {
  CHECK(f1_score({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
  CHECK(f1_score({1, 1, 0, 0}, {1, 0, 1, 0}) == 0.5);
  CHECK(f1_score({0, 0}, {0, 0}) == 0.0);
}

namespace {

struct CategoryFixture {
  EmbeddingTable table{4};
  std::map<std::string, std::string> categories;
};

CategoryFixture category_fixture(double gap, std::uint64_t seed, double angle = 0) {
  auto rng = make_rng(seed);
  CategoryFixture f;
  const double c = std::cos(angle), s = std::sin(angle);
  for (int i = 0; i < 260; ++i) {
    const bool pos = i < 120;
    Vector v(4);
    for (auto& x : v) x = normal01(rng);
    if (pos) v[0] += gap;
    // Rotate in the (0, 1) plane.
    const double x0 = c * v[0] - s * v[1], x1 = s * v[0] + c * v[1];
    v[0] = x0;
    v[1] = x1;
    const auto id = fmt::format("ch{:03d}", i);
    f.table.set(id, v);
    f.categories[id] = pos ? "Gaming" : (i % 2 ? "Music" : "Sports");
  }
  return f;
}

}  // namespace

TEST_CASE("category prediction: separable, permuted, rotated") {
  CategoryConfig cfg;
  cfg.reps = 20;
  cfg.forest.n_trees = 40;
  cfg.seed = 12;
  auto sep = category_fixture(8, 1);
  const auto good = eval_category(sep.table, sep.categories, "Gaming", cfg);
  CHECK(good.mean_f1 >= 0.95);
  CHECK(good.f1.size() == 20);
  CHECK(good.tested == 20 * 60);

  auto perm = sep;
  std::vector<std::string> labels;
  for (const auto& [_, c] : perm.categories) labels.push_back(c);
  auto rng = make_rng(13);
  shuffle(labels, rng);
  std::size_t i = 0;
  for (auto& [_, c] : perm.categories) c = labels[i++];
  CHECK(eval_category(perm.table, perm.categories, "Gaming", cfg).mean_f1 == doctest::Approx(0.5).epsilon(0.2));

  auto hard = category_fixture(1.5, 2), rotated = category_fixture(1.5, 2, 0.7);
  const auto a = eval_category(hard.table, hard.categories, "Gaming", cfg).mean_f1;
  const auto b = eval_category(rotated.table, rotated.categories, "Gaming", cfg).mean_f1;
  CHECK(std::abs(a - b) < 0.05);

  cfg.per_class = 200;
  CHECK_THROWS_AS(eval_category(sep.table, sep.categories, "Gaming", cfg), Error);
}
