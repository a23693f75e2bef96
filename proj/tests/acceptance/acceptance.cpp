// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every blocking criterion passes. Criterion 10 needs the released channel
// embeddings and label files and reports SKIP without them.

#include "t2v/dimensions.hpp"
#include "t2v/evaluation.hpp"
#include "t2v/ingest.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"
#include "t2v/ranking.hpp"
#include "t2v/recgraph.hpp"
#include "t2v/sgns.hpp"
#include "t2v/social.hpp"
#include "t2v/walks.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

using namespace t2v;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Verdict verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

// ---------------------------------------------------------------------------

Verdict social_product() {
  const auto t0 = Clock::now();
  // ch1: 3x s1, 1x s2; ch2: only s2; ch3: 1x s1, 1x s2.
  const std::vector<std::tuple<const char*, const char*>> shares{
      {"s1", "v1"}, {"s1", "v1"}, {"s1", "v1"}, {"s2", "v1"}, {"s2", "v2"}, {"s1", "v3"}, {"s2", "v3"}};
  std::vector<ingest::SharingTuple> tuples;
  int author = 0;
  for (const auto& [sub, video] : shares)
    tuples.push_back({sub, video, fmt::format("u{}", author++), ingest::TupleSource::post, 1500000000, std::nullopt});
  const ingest::VideoChannelMap map{{"v1", "ch1"}, {"v2", "ch2"}, {"v3", "ch3"}};
  const auto w = ingest::build_sharing_matrix(tuples, map, {"ch1", "ch2", "ch3"}).matrix;
  EmbeddingTable s(3);
  s.set("s1", {0.2, -1.0, 3.0});
  s.set("s2", {1.5, 0.5, -2.0});
  const auto c = social::embed_social(w, s).channels;

  const std::map<std::string, std::array<double, 2>> rows{{"ch1", {0.75, 0.25}}, {"ch2", {0, 1}}, {"ch3", {0.5, 0.5}}};
  double worst = 0;
  for (const auto& [id, r] : rows)
    for (std::size_t k = 0; k < 3; ++k) {
      const double want = r[0] * s.at("s1")[k] + r[1] * s.at("s2")[k];
      worst = std::max(worst, std::abs(c.at(id)[k] - want));
    }
  const double secs = seconds_since(t0);
  return verdict(c.size() == 3 && worst <= 1e-12 && secs < 1,
                 fmt::format("max |C - hand| = {:.3g} (limit 1e-12), {:.4f} s (limit 1 s)", worst, secs));
}

Verdict planted_partition() {
  const auto t0 = Clock::now();
  const std::uint32_t n = 150, groups = 3;
  auto rng = make_rng(20240501);
  std::vector<std::string> ids;
  for (std::uint32_t i = 0; i < n; ++i) ids.push_back(fmt::format("n{:03d}", i));
  auto community = [&](std::uint32_t i) { return i % groups; };
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < (community(i) == community(j) ? 0.3 : 0.01)) edges.emplace_back(i, j, 1.0);
  const rec::RecGraph g(ids, edges);

  rec::WalkConfig wcfg;
  wcfg.seed = 1;
  rec::SgnsConfig scfg;
  scfg.seed = 2;
  const auto vectors = rec::train_sgns(rec::walks_to_ids(g, rec::generate_walks(g, wcfg)), scfg).vectors;

  std::size_t hits = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    double best = 1e300;
    std::uint32_t nn = i;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = cosine_distance(vectors.at(ids[i]), vectors.at(ids[j]));
      if (d < best) best = d, nn = j;
    }
    hits += community(nn) == community(i);
  }
  const double acc = static_cast<double>(hits) / n, secs = seconds_since(t0);
  return verdict(acc >= 0.9 && secs < 60, fmt::format("1-NN community accuracy {:.3f} (>= 0.9) over {} edges, {:.1f} s (< 60 s)",
                                                      acc, edges.size(), secs));
}

Verdict sgns_gradient() {
  auto rng = make_rng(7);
  const double h = 1e-5;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 4 + trial % 13, k = 1 + trial % 6;
    auto vec = [&] {
      Vector v(d);
      for (auto& x : v) x = 0.5 * normal01(rng);
      return v;
    };
    Vector center = vec(), context = vec();
    std::vector<Vector> neg;
    for (std::size_t i = 0; i < k; ++i) neg.push_back(vec());
    const auto g = rec::sgns_pair_gradient(center, context, neg);
    auto probe = [&](Vector& v, const Vector& grad) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double up = rec::sgns_pair_loss(center, context, neg);
        v[i] = keep - h;
        const double down = rec::sgns_pair_loss(center, context, neg);
        v[i] = keep;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(grad[i] - fd) / std::max({1e-6, std::abs(grad[i]), std::abs(fd)}));
      }
    };
    probe(center, g.center);
    probe(context, g.context);
    for (std::size_t i = 0; i < k; ++i) probe(neg[i], g.negatives[i]);
  }
  return verdict(worst < 1e-4, fmt::format("max relative error {:.3g} over 100 configurations (< 1e-4)", worst));
}

// Plain Kendall tau-a for untied data, counted pair by pair.
double kendall(const std::vector<double>& x, const std::vector<double>& y) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += (p > 0) - (p < 0);
    }
  return 2.0 * static_cast<double>(s) / static_cast<double>(x.size() * (x.size() - 1));
}

Verdict plackett_luce() {
  auto rng = make_rng(99);
  std::vector<double> truth(50);
  for (auto& s : truth) s = std::exp(-2 + 4 * uniform01(rng));
  std::vector<ranking::ComparisonRecord> data;
  for (int c = 0; c < 5000; ++c) {
    const auto i = uniform_index(rng, 50);
    auto j = uniform_index(rng, 49);
    if (j >= i) ++j;
    const bool i_wins = uniform01(rng) < truth[i] / (truth[i] + truth[j]);
    data.push_back({"d", fmt::format("c{:02d}", i_wins ? i : j), fmt::format("c{:02d}", i_wins ? j : i), "r"});
  }
  const auto fit = ranking::fit_plackett_luce(data);
  std::vector<double> est;
  for (std::size_t i = 0; i < 50; ++i) est.push_back(fit.scores.at(fmt::format("c{:02d}", i)));
  const double tau = kendall(est, truth);

  // Monotone up to one part in 1e12 of rounding.
  double worst_drop = 0;
  for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
    worst_drop = std::max(worst_drop, (fit.objective_trace[t - 1] - fit.objective_trace[t]) /
                                          std::abs(fit.objective_trace[t - 1]));
  const bool monotone = worst_drop <= 1e-12;

  ranking::PLOptions none;
  none.prior = 0;
  const std::vector<ranking::ComparisonRecord> two{{"d", "A", "B", "r"}, {"d", "A", "B", "r"}, {"d", "B", "A", "r"}};
  const auto pair = ranking::fit_plackett_luce(two, none);
  const double ratio = pair.scores.at("A") / pair.scores.at("B");
  return verdict(tau >= 0.9 && monotone && fit.converged && std::abs(ratio - 2) <= 1e-6,
                 fmt::format("Kendall tau {:.3f} (>= 0.9); {} MM iterations, objective {} (largest relative drop {:.2g}); "
                             "two-item ratio {:.9f} (2 +- 1e-6)",
                             tau, fit.iterations, monotone ? "monotone" : "NOT monotone", std::max(0.0, worst_drop),
                             ratio));
}

double tau_c_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  long long p = 0, q = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool up = (x[i] < x[j] && y[i] < y[j]) || (x[i] > x[j] && y[i] > y[j]);
      const bool down = (x[i] < x[j] && y[i] > y[j]) || (x[i] > x[j] && y[i] < y[j]);
      p += up;
      q += down;
    }
  const double m = static_cast<double>(std::min(std::set<double>(x.begin(), x.end()).size(),
                                                std::set<double>(y.begin(), y.end()).size()));
  const double n = static_cast<double>(x.size());
  return 2.0 * m * static_cast<double>(p - q) / (n * n * (m - 1.0));
}

Verdict tau_c_oracle() {
  auto rng = make_rng(5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    const auto kx = 2 + uniform_index(rng, 9), ky = 2 + uniform_index(rng, 9);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(uniform_index(rng, kx));
    for (auto& v : y) v = static_cast<double>(uniform_index(rng, ky));
    x[0] = 0, x[1] = 1, y[0] = 0, y[1] = 1;
    mismatches += ranking::tau_c(x, y) != tau_c_pairs(x, y);
  }
  using V = std::vector<double>;
  const double h1 = ranking::tau_c(V{1, 2, 3}, V{1, 2, 3}), h2 = ranking::tau_c(V{1, 2, 3}, V{3, 2, 1}),
               h3 = ranking::tau_c(V{1, 1, 2}, V{1, 2, 2});
  const bool hand = h1 == 1.0 && h2 == -1.0 && h3 == 4.0 / 9.0;
  return verdict(mismatches == 0 && hand, fmt::format("{} of 100 tied sequences differ from the pair-counting oracle; "
                                                      "hand values {}, {}, {:.17g}",
                                                      mismatches, h1, h2, h3));
}

Verdict triplets() {
  auto rng = make_rng(2000);
  EmbeddingTable t(16);
  for (int i = 0; i < 2000; ++i) {
    Vector v(16);
    for (auto& x : v) x = normal01(rng);
    t.set(fmt::format("p{:04d}", i), v);
  }
  std::vector<std::pair<std::string, const Vector*>> all;
  for (const auto& [id, v] : t) all.emplace_back(id, &v);

  std::size_t checked = 0, bad = 0;
  std::string counts;
  for (std::size_t k : {110u, 220u, 440u}) {
    const auto r = eval::sample_triplets(t, k, 1000, 10 + k, "soc");
    counts += fmt::format(" k={}:{}", k, r.triplets.size());
    for (const auto& tr : r.triplets) {
      ++checked;
      const auto& a = t.at(tr.a);
      const double db = cosine_distance(a, t.at(tr.b)), dc = cosine_distance(a, t.at(tr.c));
      std::size_t closer_b = 0, closer_c = 0, within_c = 0;
      for (const auto& [id, v] : all) {
        if (id == tr.a) continue;
        const double d = cosine_distance(a, *v);
        closer_b += d < db;
        closer_c += d < dc;
        within_c += d <= dc;
      }
      const bool ok = tr.a != tr.b && tr.b != tr.c && tr.a != tr.c && closer_b == 0 && closer_c < k && within_c >= k &&
                      db < cosine_distance(t.at(tr.b), t.at(tr.c));
      bad += !ok;
    }
  }
  return verdict(checked == 3000 && bad == 0,
                 fmt::format("{} triplets sampled ({}), {} fail brute-force verification", checked, counts, bad));
}

Verdict forest_sanity() {
  auto rng = make_rng(77);
  EmbeddingTable t(8);
  std::map<std::string, std::string> cats;
  for (int i = 0; i < 200; ++i) {
    const bool pos = i < 100;
    Vector v(8);
    for (auto& x : v) x = normal01(rng);
    v[0] += pos ? 3 : -3;
    v[3] += pos ? 3 : -3;
    const auto id = fmt::format("ch{:03d}", i);
    t.set(id, v);
    cats[id] = pos ? "Gaming" : (i % 3 ? "Music" : "Education");
  }
  eval::CategoryConfig cfg;
  cfg.seed = 8;
  const auto real = eval::eval_category(t, cats, "Gaming", cfg);

  std::vector<std::string> labels;
  for (const auto& [_, c] : cats) labels.push_back(c);
  shuffle(labels, rng);
  std::size_t i = 0;
  for (auto& [_, c] : cats) c = labels[i++];
  const auto permuted = eval::eval_category(t, cats, "Gaming", cfg);
  return verdict(real.mean_f1 >= 0.95 && std::abs(permuted.mean_f1 - 0.5) <= 0.1,
                 fmt::format("separable F1 {:.3f} (>= 0.95), permuted-label F1 {:.3f} (0.5 +- 0.1), 100 reps",
                             real.mean_f1, permuted.mean_f1));
}

Verdict ztest() {
  const auto big = ranking::two_proportion_ztest(90, 100, 50, 100);
  const auto same = ranking::two_proportion_ztest(40, 100, 40, 100);
  const bool ok = std::abs(big.z - 6.03) <= 0.01 && big.significant && same.z == 0 && !same.significant;
  return verdict(ok, fmt::format("90/100 vs 50/100: z = {:.4f} (required 6.03 +- 0.01), significant = {}; "
                                 "equal proportions: z = {}",
                                 big.z, big.significant, same.z));
}

// ---------------------------------------------------------------------------
// End-to-end over the bundled mini-dataset, twice.

int shell(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<std::string> pipeline(const std::string& out) {
  const std::string d = T2V_MINI_DIR, o = out;
  return {
      fmt::format("ingest --tuples {d}/tuples.tsv --channels {d}/channels.jsonl --video-map {d}/video_channels.tsv "
                  "--max-videos-per-author 25 --out-matrix {o}/W.txt --out-channels {o}/retained.jsonl "
                  "--out-categories {o}/categories.csv",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("embed-soc --matrix {o}/W.txt --subreddits {d}/subreddits.emb --out {o}/soc.emb", fmt::arg("d", d),
                  fmt::arg("o", o)),
      fmt::format("embed-con --vectors {d}/video_vectors.txt --channels {o}/retained.jsonl --out {o}/con.emb",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("embed-rec --crawl {d}/crawl.jsonl --channels {o}/retained.jsonl --dim 32 --walks-per-node 5 "
                  "--walk-length 40 --epochs 3 --graph-out {o}/graph.txt --walks-out {o}/walks.txt --out {o}/rec.emb",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("dims --subreddits {d}/subreddits.emb --channels {o}/soc.emb --seeds {d}/seeds.csv --out-dir {o}/dims",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("transfer --target {o}/rec.emb --scores {o}/dims/partisan.scores --trees 50 --oob --standardize "
                  "--out {o}/rec_partisan.scores",
                  fmt::arg("o", o)),
      fmt::format("transfer --target {o}/con.emb --scores {o}/dims/partisan.scores --trees 50 --oob --standardize "
                  "--out {o}/con_partisan.scores",
                  fmt::arg("o", o)),
      fmt::format("sample-bins --scores {o}/dims/partisan.scores --ness {o}/dims/partisan-ness.scores --per-bin 5 "
                  "--out {o}/bins.csv",
                  fmt::arg("o", o)),
      fmt::format("pl-fit --comparisons {d}/comparisons.csv --dimension partisan --out {o}/pl.scores", fmt::arg("d", d),
                  fmt::arg("o", o)),
      fmt::format("eval-category --embedding soc={o}/soc.emb --embedding con={o}/con.emb --embedding rec={o}/rec.emb "
                  "--categories {o}/categories.csv --target Gaming --target Music --reps 10 --per-class 40 --trees 50 "
                  "--out {o}/category.csv",
                  fmt::arg("o", o)),
      fmt::format("sample-triplets --embedding soc={o}/soc.emb --embedding con={o}/con.emb --embedding rec={o}/rec.emb "
                  "--k 5,10,20 --n 60 --out {o}/triplets.csv",
                  fmt::arg("o", o)),
      fmt::format("eval-triplets --triplets {d}/crowd_triplets.csv --judgments {d}/judgments.csv "
                  "--embedding soc={o}/soc.emb --embedding con={o}/con.emb --embedding rec={o}/rec.emb "
                  "--out {o}/agreement.csv",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("eval-rank --scores soc={o}/dims/partisan.scores --scores con={o}/con_partisan.scores "
                  "--scores rec={o}/rec_partisan.scores --labels {d}/labels.csv --bootstrap 300 --out {o}/rank_labels.csv",
                  fmt::arg("d", d), fmt::arg("o", o)),
      fmt::format("eval-rank --scores soc={o}/dims/partisan.scores --scores con={o}/con_partisan.scores "
                  "--scores rec={o}/rec_partisan.scores --reference {o}/pl.scores --bootstrap 300 --out {o}/rank_pl.csv",
                  fmt::arg("o", o)),
      "ztest --hits1 90 --n1 100 --hits2 50 --n2 100",
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict end_to_end() {
  const auto t0 = Clock::now();
  const auto root = fs::temp_directory_path() / "t2v_acceptance_e2e";
  fs::remove_all(root);
  std::set<std::string> subcommands;
  for (const char* run : {"run1", "run2"}) {
    const auto out = root / run;
    fs::create_directories(out);
    std::size_t step = 0;
    for (const auto& args : pipeline(out.string())) {
      subcommands.insert(args.substr(0, args.find(' ')));
      const auto cmd = fmt::format("\"{}\" --seed 17 --threads 1 {} > {}/stdout_{:02d}.txt 2> {}/stderr_{:02d}.txt",
                                   T2V_BINARY, args, out.string(), step, out.string(), step);
      if (const int rc = shell(cmd); rc != 0)
        return verdict(false, fmt::format("{}: step {} exited with {}: {}", run, step, rc, args));
      ++step;
    }
  }
  std::size_t files = 0, differing = 0;
  std::string first_diff;
  for (const auto& e : fs::recursive_directory_iterator(root / "run1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), root / "run1");
    if (slurp(e.path()) != slurp(root / "run2" / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = subcommands.size() == 13 && differing == 0 && secs < 300;
  if (ok) fs::remove_all(root);
  return verdict(ok, fmt::format("{} subcommands, {} output files, {} differ{}; {:.1f} s for both runs (< 300 s)",
                                 subcommands.size(), files, differing,
                                 first_diff.empty() ? "" : " (first: " + first_diff + ")", secs));
}

// Needs the released data: partisan_{soc,con,rec}.scores plus labels.csv.
Verdict released_labels() {
  const fs::path dir = std::getenv("T2V_RELEASE_DIR") ? std::getenv("T2V_RELEASE_DIR") : T2V_RELEASE_DIR;
  const char* names[] = {"soc", "con", "rec"};
  const double want[] = {0.67, 0.37, 0.49};
  if (!fs::exists(dir / "labels.csv")) return {Outcome::skip, fmt::format("no released data under {}", dir.string())};
  auto lin = io::open_in((dir / "labels.csv").string());
  const auto labels = ranking::read_labels(lin);
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const auto path = dir / fmt::format("partisan_{}.scores", names[i]);
    if (!fs::exists(path)) return {Outcome::skip, "missing " + path.string()};
    auto in = io::open_in(path.string());
    const double tau = ranking::label_correlation(dims::read_scores(in).scores, labels);
    ok = ok && std::abs(tau - want[i]) <= 0.02;
    detail += fmt::format("{} {:.3f} (want {:.2f} +- 0.02)  ", names[i], tau, want[i]);
  }
  return verdict(ok, detail);
}

struct Criterion {
  int id;
  const char* title;
  bool blocking;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  log::set_level(log::Level::error);
  const std::vector<Criterion> criteria{
      {1, "C = W x S exactness", true, social_product},
      {2, "planted-partition recovery", true, planted_partition},
      {3, "SGNS gradient check", true, sgns_gradient},
      {4, "Plackett-Luce recovery", true, plackett_luce},
      {5, "tau-c oracle equivalence", true, tau_c_oracle},
      {6, "triplet invariants", true, triplets},
      {7, "forest sanity", true, forest_sanity},
      {8, "two-proportion z-test", true, ztest},
      {9, "end-to-end determinism", true, end_to_end},
      {10, "released-label correlation (optional)", false, released_labels},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
    fmt::print("[{}] criterion {:>2}: {} | {}\n", tag, c.id, c.title, v.detail);
    std::fflush(stdout);
    if (v.outcome == Outcome::fail && c.blocking) ++failed;
  }
  fmt::print("{} blocking criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
