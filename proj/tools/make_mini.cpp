// Writes the bundled synthetic mini-dataset. Channels carry a latent category
// and a political lean; every artifact (tuples, crawl, text vectors, crowd
// fixtures) is drawn from those latents so the pipeline has signal to find.

#include "t2v/embedding.hpp"
#include "t2v/evaluation.hpp"
#include "t2v/ingest.hpp"
#include "t2v/io.hpp"
#include "t2v/ranking.hpp"
#include "t2v/recgraph.hpp"
#include "t2v/rng.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace {

using t2v::Rng;
using t2v::Vector;

struct Category {
  const char* name;
  std::size_t channels;
  const char* stem;  // subreddit name stem
};

constexpr Category kCategories[] = {
    {"Gaming", 110, "games"},
    {"Music", 50, "music"},
    {"News & Politics", 50, "news"},
    {"Education", 40, "learn"},
};
constexpr std::size_t kSubsPerCategory = 5;
constexpr std::size_t kVideosPerChannel = 3;
constexpr std::size_t kTextDim = 24;
constexpr std::size_t kSubDim = 16;
constexpr std::size_t kDropped = 15;
constexpr std::int64_t kT0 = 1500000000;

struct Channel {
  std::string id;
  std::size_t category;
  double lean;  // -1 left ... +1 right, only meaningful for news
  bool retained;
  std::vector<std::string> videos;
};

Vector random_unit(std::size_t d, Rng& rng) {
  Vector v(d);
  double n = 0;
  for (auto& x : v) {
    x = t2v::normal01(rng);
    n += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n);
  return v;
}

std::string pick(const std::vector<std::string>& v, Rng& rng) { return v[t2v::uniform_index(rng, v.size())]; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic mini-dataset", "t2v-make-mini"};
  std::string out_dir = "data/mini";
  std::uint64_t seed = 7;
  app.add_option("--out", out_dir)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  auto rng = t2v::make_rng(seed);

  // Channels ------------------------------------------------------------------
  std::vector<Channel> channels;
  std::size_t next_id = 0;
  for (std::size_t c = 0; c < std::size(kCategories); ++c) {
    for (std::size_t i = 0; i < kCategories[c].channels + (c == 0 ? kDropped : 0); ++i) {
      Channel ch{fmt::format("UC{:04d}", next_id++), c, 2 * t2v::uniform01(rng) - 1, true, {}};
      ch.retained = !(c == 0 && i >= kCategories[c].channels);
      for (std::size_t v = 0; v < kVideosPerChannel; ++v) ch.videos.push_back(fmt::format("{}v{}", ch.id, v));
      channels.push_back(std::move(ch));
    }
  }
  std::vector<std::vector<std::size_t>> by_category(std::size(kCategories));
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].retained) by_category[channels[i].category].push_back(i);

  std::vector<t2v::ingest::ChannelRecord> records;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& ch = channels[i];
    t2v::ingest::ChannelRecord r;
    r.channel_id = ch.id;
    r.name = fmt::format("{} channel {}", kCategories[ch.category].stem, i);
    r.subscribers = 150000 + t2v::uniform_index(rng, 5000000);
    r.language = "en-US";
    if (!ch.retained) {
      // Half fail the subscriber threshold, half the language filter; one has no count at all.
      if (i % 2 == 0) r.subscribers = 1000 + t2v::uniform_index(rng, 90000);
      else r.language = "pt-BR";
      if (i % 5 == 0) r.subscribers.reset();
    }
    r.views = 1000000 + t2v::uniform_index(rng, 100000000);
    r.created_at = kT0 - static_cast<std::int64_t>(t2v::uniform_index(rng, 200000000));
    for (std::size_t v = 0; v < ch.videos.size(); ++v) {
      t2v::ingest::VideoRecord vr;
      vr.video_id = ch.videos[v];
      vr.title = fmt::format("{} video {}", kCategories[ch.category].stem, v);
      // The last video is sometimes off-topic; the majority stays with the channel's category.
      const bool off = v + 1 == ch.videos.size() && t2v::uniform01(rng) < 0.3;
      vr.category = off ? "People & Blogs" : kCategories[ch.category].name;
      vr.views = 1000 + t2v::uniform_index(rng, 1000000);
      r.videos.push_back(std::move(vr));
    }
    records.push_back(std::move(r));
  }
  {
    auto out = t2v::io::open_out(path("channels.jsonl"));
    t2v::ingest::write_channels(out, records);
  }

  // Subreddits and their embedding ----------------------------------------------
  std::vector<std::vector<std::string>> cat_subs(std::size(kCategories));
  t2v::EmbeddingTable subs(kSubDim);
  std::vector<Vector> centroids;
  for (std::size_t c = 0; c < std::size(kCategories); ++c) centroids.push_back(random_unit(kSubDim, rng));
  const auto lean_dir = random_unit(kSubDim, rng);
  const auto politics = random_unit(kSubDim, rng);
  auto noisy = [&](const Vector& base, double scale) {
    Vector v = base;
    for (auto& x : v) x += scale * t2v::normal01(rng);
    return v;
  };
  for (std::size_t c = 0; c < std::size(kCategories); ++c)
    for (std::size_t k = 0; k < kSubsPerCategory; ++k) {
      const auto name = fmt::format("{}{}", kCategories[c].stem, k);
      cat_subs[c].push_back(name);
      subs.set(name, noisy(centroids[c], 0.2));
    }
  std::vector<std::string> left, right, neutral;
  for (std::size_t k = 0; k < 3; ++k) {
    left.push_back(fmt::format("left{}", k));
    right.push_back(fmt::format("right{}", k));
    neutral.push_back(fmt::format("casual{}", k));
    Vector l = politics, r = politics;
    for (std::size_t d = 0; d < kSubDim; ++d) {
      l[d] -= lean_dir[d];
      r[d] += lean_dir[d];
    }
    subs.set(left.back(), noisy(l, 0.15));
    subs.set(right.back(), noisy(r, 0.15));
    subs.set(neutral.back(), noisy(Vector(kSubDim, 0.0), 0.3));
  }
  t2v::save_embedding(path("subreddits.emb"), subs);
  {
    auto out = t2v::io::open_out(path("seeds.csv"));
    out << "# dimension,low,high\n";
    for (std::size_t k = 0; k < 3; ++k) out << "partisan," << left[k] << ',' << right[k] << '\n';
    for (std::size_t k = 0; k < 3; ++k) {
      out << "partisan-ness," << neutral[k] << ',' << left[k] << '\n';
      out << "partisan-ness," << neutral[k] << ',' << right[k] << '\n';
    }
  }

  // Sharing tuples and the video map ----------------------------------------------
  std::vector<t2v::ingest::SharingTuple> tuples;
  auto tuple = [&](std::string sub, std::string video, std::string author) {
    tuples.push_back({std::move(sub), std::move(video), std::move(author),
                      t2v::uniform01(rng) < 0.5 ? t2v::ingest::TupleSource::post : t2v::ingest::TupleSource::comment,
                      kT0 + static_cast<std::int64_t>(t2v::uniform_index(rng, 100000000)), std::nullopt});
  };
  for (const auto& ch : channels)
    for (const auto& video : ch.videos)
      for (std::size_t m = 0; m < 4; ++m) {
        const auto author = fmt::format("u{}", t2v::uniform_index(rng, 400));
        const double u = t2v::uniform01(rng);
        if (ch.category == 2 && u < 0.6) {
          // Political channels are shared on the side of their lean.
          const double p_right = 0.5 + 0.45 * ch.lean;
          tuple(pick(t2v::uniform01(rng) < p_right ? right : left, rng), video, author);
        } else if (u < 0.85) {
          tuple(pick(cat_subs[ch.category], rng), video, author);
        } else if (u < 0.93) {
          tuple(pick(neutral, rng), video, author);
        } else {
          tuple(pick(cat_subs[t2v::uniform_index(rng, std::size(kCategories))], rng), video, author);
        }
      }
  // One author sharing too many distinct videos.
  for (std::size_t i = 0; i < 30; ++i) tuple(pick(right, rng), pick(channels[i].videos, rng), "spammer");
  {
    auto out = t2v::io::open_out(path("tuples.tsv"));
    t2v::ingest::write_tuples(out, tuples);
    out << "malformed line without enough fields\n";
    out << "news0\tUC0000v0\tu1\tpost\tnot-a-time\n";
  }
  {
    auto out = t2v::io::open_out(path("video_channels.tsv"));
    for (const auto& ch : channels)
      for (const auto& v : ch.videos) out << v << '\t' << ch.id << '\n';
  }

  // Recommendation crawl ------------------------------------------------------------
  std::vector<t2v::rec::CrawlRecord> crawl;
  for (const auto& ch : channels) {
    if (!ch.retained) continue;
    for (std::size_t r = 0; r < 4; ++r) {
      t2v::rec::CrawlRecord rec{pick(ch.videos, rng), ch.id,
                                kT0 + static_cast<std::int64_t>(t2v::uniform_index(rng, 1000000)), {}};
      for (std::size_t k = 0; k < 5; ++k) {
        const Channel* target = nullptr;
        if (t2v::uniform01(rng) < 0.85) {
          const auto& pool = by_category[ch.category];
          target = &channels[pool[t2v::uniform_index(rng, pool.size())]];
          // News recommendations mostly stay on the same side.
          if (ch.category == 2 && target->lean * ch.lean < 0 && t2v::uniform01(rng) < 0.7)
            target = &channels[pool[t2v::uniform_index(rng, pool.size())]];
        } else {
          target = &channels[t2v::uniform_index(rng, channels.size())];
        }
        rec.recommendations.emplace_back(pick(target->videos, rng), target->id);
      }
      crawl.push_back(std::move(rec));
    }
  }
  {
    auto out = t2v::io::open_out(path("crawl.jsonl"));
    t2v::rec::write_crawl_records(out, crawl);
  }

  // Per-video text vectors, four decimals to keep the file small -----------------------
  {
    std::vector<Vector> text_centroids;
    for (std::size_t c = 0; c < std::size(kCategories); ++c) text_centroids.push_back(random_unit(kTextDim, rng));
    auto out = t2v::io::open_out(path("video_vectors.txt"));
    auto line = [&](const std::string& id, const char* tag, const Vector& base) {
      out << id << ' ' << tag;
      for (double x : base) out << fmt::format(" {:.4f}", x + 0.35 * t2v::normal01(rng));
      out << '\n';
    };
    for (const auto& ch : channels)
      for (const auto& v : ch.videos) {
        line(v, "title", text_centroids[ch.category]);
        if (t2v::uniform01(rng) < 0.8) line(v, "description", text_centroids[ch.category]);
      }
  }

  // Crowd fixtures: pairwise partisan comparisons, labels, odd-one-out judgments ----------
  const auto& news = by_category[2];
  {
    std::vector<t2v::ranking::ComparisonRecord> comps;
    for (std::size_t i = 0; i < 600; ++i) {
      const auto a = news[t2v::uniform_index(rng, news.size())];
      auto b = news[t2v::uniform_index(rng, news.size() - 1)];
      if (b == a) b = news.back();
      const double sa = std::exp(2 * channels[a].lean), sb = std::exp(2 * channels[b].lean);
      const bool a_wins = t2v::uniform01(rng) < sa / (sa + sb);
      comps.push_back({"partisan", channels[a_wins ? a : b].id, channels[a_wins ? b : a].id,
                       fmt::format("rater{}", t2v::uniform_index(rng, 20))});
    }
    auto out = t2v::io::open_out(path("comparisons.csv"));
    out << "# dimension,winner,loser,rater\n";
    t2v::ranking::write_comparisons(out, comps);
  }
  {
    static const char* labels[] = {"extreme-left", "left", "center-left", "center", "center-right", "right",
                                   "extreme-right"};
    auto out = t2v::io::open_out(path("labels.csv"));
    for (auto i : news) {
      const auto bin = std::min<std::size_t>(6, static_cast<std::size_t>((channels[i].lean + 1) / 2 * 7));
      out << channels[i].id << ',' << labels[bin] << '\n';
    }
  }
  {
    std::vector<t2v::eval::TripletJudgment> judgments;
    const std::size_t ks[] = {110, 220, 440};
    for (std::size_t i = 0; i < 90; ++i) {
      const auto c1 = t2v::uniform_index(rng, std::size(kCategories));
      const auto c2 = (c1 + 1 + t2v::uniform_index(rng, std::size(kCategories) - 1)) % std::size(kCategories);
      const auto& p1 = by_category[c1];
      const auto& p2 = by_category[c2];
      const auto a = p1[t2v::uniform_index(rng, p1.size())];
      auto b = p1[t2v::uniform_index(rng, p1.size() - 1)];
      if (b == a) b = p1.back();
      const auto c = p2[t2v::uniform_index(rng, p2.size())];
      t2v::eval::TripletJudgment j;
      j.triplet = {fmt::format("crowd-{}", i), channels[a].id, channels[b].id, channels[c].id, "crowd", ks[i % 3]};
      const std::string trio[] = {j.triplet.a, j.triplet.b, j.triplet.c};
      for (std::size_t w = 0; w < t2v::eval::kRatersPerTriplet; ++w)
        ++j.votes[t2v::uniform01(rng) < 0.75 ? j.triplet.c : trio[t2v::uniform_index(rng, 3)]];
      judgments.push_back(std::move(j));
    }
    std::vector<t2v::eval::Triplet> triplets;
    for (const auto& j : judgments) triplets.push_back(j.triplet);
    auto tout = t2v::io::open_out(path("crowd_triplets.csv"));
    t2v::eval::write_triplets(tout, triplets);
    auto jout = t2v::io::open_out(path("judgments.csv"));
    t2v::eval::write_judgments(jout, judgments);
  }
  std::cout << "wrote " << out_dir << '\n';
  return 0;
}
