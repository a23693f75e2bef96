#include "t2v/cli.hpp"

#include "t2v/content.hpp"
#include "t2v/dimensions.hpp"
#include "t2v/embedding.hpp"
#include "t2v/error.hpp"
#include "t2v/evaluation.hpp"
#include "t2v/ingest.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"
#include "t2v/ranking.hpp"
#include "t2v/recgraph.hpp"
#include "t2v/rng.hpp"
#include "t2v/sgns.hpp"
#include "t2v/social.hpp"
#include "t2v/walks.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

namespace t2v::cli {
namespace {

struct Global {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string log_level = "info";
};

using NamedPath = std::pair<std::string, std::string>;

NamedPath parse_named(const std::string& spec) {
  const auto pos = spec.find('=');
  if (pos == std::string::npos || pos == 0 || pos + 1 == spec.size())
    throw Error("expected NAME=PATH, got '" + spec + "'");
  return {spec.substr(0, pos), spec.substr(pos + 1)};
}

std::set<std::string, std::less<>> channel_ids(const std::vector<ingest::ChannelRecord>& channels) {
  std::set<std::string, std::less<>> ids;
  for (const auto& c : channels) ids.insert(c.channel_id);
  return ids;
}

std::vector<ingest::ChannelRecord> load_channels(const std::string& path) {
  auto in = io::open_in(path);
  return ingest::read_channels(in).channels;
}

std::map<std::string, std::string> load_categories(const std::string& path) {
  auto in = io::open_in(path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto pos = t.find(',');
    if (pos == std::string_view::npos) throw Error(path + ": category lines must be 'channel_id,category'");
    out.insert_or_assign(std::string(t.substr(0, pos)), std::string(t.substr(pos + 1)));
  }
  return out;
}

void add_forest_flags(CLI::App* cmd, forest::ForestConfig& cfg) {
  cmd->add_option("--trees", cfg.n_trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", cfg.max_depth, "Maximum tree depth (0 = unlimited)")->capture_default_str();
  cmd->add_option("--min-leaf", cfg.min_leaf, "Minimum samples per leaf")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--max-features", cfg.fixed_features, "Features per split (overrides sqrt rule)")
      ->each([&cfg](const std::string&) { cfg.features = forest::FeatureRule::fixed; });
}

struct Command {
  CLI::App* app;
  std::function<void()> run;
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Channel embeddings from social sharing, content and recommendations, and their evaluation", "t2v"};
  app.set_config("--config", "", "Read options from a TOML/INI file (flags win)");
  Global g;
  app.add_option("--seed", g.seed, "Global seed; every stage derives its own")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (1 = deterministic)")->capture_default_str();
  app.add_option("--log-level", g.log_level, "debug|info|warn|error")
      ->capture_default_str()
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
  app.require_subcommand(1);

  std::vector<Command> commands;

  // ingest -------------------------------------------------------------------
  struct {
    std::string tuples, channels, overrides, out_matrix, out_channels, out_categories;
    std::vector<std::string> maps;
    std::uint64_t min_subscribers = 100000;
    std::string language = "en";
    std::size_t max_videos = 1000;
  } ing;
  {
    auto* c = app.add_subcommand("ingest", "Filter tuples and channels and build the sharing matrix");
    c->add_option("--tuples", ing.tuples, "Tab-separated sharing tuples")->required()->check(CLI::ExistingFile);
    c->add_option("--channels", ing.channels, "Channel records (JSON Lines)")->required()->check(CLI::ExistingFile);
    c->add_option("--video-map", ing.maps, "video_id<TAB>channel_id map (repeatable)")->required()->check(CLI::ExistingFile);
    c->add_option("--language-overrides", ing.overrides, "channel_id<TAB>language tag")->check(CLI::ExistingFile);
    c->add_option("--min-subscribers", ing.min_subscribers)->capture_default_str();
    c->add_option("--language", ing.language)->capture_default_str();
    c->add_option("--max-videos-per-author", ing.max_videos)->capture_default_str();
    c->add_option("--out-matrix", ing.out_matrix, "Sharing matrix output (writes .rows/.cols too)")->required();
    c->add_option("--out-channels", ing.out_channels, "Retained channel records")->required();
    c->add_option("--out-categories", ing.out_categories, "channel_id,majority category");
    commands.push_back({c, [&] {
      auto tin = io::open_in(ing.tuples);
      auto parsed = ingest::parse_tuples(tin);
      ingest::VideoChannelMap map;
      for (const auto& p : ing.maps) {
        auto min = io::open_in(p);
        for (auto& [v, ch] : ingest::read_video_channel_map(min)) map.insert_or_assign(v, ch);
      }
      const auto spam_free = ingest::filter_spam(parsed.tuples, ing.max_videos);
      ingest::LanguageOverrides overrides;
      if (!ing.overrides.empty()) {
        auto oin = io::open_in(ing.overrides);
        overrides = ingest::read_language_overrides(oin);
      }
      const auto channels = ingest::filter_channels(load_channels(ing.channels), ing.min_subscribers, ing.language,
                                                    ing.overrides.empty() ? nullptr : &overrides);
      const auto built = ingest::build_sharing_matrix(spam_free, map, channel_ids(channels));
      ingest::save_sharing_matrix(ing.out_matrix, built.matrix);
      std::set<std::string, std::less<>> in_matrix(built.matrix.channels.begin(), built.matrix.channels.end());
      std::vector<ingest::ChannelRecord> kept;
      for (const auto& ch : channels)
        if (in_matrix.contains(ch.channel_id)) kept.push_back(ch);
      auto cout_ = io::open_out(ing.out_channels);
      ingest::write_channels(cout_, kept);
      if (!ing.out_categories.empty()) {
        auto cat = io::open_out(ing.out_categories);
        for (const auto& ch : kept) cat << ch.channel_id << ',' << ingest::majority_category(ch) << '\n';
      }
      log::info("ingest", "tuples={} skipped={} spam_removed={} channels_retained={} matrix={}x{} nnz={}",
                parsed.tuples.size(), parsed.skipped, parsed.tuples.size() - spam_free.size(), kept.size(),
                built.matrix.rows(), built.matrix.cols(), built.matrix.nonzeros());
    }});
  }

  // embed-soc ----------------------------------------------------------------
  struct {
    std::string matrix, subreddits, out;
    double min_mass = 0.5;
  } soc;
  {
    auto* c = app.add_subcommand("embed-soc", "Channel vectors as W x S");
    c->add_option("--matrix", soc.matrix, "Sharing matrix (with .rows/.cols sidecars)")->required()->check(CLI::ExistingFile);
    c->add_option("--subreddits", soc.subreddits, "Subreddit embedding S")->required()->check(CLI::ExistingFile);
    c->add_option("--min-mass", soc.min_mass, "Minimum surviving row mass")->capture_default_str();
    c->add_option("--out", soc.out)->required();
    commands.push_back({c, [&] {
      const auto w = ingest::load_sharing_matrix(soc.matrix);
      const auto s = load_embedding(soc.subreddits);
      const auto r = social::embed_social(w, s, soc.min_mass);
      save_embedding(soc.out, r.channels);
      log::info("embed_soc", "channels={} omitted={} dim={}", r.channels.size(), r.omitted.size(), r.channels.dim());
    }});
  }

  // embed-rec ----------------------------------------------------------------
  rec::WalkConfig walk_cfg;
  rec::SgnsConfig sgns_cfg;
  struct {
    std::string crawl, channels, out, walks_out, graph_out;
  } recp;
  {
    auto* c = app.add_subcommand("embed-rec", "node2vec over the co-recommendation graph");
    c->add_option("--crawl", recp.crawl, "Crawl records (JSON Lines)")->required()->check(CLI::ExistingFile);
    c->add_option("--channels", recp.channels, "Retained channel records")->required()->check(CLI::ExistingFile);
    c->add_option("--p", walk_cfg.p, "Return parameter")->capture_default_str();
    c->add_option("--q", walk_cfg.q, "In-out parameter")->capture_default_str();
    c->add_option("--walk-length", walk_cfg.walk_length)->capture_default_str();
    c->add_option("--walks-per-node", walk_cfg.walks_per_node)->capture_default_str();
    c->add_option("--dim", sgns_cfg.dim)->capture_default_str();
    c->add_option("--window", sgns_cfg.window)->capture_default_str();
    c->add_option("--negatives", sgns_cfg.negatives)->capture_default_str();
    c->add_option("--epochs", sgns_cfg.epochs)->capture_default_str();
    c->add_option("--lr", sgns_cfg.learning_rate)->capture_default_str();
    c->add_option("--walks-out", recp.walks_out, "Also write the walks");
    c->add_option("--graph-out", recp.graph_out, "Also write the weighted edge list");
    c->add_option("--out", recp.out)->required();
    commands.push_back({c, [&] {
      auto cin_ = io::open_in(recp.crawl);
      const auto records = rec::read_crawl_records(cin_);
      const auto built = rec::build_rec_graph(records, channel_ids(load_channels(recp.channels)));
      if (built.graph.empty()) throw Error("recommendation graph is empty");
      if (!recp.graph_out.empty()) {
        auto gout = io::open_out(recp.graph_out);
        rec::write_edge_list(gout, built.graph);
      }
      walk_cfg.seed = derive_seed(g.seed, "embed-rec/walks");
      walk_cfg.threads = g.threads;
      const auto walks = rec::generate_walks(built.graph, walk_cfg);
      if (!recp.walks_out.empty()) {
        auto wout = io::open_out(recp.walks_out);
        rec::write_walks(wout, built.graph, walks);
      }
      sgns_cfg.seed = derive_seed(g.seed, "embed-rec/sgns");
      sgns_cfg.threads = g.threads;
      const auto r = rec::train_sgns(rec::walks_to_ids(built.graph, walks), sgns_cfg);
      save_embedding(recp.out, r.vectors);
      log::info("embed_rec", "nodes={} edges={} walks={} final_epoch_loss={:.6f}", built.graph.num_nodes(),
                built.graph.num_edges(), walks.size(), r.epoch_loss.back());
    }});
  }

  // embed-con ----------------------------------------------------------------
  struct {
    std::string vectors, channels, out;
  } con;
  {
    auto* c = app.add_subcommand("embed-con", "Average per-video text vectors per channel");
    c->add_option("--vectors", con.vectors, "Per-video vector file")->required()->check(CLI::ExistingFile);
    c->add_option("--channels", con.channels, "Channel records listing each channel's videos")->required()->check(CLI::ExistingFile);
    c->add_option("--out", con.out)->required();
    commands.push_back({c, [&] {
      auto vin = io::open_in(con.vectors);
      const auto vectors = content::read_video_vectors(vin);
      content::ChannelVideos index;
      for (const auto& ch : load_channels(con.channels)) {
        auto& vids = index[ch.channel_id];
        for (const auto& v : ch.videos) vids.push_back(v.video_id);
      }
      const auto r = content::aggregate_content(vectors, index);
      save_embedding(con.out, r.channels);
      log::info("embed_con", "channels={} omitted={} dim={}", r.channels.size(), r.omitted.size(), r.channels.dim());
    }});
  }

  // dims ---------------------------------------------------------------------
  struct {
    std::string subreddits, channels, seeds, out_dir;
    bool raw = false;
  } dm;
  {
    auto* c = app.add_subcommand("dims", "Score channels along social dimensions in the sharing space");
    c->add_option("--subreddits", dm.subreddits, "Subreddit embedding S")->required()->check(CLI::ExistingFile);
    c->add_option("--channels", dm.channels, "Social-sharing channel embedding")->required()->check(CLI::ExistingFile);
    c->add_option("--seeds", dm.seeds, "name,low,high seed pairs")->required()->check(CLI::ExistingFile);
    c->add_flag("--raw", dm.raw, "Write raw cosine scores instead of z-scores");
    c->add_option("--out-dir", dm.out_dir, "Writes <dimension>.scores here")->required();
    commands.push_back({c, [&] {
      const auto s = load_embedding(dm.subreddits);
      const auto ch = load_embedding(dm.channels, Provenance::soc);
      auto sin = io::open_in(dm.seeds);
      std::filesystem::create_directories(dm.out_dir);
      for (const auto& [name, pairs] : dims::read_seed_pairs(sin)) {
        const auto spec = dims::build_dimension(name, s, pairs);
        auto scores = dims::project(ch, spec).scores;
        if (!dm.raw) scores = dims::standardize(scores);
        auto out = io::open_out((std::filesystem::path(dm.out_dir) / (name + ".scores")).string());
        dims::write_scores(out, scores);
        log::info("dims", "dimension={} pairs={} channels={}", name, pairs.size(), scores.scores.size());
      }
    }});
  }

  // transfer -----------------------------------------------------------------
  forest::ForestConfig transfer_forest;
  struct {
    std::string target, scores, out;
    bool standardize = false;
    bool oob = false;
  } tr;
  {
    auto* c = app.add_subcommand("transfer", "Carry dimension scores to another embedding with a regression forest");
    c->add_option("--target", tr.target, "Target embedding")->required()->check(CLI::ExistingFile);
    c->add_option("--scores", tr.scores, "Training scores (usually from dims)")->required()->check(CLI::ExistingFile);
    c->add_flag("--standardize", tr.standardize, "Standardize the predicted scores");
    c->add_flag("--oob", tr.oob, "Score training channels out-of-bag instead of in-sample");
    add_forest_flags(c, transfer_forest);
    c->add_option("--out", tr.out)->required();
    commands.push_back({c, [&] {
      const auto target = load_embedding(tr.target);
      auto sin = io::open_in(tr.scores);
      const auto train = dims::read_scores(sin);
      transfer_forest.seed = derive_seed(g.seed, "transfer/" + train.dimension);
      transfer_forest.threads = g.threads;
      auto r = dims::transfer_dimension(target, train, transfer_forest, dims::kMinTransferOverlap, tr.oob);
      if (tr.standardize) r.scores = dims::standardize(r.scores);
      auto out = io::open_out(tr.out);
      dims::write_scores(out, r.scores);
      fmt::print("dimension={} training_channels={} oob_r2={}\n", train.dimension, r.training_channels,
                 r.oob_r2 ? format_real(*r.oob_r2) : "n/a");
    }});
  }

  // sample-bins --------------------------------------------------------------
  struct {
    std::string scores, ness, out;
    std::vector<double> dim_edges = dims::kDefaultDimEdges, ness_edges = dims::kDefaultNessEdges;
    std::size_t per_bin = 10;
  } sb;
  {
    auto* c = app.add_subcommand("sample-bins", "Stratified channel sample over dimension x ness bins");
    c->add_option("--scores", sb.scores, "Standardized dimension scores")->required()->check(CLI::ExistingFile);
    c->add_option("--ness", sb.ness, "Standardized -ness scores")->required()->check(CLI::ExistingFile);
    c->add_option("--dim-edges", sb.dim_edges)->delimiter(',')->capture_default_str();
    c->add_option("--ness-edges", sb.ness_edges)->delimiter(',')->capture_default_str();
    c->add_option("--per-bin", sb.per_bin)->capture_default_str();
    c->add_option("--out", sb.out)->required();
    commands.push_back({c, [&] {
      auto s1 = io::open_in(sb.scores);
      auto s2 = io::open_in(sb.ness);
      const auto scores = dims::read_scores(s1);
      const auto ness = dims::read_scores(s2);
      const auto r = dims::sample_bins(scores, ness, sb.dim_edges, sb.ness_edges, sb.per_bin,
                                       derive_seed(g.seed, "sample-bins/" + scores.dimension));
      auto out = io::open_out(sb.out);
      out << "channel_id,dim_bin,ness_bin\n";
      for (const auto& b : r.bins)
        for (const auto& id : b.channels) out << id << ',' << b.dim_bin << ',' << b.ness_bin << '\n';
      fmt::print("bins={} sampled={} excluded={}\n", r.bins.size(), r.sampled().size(), r.excluded.size());
    }});
  }

  // pl-fit -------------------------------------------------------------------
  ranking::PLOptions pl_opt;
  struct {
    std::string comparisons, dimension, out;
  } pl;
  {
    auto* c = app.add_subcommand("pl-fit", "Plackett-Luce scores from pairwise judgments");
    c->add_option("--comparisons", pl.comparisons, "dimension,winner,loser,rater lines")->required()->check(CLI::ExistingFile);
    c->add_option("--dimension", pl.dimension, "Only use comparisons of this dimension");
    c->add_option("--prior", pl_opt.prior, "Virtual wins against an anchor per item")->capture_default_str();
    c->add_option("--tol", pl_opt.tol)->capture_default_str();
    c->add_option("--max-iter", pl_opt.max_iter)->capture_default_str();
    c->add_option("--out", pl.out)->required();
    commands.push_back({c, [&] {
      auto in = io::open_in(pl.comparisons);
      auto all = ranking::read_comparisons(in);
      std::vector<ranking::ComparisonRecord> used;
      for (auto& r : all)
        if (pl.dimension.empty() || r.dimension == pl.dimension) used.push_back(std::move(r));
      const auto fit = ranking::fit_plackett_luce(used, pl_opt);
      dims::DimensionScores scores{pl.dimension.empty() ? "pl" : pl.dimension, fit.scores, false};
      auto out = io::open_out(pl.out);
      dims::write_scores(out, scores);
      fmt::print("items={} comparisons={} iterations={} converged={} log_likelihood={}\n", fit.scores.size(),
                 used.size(), fit.iterations, fit.converged, format_real(fit.log_likelihood));
    }});
  }

  // eval-category ------------------------------------------------------------
  eval::CategoryConfig cat_cfg;
  struct {
    std::vector<std::string> embeddings, targets;
    std::string categories, out;
  } ec;
  {
    auto* c = app.add_subcommand("eval-category", "Category-prediction F1 per embedding");
    c->add_option("--embedding", ec.embeddings, "NAME=PATH (repeatable)")->required();
    c->add_option("--categories", ec.categories, "channel_id,category lines")->required()->check(CLI::ExistingFile);
    c->add_option("--target", ec.targets, "Category to predict (repeatable)")->required();
    c->add_option("--reps", cat_cfg.reps)->capture_default_str();
    c->add_option("--per-class", cat_cfg.per_class)->capture_default_str();
    add_forest_flags(c, cat_cfg.forest);
    c->add_option("--out", ec.out, "Comma-separated results");
    commands.push_back({c, [&] {
      const auto cats = load_categories(ec.categories);
      std::vector<NamedPath> named;
      for (const auto& s : ec.embeddings) named.push_back(parse_named(s));
      std::vector<EmbeddingTable> tables;
      for (const auto& [_, p] : named) tables.push_back(load_embedding(p));
      std::string csv = "category,embedding,mean_f1,correct,tested\n";
      fmt::print("{:<20}", "Category");
      for (const auto& [n, _] : named) fmt::print(" {:>10}", n);
      fmt::print("\n");
      for (const auto& target : ec.targets) {
        fmt::print("{:<20}", target);
        for (std::size_t e = 0; e < named.size(); ++e) {
          auto cfg = cat_cfg;
          cfg.seed = derive_seed(g.seed, "eval-category/" + target);  // same draws for every embedding
          cfg.forest.threads = g.threads;
          const auto r = eval::eval_category(tables[e], cats, target, cfg);
          fmt::print(" {:>10.4f}", r.mean_f1);
          csv += fmt::format("{},{},{},{},{}\n", target, named[e].first, format_real(r.mean_f1), r.correct, r.tested);
        }
        fmt::print("\n");
      }
      if (!ec.out.empty()) io::open_out(ec.out) << csv;
    }});
  }

  // sample-triplets ----------------------------------------------------------
  struct {
    std::vector<std::string> embeddings;
    std::vector<std::size_t> ks{110, 220, 440};
    std::size_t n = 300;
    std::string out;
  } st;
  {
    auto* c = app.add_subcommand("sample-triplets", "Draw odd-channel-out triplets, equally from each embedding");
    c->add_option("--embedding", st.embeddings, "NAME=PATH (repeatable)")->required();
    c->add_option("--k", st.ks, "Neighbour ranks for the odd channel")->delimiter(',')->capture_default_str();
    c->add_option("--n", st.n, "Triplets per k, split equally across embeddings")->capture_default_str();
    c->add_option("--out", st.out)->required();
    commands.push_back({c, [&] {
      std::vector<eval::Triplet> all;
      const auto per = st.n / st.embeddings.size();
      for (const auto& spec : st.embeddings) {
        const auto [name, path] = parse_named(spec);
        const auto table = load_embedding(path);
        for (auto k : st.ks) {
          auto r = eval::sample_triplets(table, k, per, derive_seed(g.seed, fmt::format("sample-triplets/{}/{}", name, k)),
                                         name);
          all.insert(all.end(), r.triplets.begin(), r.triplets.end());
        }
      }
      auto out = io::open_out(st.out);
      eval::write_triplets(out, all);
      fmt::print("triplets={}\n", all.size());
    }});
  }

  // eval-triplets ------------------------------------------------------------
  struct {
    std::string triplets, judgments, out;
    std::vector<std::string> embeddings;
  } et;
  {
    auto* c = app.add_subcommand("eval-triplets", "Agreement between embeddings and rater majorities");
    c->add_option("--triplets", et.triplets)->required()->check(CLI::ExistingFile);
    c->add_option("--judgments", et.judgments)->required()->check(CLI::ExistingFile);
    c->add_option("--embedding", et.embeddings, "NAME=PATH (repeatable)")->required();
    c->add_option("--out", et.out, "Comma-separated results");
    commands.push_back({c, [&] {
      auto tin = io::open_in(et.triplets);
      const auto triplets = eval::read_triplets(tin);
      auto jin = io::open_in(et.judgments);
      const auto judgments = eval::read_judgments(jin, triplets);
      std::vector<NamedPath> named;
      for (const auto& s : et.embeddings) named.push_back(parse_named(s));
      std::vector<EmbeddingTable> tables;
      for (const auto& [_, p] : named) tables.push_back(load_embedding(p));
      // Keep judgments whose channels every embedding covers, so rates are comparable.
      std::vector<eval::TripletJudgment> usable;
      for (const auto& j : judgments) {
        bool ok = true;
        for (const auto& t : tables)
          ok = ok && t.contains(j.triplet.a) && t.contains(j.triplet.b) && t.contains(j.triplet.c);
        if (ok) usable.push_back(j);
      }
      std::string csv = "table,stratum,embedding,rate,hits,n\n";
      auto rate_str = [](const eval::Agreement& a) { return a.rate ? fmt::format("{:.4f}", *a.rate) : std::string("n/a"); };
      auto print_row = [&](const std::string& table, const std::string& label,
                           const std::vector<eval::TripletJudgment>& js, std::size_t w) {
        fmt::print("{:<8}", label);
        std::size_t n = 0;
        for (std::size_t e = 0; e < named.size(); ++e) {
          const auto a = eval::agreement_table(js, tables[e], w);
          fmt::print(" {:>10}", rate_str(a));
          csv += fmt::format("{},{},{},{},{},{}\n", table, label, named[e].first, a.rate ? format_real(*a.rate) : "",
                             a.hits, a.n);
          n = a.n;
        }
        fmt::print(" {:>6}\n", n);
      };
      auto header = [&](const char* first) {
        fmt::print("{:<8}", first);
        for (const auto& [n, _] : named) fmt::print(" {:>10}", n);
        fmt::print(" {:>6}\n", "n");
      };
      fmt::print("Agreement by minimum agreeing workers (all k pooled)\n");
      header("w");
      for (std::size_t w = 2; w <= eval::kRatersPerTriplet; ++w) print_row("by_w", std::to_string(w), usable, w);
      std::map<std::size_t, std::vector<eval::TripletJudgment>> by_k;
      for (const auto& j : usable) by_k[j.triplet.k].push_back(j);
      fmt::print("\nAgreement by neighbour rank k\n");
      header("k");
      for (const auto& [k, js] : by_k) print_row("by_k", std::to_string(k), js, 0);
      for (const auto& [k, js] : by_k) {
        fmt::print("\nk = {}: agreement by minimum agreeing workers\n", k);
        header("w");
        for (std::size_t w = 2; w <= eval::kRatersPerTriplet; ++w)
          print_row(fmt::format("by_w_k{}", k), std::to_string(w), js, w);
      }
      if (!et.out.empty()) io::open_out(et.out) << csv;
    }});
  }

  // eval-rank ----------------------------------------------------------------
  struct {
    std::vector<std::string> scores;
    std::string labels, reference, out;
    std::size_t bootstrap = 1000;
  } er;
  {
    auto* c = app.add_subcommand("eval-rank", "Stuart-Kendall tau-c between embedding scores and a reference ranking");
    c->add_option("--scores", er.scores, "NAME=PATH scores files (repeatable)")->required();
    auto* lab = c->add_option("--labels", er.labels, "channel_id,partisan label")->check(CLI::ExistingFile);
    auto* ref = c->add_option("--reference", er.reference, "Reference scores, e.g. from pl-fit")->check(CLI::ExistingFile);
    lab->excludes(ref);
    c->add_option("--bootstrap", er.bootstrap, "Resamples for tau-c difference intervals (0 = none)")->capture_default_str();
    c->add_option("--out", er.out, "Comma-separated results");
    commands.push_back({c, [&] {
      if (er.labels.empty() == er.reference.empty()) throw CLI::ValidationError("eval-rank", "give exactly one of --labels or --reference");
      std::map<std::string, double> reference;
      if (!er.labels.empty()) {
        auto in = io::open_in(er.labels);
        for (const auto& [id, label] : ranking::read_labels(in)) reference.emplace(id, ranking::partisan_label_rank(label));
      } else {
        auto in = io::open_in(er.reference);
        reference = dims::read_scores(in).scores;
      }
      std::vector<std::pair<std::string, std::map<std::string, double>>> named;
      for (const auto& s : er.scores) {
        const auto [name, path] = parse_named(s);
        auto in = io::open_in(path);
        named.emplace_back(name, dims::read_scores(in).scores);
      }
      // Common support so every tau-c is computed on the same channels.
      std::vector<std::string> ids;
      for (const auto& [id, _] : reference) {
        bool ok = true;
        for (const auto& [__, m] : named) ok = ok && m.contains(id);
        if (ok) ids.push_back(id);
      }
      std::vector<double> y;
      for (const auto& id : ids) y.push_back(reference.at(id));
      std::vector<std::vector<double>> xs;
      std::string csv = "kind,embedding,other,value,lower,upper,n\n";
      fmt::print("{:<12} {:>8} {:>6}\n", "embedding", "tau_c", "n");
      for (const auto& [name, m] : named) {
        auto& x = xs.emplace_back();
        for (const auto& id : ids) x.push_back(m.at(id));
        const double t = ranking::tau_c(x, y);
        fmt::print("{:<12} {:>8.4f} {:>6}\n", name, t, ids.size());
        csv += fmt::format("tau_c,{},,{},,,{}\n", name, format_real(t), ids.size());
      }
      if (er.bootstrap > 0) {
        for (std::size_t a = 0; a < named.size(); ++a)
          for (std::size_t b = a + 1; b < named.size(); ++b) {
            const auto ci = ranking::tau_c_difference_ci(
                xs[a], xs[b], y, er.bootstrap, derive_seed(g.seed, "eval-rank/" + named[a].first + "/" + named[b].first));
            fmt::print("diff {}-{}: {:.4f} [{:.4f}, {:.4f}]\n", named[a].first, named[b].first, ci.estimate, ci.lower,
                       ci.upper);
            csv += fmt::format("tau_c_diff,{},{},{},{},{},{}\n", named[a].first, named[b].first, format_real(ci.estimate),
                               format_real(ci.lower), format_real(ci.upper), ids.size());
          }
      }
      if (!er.out.empty()) io::open_out(er.out) << csv;
    }});
  }

  // ztest --------------------------------------------------------------------
  struct {
    std::uint64_t hits1 = 0, n1 = 0, hits2 = 0, n2 = 0;
    double alpha = 0.05;
  } zt;
  {
    auto* c = app.add_subcommand("ztest", "Pooled two-proportion z-test");
    c->add_option("--hits1", zt.hits1)->required();
    c->add_option("--n1", zt.n1)->required();
    c->add_option("--hits2", zt.hits2)->required();
    c->add_option("--n2", zt.n2)->required();
    c->add_option("--alpha", zt.alpha)->capture_default_str();
    commands.push_back({c, [&] {
      const auto t = ranking::two_proportion_ztest(zt.hits1, zt.n1, zt.hits2, zt.n2, zt.alpha);
      fmt::print("z={:.6f} p_value={:.6g} significant={}\n", t.z, t.p_value, t.significant);
    }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  log::set_level(g.log_level == "debug"  ? log::Level::debug
                 : g.log_level == "warn" ? log::Level::warn
                 : g.log_level == "error" ? log::Level::error
                                          : log::Level::info);
  for (auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      cmd.run();
    } catch (const CLI::ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      log::write(log::Level::error, cmd.app->get_name(), e.what());
      return 1;
    }
  }
  return 0;
}

}  // namespace t2v::cli
