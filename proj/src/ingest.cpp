#include "t2v/ingest.hpp"

#include "t2v/embedding.hpp"
#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace t2v::ingest {
namespace {

constexpr std::array<std::string_view, 15> kCategories = {
    "Autos & Vehicles", "Comedy",           "Education",         "Entertainment",          "Film & Animation",
    "Gaming",           "Howto & Style",    "Music",             "News & Politics",        "Nonprofits & Activism",
    "People & Blogs",   "Pets & Animals",   "Science & Technology", "Sports",              "Travel & Events",
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<SharingTuple> parse_tuple_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = io::split(line, '\t');
  if (f.size() != 5) return std::nullopt;
  if (f[0].empty() || f[1].empty() || f[2].empty()) return std::nullopt;
  SharingTuple t;
  t.subreddit = f[0];
  t.video_id = f[1];
  t.author_id = f[2];
  if (f[3] == "post") {
    t.source = TupleSource::post;
  } else if (f[3] == "comment") {
    t.source = TupleSource::comment;
  } else {
    return std::nullopt;
  }
  long long ts = 0;
  if (!io::parse_int64(f[4], ts) || ts < kWindowBegin || ts >= kWindowEnd) return std::nullopt;
  t.timestamp = ts;
  return t;
}

void check_malformed_share(std::size_t bad, std::size_t total, std::string_view what) {
  if (total > 0 && 2 * bad > total)
    throw Error(fmt::format("{} of {} {} lines are malformed; is this the right file?", bad, total, what));
}

}  // namespace

TupleParseResult parse_tuples(std::istream& in) {
  if (!in) throw IoError("tuple stream is not readable");
  TupleParseResult result;
  std::size_t total = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    ++total;
    if (auto t = parse_tuple_line(line)) {
      result.tuples.push_back(std::move(*t));
    } else {
      ++result.skipped;
    }
  }
  if (in.bad()) throw IoError("error while reading tuple stream");
  check_malformed_share(result.skipped, total, "tuple");
  if (result.skipped > 0) log::warn("ingest", "skipped {} malformed tuple lines", result.skipped);
  return result;
}

void write_tuples(std::ostream& out, std::span<const SharingTuple> tuples) {
  for (const auto& t : tuples) {
    out << t.subreddit << '\t' << t.video_id << '\t' << t.author_id << '\t'
        << (t.source == TupleSource::post ? "post" : "comment") << '\t' << t.timestamp << '\n';
  }
}

std::vector<SharingTuple> filter_spam(std::span<const SharingTuple> tuples, std::size_t max_videos_per_author) {
  std::unordered_map<std::string_view, std::unordered_set<std::string_view>> videos_by_author;
  for (const auto& t : tuples) videos_by_author[t.author_id].insert(t.video_id);

  std::vector<SharingTuple> kept;
  kept.reserve(tuples.size());
  for (const auto& t : tuples)
    if (videos_by_author[t.author_id].size() <= max_videos_per_author) kept.push_back(t);
  return kept;
}

VideoChannelMap read_video_channel_map(std::istream& in) {
  VideoChannelMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto f = io::split(io::trim(line), '\t');
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw Error(fmt::format("video->channel map line {} is not 'video_id<TAB>channel_id'", line_no));
    map.insert_or_assign(std::string(f[0]), std::string(f[1]));
  }
  return map;
}

ResolveResult resolve_channels(std::span<const SharingTuple> tuples, const VideoChannelMap& video_to_channel) {
  ResolveResult result;
  result.tuples.assign(tuples.begin(), tuples.end());
  for (auto& t : result.tuples) {
    const auto it = video_to_channel.find(t.video_id);
    if (it == video_to_channel.end()) {
      t.channel_id = std::string{};
      ++result.unresolved;
    } else {
      t.channel_id = it->second;
    }
  }
  return result;
}

std::span<const std::string_view> platform_categories() { return kCategories; }

std::optional<std::string> canonical_category(std::string_view name) {
  const auto wanted = lower(name);
  for (auto c : kCategories)
    if (lower(c) == wanted) return std::string(c);
  return std::nullopt;
}

std::string majority_category(const ChannelRecord& channel) {
  std::map<std::string, std::pair<std::size_t, std::uint64_t>> tally;  // votes, views
  for (const auto& v : channel.videos) {
    auto& [votes, views] = tally[v.category];
    ++votes;
    views += v.views;
  }
  std::string best;
  std::pair<std::size_t, std::uint64_t> best_key{0, 0};
  // std::map iterates lexicographically, so a strict comparison keeps the smallest name on full ties.
  for (const auto& [category, key] : tally) {
    if (best.empty() || key > best_key) {
      best = category;
      best_key = key;
    }
  }
  return best;
}

namespace {

ChannelRecord channel_from_json(const nlohmann::json& j) {
  ChannelRecord c;
  c.channel_id = j.at("channel_id").get<std::string>();
  if (c.channel_id.empty()) throw Error("empty channel_id");
  c.name = j.value("name", "");
  c.description = j.value("description", "");
  if (j.contains("subscribers") && !j.at("subscribers").is_null())
    c.subscribers = j.at("subscribers").get<std::uint64_t>();
  c.views = j.value("views", std::uint64_t{0});
  c.created_at = j.value("created_at", std::int64_t{0});
  c.language = j.value("language", "");
  std::unordered_set<std::string> seen;
  if (j.contains("videos")) {
    for (const auto& jv : j.at("videos")) {
      VideoRecord v;
      v.video_id = jv.at("video_id").get<std::string>();
      if (v.video_id.empty() || !seen.insert(v.video_id).second)
        throw Error("empty or duplicate video_id '" + v.video_id + "'");
      v.title = jv.value("title", "");
      v.description = jv.value("description", "");
      auto cat = canonical_category(jv.at("category").get<std::string>());
      if (!cat) throw Error("unknown category '" + jv.at("category").get<std::string>() + "'");
      v.category = *cat;
      v.views = jv.value("views", std::uint64_t{0});
      c.videos.push_back(std::move(v));
    }
  }
  if (c.videos.size() > kMaxVideosPerChannel)
    throw Error(fmt::format("channel '{}' lists {} videos (max {})", c.channel_id, c.videos.size(), kMaxVideosPerChannel));
  for (const auto& v : c.videos) ++c.category_votes[v.category];
  return c;
}

nlohmann::json channel_to_json(const ChannelRecord& c) {
  nlohmann::json j;
  j["channel_id"] = c.channel_id;
  j["name"] = c.name;
  j["description"] = c.description;
  j["subscribers"] = c.subscribers ? nlohmann::json(*c.subscribers) : nlohmann::json(nullptr);
  j["views"] = c.views;
  j["created_at"] = c.created_at;
  j["language"] = c.language;
  auto videos = nlohmann::json::array();
  for (const auto& v : c.videos) {
    videos.push_back({{"video_id", v.video_id},
                      {"title", v.title},
                      {"description", v.description},
                      {"category", v.category},
                      {"views", v.views}});
  }
  j["videos"] = std::move(videos);
  return j;
}

}  // namespace

ChannelParseResult read_channels(std::istream& in) {
  if (!in) throw IoError("channel stream is not readable");
  ChannelParseResult result;
  std::size_t total = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    ++total;
    try {
      result.channels.push_back(channel_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      ++result.skipped;
      log::warn("ingest", "channel line {} skipped: {}", line_no, e.what());
    }
  }
  check_malformed_share(result.skipped, total, "channel");
  return result;
}

void write_channels(std::ostream& out, std::span<const ChannelRecord> channels) {
  for (const auto& c : channels) out << channel_to_json(c).dump() << '\n';
}

LanguageOverrides read_language_overrides(std::istream& in) {
  LanguageOverrides map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto f = io::split(io::trim(line), '\t');
    if (f.size() != 2 || f[0].empty()) throw Error(fmt::format("language override line {} malformed", line_no));
    map.insert_or_assign(std::string(f[0]), std::string(f[1]));
  }
  return map;
}

bool language_matches(std::string_view tag, std::string_view wanted) {
  auto primary = [](std::string_view t) {
    const auto pos = t.find_first_of("-_");
    return lower(io::trim(t.substr(0, pos)));
  };
  const auto a = primary(tag);
  return !a.empty() && a == primary(wanted);
}

std::vector<ChannelRecord> filter_channels(std::span<const ChannelRecord> channels, std::uint64_t min_subscribers,
                                           std::string_view language, const LanguageOverrides* overrides) {
  std::vector<ChannelRecord> kept;
  for (const auto& c : channels) {
    if (!c.subscribers) {
      log::warn("ingest", "channel '{}' has no subscriber count; excluded", c.channel_id);
      continue;
    }
    if (*c.subscribers <= min_subscribers) continue;
    std::string_view tag = c.language;
    if (overrides) {
      if (const auto it = overrides->find(c.channel_id); it != overrides->end()) tag = it->second;
    }
    if (!language_matches(tag, language)) continue;
    kept.push_back(c);
  }
  return kept;
}

double SharingMatrix::value(std::size_t r, std::size_t c) const {
  for (const auto& e : row(r))
    if (e.col == c) return e.weight;
  return 0.0;
}

SharingBuildResult build_sharing_matrix(std::span<const SharingTuple> tuples, const VideoChannelMap& video_to_channel,
                                        const std::set<std::string, std::less<>>& retained_channels) {
  SharingBuildResult result;
  std::map<std::string_view, std::map<std::string_view, std::size_t>> counts;
  for (const auto& t : tuples) {
    std::string_view channel;
    if (t.channel_id) {
      channel = *t.channel_id;
    } else if (const auto it = video_to_channel.find(t.video_id); it != video_to_channel.end()) {
      channel = it->second;
    }
    if (channel.empty()) {
      ++result.unresolved_tuples;
      continue;
    }
    if (!retained_channels.contains(channel)) {
      ++result.non_retained_tuples;
      continue;
    }
    ++counts[channel][t.subreddit];
  }

  std::set<std::string_view> subreddit_set;
  for (const auto& [_, row] : counts)
    for (const auto& [sub, __] : row) subreddit_set.insert(sub);

  auto& w = result.matrix;
  w.subreddits.assign(subreddit_set.begin(), subreddit_set.end());
  std::map<std::string_view, std::size_t> col_of;
  for (std::size_t j = 0; j < w.subreddits.size(); ++j) col_of.emplace(w.subreddits[j], j);

  for (const auto& channel : retained_channels) {
    const auto it = counts.find(channel);
    if (it == counts.end()) {
      result.unmentioned_channels.push_back(channel);
      continue;
    }
    std::size_t total = 0;
    for (const auto& [_, n] : it->second) total += n;
    w.channels.push_back(channel);
    for (const auto& [sub, n] : it->second)
      w.entries.push_back({col_of.at(sub), static_cast<double>(n) / static_cast<double>(total)});
    w.row_offsets.push_back(w.entries.size());
  }
  if (result.unresolved_tuples > 0) log::warn("ingest", "{} tuples reference unresolvable videos", result.unresolved_tuples);
  if (!result.unmentioned_channels.empty())
    log::warn("ingest", "{} retained channels have no mentions and are excluded", result.unmentioned_channels.size());
  return result;
}

void write_sharing_matrix(std::ostream& out, const SharingMatrix& w) {
  out << w.rows() << ' ' << w.cols() << '\n';
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (const auto& e : w.row(i)) out << i << ' ' << e.col << ' ' << format_real(e.weight) << '\n';
}

namespace {

std::vector<std::string> read_ids(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = io::trim(line);
    if (!t.empty()) ids.emplace_back(t);
  }
  return ids;
}

}  // namespace

SharingMatrix read_sharing_matrix(std::istream& in, std::istream* row_ids, std::istream* col_ids) {
  std::string line;
  if (!std::getline(in, line)) throw Error("sharing matrix file is empty");
  const auto header = io::split_ws(line);
  unsigned long long n = 0, m = 0;
  if (header.size() != 2 || !io::parse_uint64(header[0], n) || !io::parse_uint64(header[1], m))
    throw Error("sharing matrix header must be 'n m'");
  SharingMatrix w;
  w.channels = row_ids ? read_ids(*row_ids) : std::vector<std::string>{};
  w.subreddits = col_ids ? read_ids(*col_ids) : std::vector<std::string>{};
  if (!row_ids)
    for (std::size_t i = 0; i < n; ++i) w.channels.push_back(std::to_string(i));
  if (!col_ids)
    for (std::size_t j = 0; j < m; ++j) w.subreddits.push_back(std::to_string(j));
  if (w.channels.size() != n || w.subreddits.size() != m) throw Error("sharing matrix id sidecars disagree with header");

  std::size_t current_row = 0;
  std::size_t line_no = 1;
  bool any = false;
  std::size_t last_col = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto f = io::split_ws(line);
    unsigned long long r = 0, c = 0;
    double v = 0;
    if (f.size() != 3 || !io::parse_uint64(f[0], r) || !io::parse_uint64(f[1], c) || !io::parse_double(f[2], v) ||
        r >= n || c >= m || v < 0)
      throw Error(fmt::format("sharing matrix line {} malformed", line_no));
    if (r < current_row || (r == current_row && any && c <= last_col))
      throw Error(fmt::format("sharing matrix line {} breaks row-major order", line_no));
    while (current_row < r) {
      w.row_offsets.push_back(w.entries.size());
      ++current_row;
    }
    w.entries.push_back({c, v});
    any = true;
    last_col = c;
  }
  while (w.row_offsets.size() < n + 1) w.row_offsets.push_back(w.entries.size());
  return w;
}

void save_sharing_matrix(const std::string& path, const SharingMatrix& w) {
  auto out = io::open_out(path);
  write_sharing_matrix(out, w);
  auto rows = io::open_out(path + ".rows");
  for (const auto& id : w.channels) rows << id << '\n';
  auto cols = io::open_out(path + ".cols");
  for (const auto& id : w.subreddits) cols << id << '\n';
}

SharingMatrix load_sharing_matrix(const std::string& path) {
  auto in = io::open_in(path);
  auto rows = io::open_in(path + ".rows");
  auto cols = io::open_in(path + ".cols");
  return read_sharing_matrix(in, &rows, &cols);
}

}  // namespace t2v::ingest
