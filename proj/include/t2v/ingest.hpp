#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace t2v::ingest {

// Collection window of the sharing data, [2010-01-01, 2022-09-01) UTC.
inline constexpr std::int64_t kWindowBegin = 1262304000;
inline constexpr std::int64_t kWindowEnd = 1661990400;

inline constexpr std::size_t kMaxVideosPerChannel = 50;

enum class TupleSource { post, comment };

struct SharingTuple {
  std::string subreddit;
  std::string video_id;
  std::string author_id;
  TupleSource source = TupleSource::post;
  std::int64_t timestamp = 0;
  // Filled by resolve_channels; not part of the file format.
  std::optional<std::string> channel_id;

  friend bool operator==(const SharingTuple&, const SharingTuple&) = default;
};

struct TupleParseResult {
  std::vector<SharingTuple> tuples;
  std::size_t skipped = 0;
};

/// Reads the tab-separated tuple format (subreddit, video_id, author_id,
/// source, timestamp). Malformed lines are skipped and counted; more than
/// half malformed throws, as that signals the wrong file.
TupleParseResult parse_tuples(std::istream& in);
void write_tuples(std::ostream& out, std::span<const SharingTuple> tuples);

/// Drops every tuple of authors who shared strictly more than
/// `max_videos_per_author` distinct videos. Order is preserved.
std::vector<SharingTuple> filter_spam(std::span<const SharingTuple> tuples, std::size_t max_videos_per_author = 1000);

using VideoChannelMap = std::unordered_map<std::string, std::string>;

/// Two-column tab-separated video_id, channel_id. Later lines override
/// earlier ones so re-hydration maps can be appended.
VideoChannelMap read_video_channel_map(std::istream& in);

struct ResolveResult {
  std::vector<SharingTuple> tuples;
  std::size_t unresolved = 0;
};

/// Annotates each tuple with its channel. Unresolvable tuples keep an empty
/// channel_id and are counted; nothing is dropped here.
ResolveResult resolve_channels(std::span<const SharingTuple> tuples, const VideoChannelMap& video_to_channel);

// ---------------------------------------------------------------------------
// Channel metadata

/// The 15 upload categories creators choose from.
std::span<const std::string_view> platform_categories();
/// Canonical spelling of a category name (case-insensitive), or nullopt.
std::optional<std::string> canonical_category(std::string_view name);

struct VideoRecord {
  std::string video_id;
  std::string title;
  std::string description;
  std::string category;
  std::uint64_t views = 0;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

struct ChannelRecord {
  std::string channel_id;
  std::string name;
  std::string description;
  std::optional<std::uint64_t> subscribers;
  std::uint64_t views = 0;
  std::int64_t created_at = 0;
  std::map<std::string, std::size_t> category_votes;
  std::string language;
  std::vector<VideoRecord> videos;

  friend bool operator==(const ChannelRecord&, const ChannelRecord&) = default;
};

/// Majority category over the channel's videos; ties go to the category whose
/// tied videos have more total views, then to the lexicographically smallest.
/// Empty for channels with no videos.
std::string majority_category(const ChannelRecord& channel);

struct ChannelParseResult {
  std::vector<ChannelRecord> channels;
  std::size_t skipped = 0;
};

/// JSON Lines, one ChannelRecord per line. category_votes is recomputed from
/// the videos. Records violating the type invariants are skipped and counted.
ChannelParseResult read_channels(std::istream& in);
void write_channels(std::ostream& out, std::span<const ChannelRecord> channels);

using LanguageOverrides = std::unordered_map<std::string, std::string>;
/// Tab-separated channel_id, language tag.
LanguageOverrides read_language_overrides(std::istream& in);

/// True when the primary subtags match case-insensitively ("en-GB" ~ "en").
bool language_matches(std::string_view tag, std::string_view wanted);

/// Keeps channels with strictly more than `min_subscribers` subscribers whose
/// (possibly overridden) language tag matches. Missing counts are dropped.
std::vector<ChannelRecord> filter_channels(std::span<const ChannelRecord> channels,
                                           std::uint64_t min_subscribers = 100000,
                                           std::string_view language = "en",
                                           const LanguageOverrides* overrides = nullptr);

// ---------------------------------------------------------------------------
// Sharing matrix

/// Sparse channel x subreddit matrix in compressed-row form. Rows follow
/// `channels`, columns follow `subreddits`, both sorted by id.
struct SharingMatrix {
  struct Entry {
    std::size_t col = 0;
    double weight = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::vector<std::string> channels;
  std::vector<std::string> subreddits;
  std::vector<std::size_t> row_offsets{0};
  std::vector<Entry> entries;

  std::size_t rows() const noexcept { return channels.size(); }
  std::size_t cols() const noexcept { return subreddits.size(); }
  std::size_t nonzeros() const noexcept { return entries.size(); }
  std::span<const Entry> row(std::size_t i) const {
    return {entries.data() + row_offsets[i], entries.data() + row_offsets[i + 1]};
  }
  /// Dense value lookup, zero when absent.
  double value(std::size_t row, std::size_t col) const;

  friend bool operator==(const SharingMatrix&, const SharingMatrix&) = default;
};

struct SharingBuildResult {
  SharingMatrix matrix;
  std::size_t unresolved_tuples = 0;
  std::size_t non_retained_tuples = 0;
  std::vector<std::string> unmentioned_channels;
};

/// W[i,j] = mentions of channel i in subreddit j / all mentions of channel i.
/// Tuples already carrying a channel_id use it, otherwise the map is consulted.
SharingBuildResult build_sharing_matrix(std::span<const SharingTuple> tuples, const VideoChannelMap& video_to_channel,
                                        const std::set<std::string, std::less<>>& retained_channels);

/// "n m" header then "row col weight" triplets in row-major order.
void write_sharing_matrix(std::ostream& out, const SharingMatrix& w);
/// Reads triplets; ids come from the sidecar streams (one id per line) when
/// given, else rows/columns are named by index.
SharingMatrix read_sharing_matrix(std::istream& in, std::istream* row_ids = nullptr, std::istream* col_ids = nullptr);
/// Writes the triplet file plus `<path>.rows` and `<path>.cols`.
void save_sharing_matrix(const std::string& path, const SharingMatrix& w);
SharingMatrix load_sharing_matrix(const std::string& path);

}  // namespace t2v::ingest
