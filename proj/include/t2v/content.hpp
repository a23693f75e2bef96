#pragma once

#include "t2v/embedding.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace t2v::content {

/// Title and description vectors of one video. A missing description
/// contributes the zero vector.
struct VideoVectors {
  std::string video_id;
  std::optional<Vector> title;
  std::optional<Vector> description;
};

/// Per-video vector file: "video_id tag c_1 ... c_d" with tag in
/// {title, description}. All lines must share one dimensionality.
std::vector<VideoVectors> read_video_vectors(std::istream& in);
void write_video_vectors(std::ostream& out, const std::vector<VideoVectors>& videos);

struct ContentResult {
  EmbeddingTable channels;
  std::vector<std::string> omitted;
};

using ChannelVideos = std::map<std::string, std::vector<std::string>>;

/// Per video: title + description. Per channel: arithmetic mean over its
/// vectorized videos. Channels without any vectorized video are omitted.
ContentResult aggregate_content(const std::vector<VideoVectors>& per_video, const ChannelVideos& channel_index);

}  // namespace t2v::content
