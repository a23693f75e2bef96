#include "t2v/content.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace t2v::content {

std::vector<VideoVectors> read_video_vectors(std::istream& in) {
  std::vector<VideoVectors> out;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto f = io::split_ws(line);
    if (f.size() < 3) throw Error(fmt::format("video vector line {} too short", line_no));
    const auto d = f.size() - 2;
    if (dim == 0) dim = d;
    if (d != dim) throw Error(fmt::format("video vector line {} has {} components, expected {}", line_no, d, dim));
    Vector v(d);
    for (std::size_t k = 0; k < d; ++k) {
      v[k] = io::to_double(f[k + 2], fmt::format("video vector line {}", line_no));
      if (!std::isfinite(v[k])) throw Error(fmt::format("non-finite component on video vector line {}", line_no));
    }
    std::string id(f[0]);
    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) out.push_back(VideoVectors{id, std::nullopt, std::nullopt});
    auto& rec = out[it->second];
    if (f[1] == "title") {
      rec.title = std::move(v);
    } else if (f[1] == "description") {
      rec.description = std::move(v);
    } else {
      throw Error(fmt::format("video vector line {}: unknown tag '{}'", line_no, f[1]));
    }
  }
  return out;
}

void write_video_vectors(std::ostream& out, const std::vector<VideoVectors>& videos) {
  auto emit = [&](const std::string& id, const char* tag, const Vector& v) {
    out << id << ' ' << tag;
    for (double x : v) out << ' ' << format_real(x);
    out << '\n';
  };
  for (const auto& v : videos) {
    if (v.title) emit(v.video_id, "title", *v.title);
    if (v.description) emit(v.video_id, "description", *v.description);
  }
}

ContentResult aggregate_content(const std::vector<VideoVectors>& per_video, const ChannelVideos& channel_index) {
  std::size_t dim = 0;
  std::unordered_map<std::string_view, Vector> video_sum;
  for (const auto& v : per_video) {
    const Vector* first = v.title ? &*v.title : (v.description ? &*v.description : nullptr);
    if (!first) continue;
    if (dim == 0) dim = first->size();
    Vector sum(dim, 0.0);
    for (const auto* part : {v.title ? &*v.title : nullptr, v.description ? &*v.description : nullptr}) {
      if (!part) continue;
      if (part->size() != dim) throw Error("video '" + v.video_id + "' vectors disagree in dimension");
      for (std::size_t k = 0; k < dim; ++k) sum[k] += (*part)[k];
    }
    video_sum.insert_or_assign(v.video_id, std::move(sum));
  }
  if (dim == 0) throw Error("no video vectors to aggregate");

  ContentResult result{EmbeddingTable(dim, Provenance::con), {}};
  for (const auto& [channel, videos] : channel_index) {
    Vector mean(dim, 0.0);
    std::size_t n = 0;
    for (const auto& vid : videos) {
      const auto it = video_sum.find(vid);
      if (it == video_sum.end()) continue;
      for (std::size_t k = 0; k < dim; ++k) mean[k] += it->second[k];
      ++n;
    }
    if (n == 0) {
      result.omitted.push_back(channel);
      continue;
    }
    for (auto& x : mean) x /= static_cast<double>(n);
    result.channels.set(channel, std::move(mean));
  }
  if (!result.omitted.empty())
    log::warn("embed_content", "{} channels omitted: no vectorized videos", result.omitted.size());
  return result;
}

}  // namespace t2v::content
