#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace t2v::rec {

/// One fetched recommendation list.
struct CrawlRecord {
  std::string source_video;
  std::string source_channel;
  std::int64_t timestamp = 0;
  /// (recommended_video, recommended_channel)
  std::vector<std::pair<std::string, std::string>> recommendations;
};

/// JSON Lines: {"source_video", "source_channel", "timestamp",
/// "recommendations": [[video, channel], ...]}.
std::vector<CrawlRecord> read_crawl_records(std::istream& in);
void write_crawl_records(std::ostream& out, std::span<const CrawlRecord> records);

/// Weighted undirected graph over channels. Node ids are sorted; adjacency
/// lists are sorted by neighbour index. A self-loop appears once in its
/// node's list.
class RecGraph {
public:
  struct Neighbor {
    std::uint32_t node;
    double weight;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
  };

  RecGraph() = default;
  /// Builds from canonical (u <= v) weighted edges over `nodes` (sorted, unique).
  RecGraph(std::vector<std::string> nodes, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges);

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }
  std::size_t num_self_loops() const noexcept { return self_loops_; }
  bool empty() const noexcept { return nodes_.empty(); }

  const std::string& id(std::uint32_t node) const { return nodes_[node]; }
  const std::vector<std::string>& ids() const noexcept { return nodes_; }
  std::optional<std::uint32_t> index(std::string_view id) const;

  std::span<const Neighbor> neighbors(std::uint32_t node) const {
    return {adj_.data() + offsets_[node], adj_.data() + offsets_[node + 1]};
  }
  std::size_t degree(std::uint32_t node) const { return offsets_[node + 1] - offsets_[node]; }
  /// Position of `v` in the adjacency list of `u`, if adjacent.
  std::optional<std::size_t> slot(std::uint32_t u, std::uint32_t v) const;
  /// Global directed-slot id (offset of u plus position of v).
  std::size_t slot_base(std::uint32_t u) const { return offsets_[u]; }
  std::size_t num_slots() const noexcept { return adj_.size(); }
  double weight(std::uint32_t u, std::uint32_t v) const;

  friend bool operator==(const RecGraph&, const RecGraph&) = default;

private:
  std::vector<std::string> nodes_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
  std::size_t num_edges_ = 0;
  std::size_t self_loops_ = 0;
};

struct RecGraphBuildResult {
  RecGraph graph;
  /// Observations whose source or target channel is outside the retained set.
  std::size_t dropped_observations = 0;
  std::size_t self_recommendations = 0;
};

/// weight(u,v) counts every observation of a v-video in u's recommendations
/// or vice versa. Nodes are the retained channels seen anywhere in the crawl.
RecGraphBuildResult build_rec_graph(std::span<const CrawlRecord> records,
                                    const std::set<std::string, std::less<>>& retained_channels);

/// "u v w" lines with u <= v, for inspection and for loading external graphs.
void write_edge_list(std::ostream& out, const RecGraph& g);
RecGraph read_edge_list(std::istream& in);

}  // namespace t2v::rec
