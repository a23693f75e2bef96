#include "t2v/recgraph.hpp"

#include "t2v/embedding.hpp"
#include "t2v/error.hpp"
#include "t2v/io.hpp"
#include "t2v/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

namespace t2v::rec {

std::vector<CrawlRecord> read_crawl_records(std::istream& in) {
  std::vector<CrawlRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CrawlRecord r;
      r.source_video = j.at("source_video").get<std::string>();
      r.source_channel = j.at("source_channel").get<std::string>();
      r.timestamp = j.value("timestamp", std::int64_t{0});
      for (const auto& pair : j.at("recommendations"))
        r.recommendations.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("crawl record line {}: {}", line_no, e.what()));
    }
  }
  return records;
}

void write_crawl_records(std::ostream& out, std::span<const CrawlRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["source_video"] = r.source_video;
    j["source_channel"] = r.source_channel;
    j["timestamp"] = r.timestamp;
    auto recs = nlohmann::json::array();
    for (const auto& [v, c] : r.recommendations) recs.push_back({v, c});
    j["recommendations"] = std::move(recs);
    out << j.dump() << '\n';
  }
}

RecGraph::RecGraph(std::vector<std::string> nodes,
                   const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges)
    : nodes_(std::move(nodes)) {
  const auto n = nodes_.size();
  std::vector<std::vector<Neighbor>> lists(n);
  for (const auto& [u, v, w] : edges) {
    if (u >= n || v >= n) throw Error("edge endpoint out of range");
    if (!(w > 0)) throw Error("edge weights must be positive");
    lists[u].push_back({v, w});
    if (u != v) {
      lists[v].push_back({u, w});
    } else {
      ++self_loops_;
    }
    ++num_edges_;
  }
  offsets_.assign(1, 0);
  for (auto& list : lists) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    for (std::size_t k = 1; k < list.size(); ++k)
      if (list[k].node == list[k - 1].node) throw Error("duplicate edge in graph construction");
    adj_.insert(adj_.end(), list.begin(), list.end());
    offsets_.push_back(adj_.size());
  }
}

std::optional<std::uint32_t> RecGraph::index(std::string_view id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::optional<std::size_t> RecGraph::slot(std::uint32_t u, std::uint32_t v) const {
  const auto list = neighbors(u);
  const auto it =
      std::lower_bound(list.begin(), list.end(), v, [](const Neighbor& a, std::uint32_t x) { return a.node < x; });
  if (it == list.end() || it->node != v) return std::nullopt;
  return static_cast<std::size_t>(it - list.begin());
}

double RecGraph::weight(std::uint32_t u, std::uint32_t v) const {
  const auto s = slot(u, v);
  return s ? neighbors(u)[*s].weight : 0.0;
}

RecGraphBuildResult build_rec_graph(std::span<const CrawlRecord> records,
                                    const std::set<std::string, std::less<>>& retained_channels) {
  RecGraphBuildResult result;
  std::set<std::string_view> seen;
  std::map<std::pair<std::string_view, std::string_view>, double> weights;
  for (const auto& r : records) {
    const bool source_ok = retained_channels.contains(r.source_channel);
    if (source_ok) seen.insert(r.source_channel);
    for (const auto& [video, channel] : r.recommendations) {
      const bool target_ok = retained_channels.contains(channel);
      if (target_ok) seen.insert(channel);
      if (!source_ok || !target_ok) {
        ++result.dropped_observations;
        continue;
      }
      std::string_view a = r.source_channel, b = channel;
      if (b < a) std::swap(a, b);
      if (a == b) ++result.self_recommendations;
      weights[{a, b}] += 1.0;
    }
  }
  std::vector<std::string> nodes(seen.begin(), seen.end());
  std::map<std::string_view, std::uint32_t> index;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(weights.size());
  for (const auto& [key, w] : weights) edges.emplace_back(index.at(key.first), index.at(key.second), w);
  result.graph = RecGraph(std::move(nodes), edges);

  if (result.dropped_observations > 0)
    log::info("embed_rec", "{} recommendation observations outside the retained channels dropped",
              result.dropped_observations);
  if (result.self_recommendations > 0)
    log::warn("embed_rec", "{} self-recommendations kept as self-loops", result.self_recommendations);
  return result;
}

void write_edge_list(std::ostream& out, const RecGraph& g) {
  for (std::uint32_t u = 0; u < g.num_nodes(); ++u)
    for (const auto& nb : g.neighbors(u))
      if (u <= nb.node) out << g.id(u) << ' ' << g.id(nb.node) << ' ' << format_real(nb.weight) << '\n';
}

RecGraph read_edge_list(std::istream& in) {
  std::vector<std::tuple<std::string, std::string, double>> raw;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto f = io::split_ws(line);
    if (f.size() != 3) throw Error(fmt::format("edge list line {} must be 'u v w'", line_no));
    raw.emplace_back(std::string(f[0]), std::string(f[1]), io::to_double(f[2], "edge list"));
    ids.emplace(f[0]);
    ids.emplace(f[1]);
  }
  std::vector<std::string> nodes(ids.begin(), ids.end());
  std::map<std::string_view, std::uint32_t> index;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
  for (const auto& [a, b, w] : raw) {
    auto u = index.at(a), v = index.at(b);
    if (v < u) std::swap(u, v);
    merged[{u, v}] += w;
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (const auto& [key, w] : merged) edges.emplace_back(key.first, key.second, w);
  return RecGraph(std::move(nodes), edges);
}

}  // namespace t2v::rec
