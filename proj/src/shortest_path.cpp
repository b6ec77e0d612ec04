#include "jclr/shortest_path.hpp"

#include <deque>

namespace jclr {

namespace {

enum class Direction { Forward, Reverse };

std::vector<std::uint32_t> bfs(const RoadNetwork& network,
                               std::span<const SegmentId> sources,
                               Direction dir) {
  std::vector<std::uint32_t> dist(network.size(), kUnreachable);
  std::deque<SegmentId> queue;
  for (SegmentId s : sources) {
    if (!network.contains(s)) {
      throw ValidationError(cat("shortest path: unknown segment ", s));
    }
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const SegmentId u = queue.front();
    queue.pop_front();
    const auto nbrs = dir == Direction::Forward ? network.out_neighbors(u)
                                                : network.in_neighbors(u);
    for (SegmentId v : nbrs) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

HopDistanceField hop_distances_from(const RoadNetwork& network, SegmentId source) {
  return {source, bfs(network, std::span(&source, 1), Direction::Forward)};
}

HopDistanceField hop_distances_to(const RoadNetwork& network, SegmentId target) {
  return {target, bfs(network, std::span(&target, 1), Direction::Reverse)};
}

std::vector<std::uint32_t> min_hops_to_set(const RoadNetwork& network,
                                           std::span<const SegmentId> targets) {
  return bfs(network, targets, Direction::Reverse);
}

}  // namespace jclr
