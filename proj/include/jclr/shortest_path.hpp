#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "jclr/types.hpp"

namespace jclr {

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// Shortest-hop distances from one source segment to every segment, following
/// directed edges. Unit edge weights, so Dijkstra degenerates to BFS.
struct HopDistanceField {
  SegmentId source = 0;
  std::vector<std::uint32_t> dist;  // kUnreachable where no path exists
};

/// dist[j] = hops on the shortest directed path source -> j.
HopDistanceField hop_distances_from(const RoadNetwork& network, SegmentId source);

/// dist[i] = hops on the shortest directed path i -> target.
HopDistanceField hop_distances_to(const RoadNetwork& network, SegmentId target);

/// dist[i] = min over targets of hops(i -> target); multi-source sweep over
/// reversed edges.
std::vector<std::uint32_t> min_hops_to_set(const RoadNetwork& network,
                                           std::span<const SegmentId> targets);

}  // namespace jclr
