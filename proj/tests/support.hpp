#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "jclr/types.hpp"
#include "jclr/util.hpp"

namespace jclr::test {

/// Small random directed graph: a ring (keeps everything reachable) plus a
/// few random chords per node.
inline RoadNetwork random_network(Rng& rng, std::size_t n, int chords = 2) {
  std::vector<SegmentMeta> metas(n);
  for (std::size_t i = 0; i < n; ++i) {
    metas[i].id = static_cast<SegmentId>(i);
    metas[i].length_m = 50.0 + 150.0 * uniform01(rng);
    metas[i].label = static_cast<int>(uniform_index(rng, 4));
    metas[i].avg_speed = 20.0 + 40.0 * uniform01(rng);
  }
  std::vector<std::pair<SegmentId, SegmentId>> edges;
  for (SegmentId i = 0; i < n; ++i) {
    edges.emplace_back(i, static_cast<SegmentId>((i + 1) % n));
    for (int k = 0; k < chords; ++k) {
      const auto j = static_cast<SegmentId>(uniform_index(rng, n));
      if (j != i) edges.emplace_back(i, j);
    }
  }
  return RoadNetwork(std::move(metas), edges);
}

/// Random-walk trajectory of the requested length over the network.
inline Trajectory random_walk(Rng& rng, const RoadNetwork& network,
                              std::string id, std::size_t length) {
  Trajectory traj;
  traj.id = std::move(id);
  SegmentId cur = static_cast<SegmentId>(uniform_index(rng, network.size()));
  traj.segments.push_back(cur);
  while (traj.segments.size() < length) {
    const auto nbrs = network.out_neighbors(cur);
    if (nbrs.empty()) break;
    cur = nbrs[uniform_index(rng, nbrs.size())];
    traj.segments.push_back(cur);
  }
  return traj;
}

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

/// Floyd-Warshall all-pairs hop distances; the brute-force oracle for every
/// shortest-path quantity under test.
inline std::vector<std::vector<std::uint32_t>> floyd_warshall(const RoadNetwork& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::uint32_t>> dist(n, std::vector<std::uint32_t>(n, kInf));
  for (SegmentId i = 0; i < n; ++i) {
    dist[i][i] = 0;
    for (SegmentId j : g.out_neighbors(i)) dist[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i][k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (dist[k][j] == kInf) continue;
        dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
      }
    }
  }
  return dist;
}

/// Brute-force RS-T detour-ratio weights from Floyd-Warshall distances.
inline std::vector<double> rst_oracle(const RoadNetwork& g, const Trajectory& traj,
                                      double threshold) {
  const auto dist = floyd_warshall(g);
  const SegmentId origin = traj.segments.front();
  const SegmentId dest = traj.segments.back();
  std::vector<double> w(g.size(), 0.0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    const std::uint32_t reach = dist[origin][s];
    const std::uint32_t leave = dist[s][dest];
    std::uint32_t d = kInf;
    for (SegmentId t : traj.segments) d = std::min(d, dist[s][t]);
    if (reach == kInf || leave == kInf || d == kInf) continue;
    const double detour_len = static_cast<double>(reach) + leave + 1.0;
    double value = static_cast<double>(traj.segments.size()) / (detour_len + d);
    value = std::min(value, 1.0);
    if (value < threshold) continue;
    w[s] = value;
  }
  return w;
}

}  // namespace jclr::test
